#include "lwm/notifier_http.hpp"

#include <mutex>

#include "http_common.hpp"

namespace lwm {

namespace {

std::string path_encode(const std::string& s) {
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '.' || c == '_') {
      out.push_back(static_cast<char>(c));
    } else {
      static constexpr char kHex[] = "0123456789ABCDEF";
      out += '%';
      out += kHex[c >> 4];
      out += kHex[c & 15];
    }
  }
  return out;
}

std::optional<std::uint64_t> optional_u64(const httplib::Request& req, const std::string& name) {
  if (!req.has_param(name) || req.get_param_value(name).empty()) return std::nullopt;
  return http::u64_param(req, name);
}

}  // namespace

Json push_body(const std::string& id, const Notification& n) { return {{"id", id}, {"notification", to_json(n)}}; }

struct NotifierServer::Impl {
  Notifier& notifier;
  http::Listener listener;
  explicit Impl(Notifier& n) : notifier(n) {}
};

NotifierServer::NotifierServer(Notifier& notifier) : impl_(std::make_unique<Impl>(notifier)) {
  auto& srv = impl_->listener.server;
  Notifier& nt = notifier;

  srv.Post("/lwm/subscribe", http::guarded([&nt](const httplib::Request& req, httplib::Response& res) {
             auto j = parse_json(req.body);
             if (!j.is_object() || !j.contains("query") || !j["query"].is_string())
               throw Error(Errc::MalformedEncoding, "expected {query}");
             bool apex = j.value("apex_included", true);
             std::string callback = j.value("callback", "");
             auto id = nt.subscribe(WildcardQuery::parse(j["query"].get<std::string>(), apex), {}, callback);
             http::reply(res, {{"id", id}});
           }));
  srv.Delete(R"(/lwm/subscribe/([0-9a-f]+))", http::guarded([&nt](const httplib::Request& req, httplib::Response& res) {
               nt.unsubscribe(req.matches[1]);
               http::reply(res, {{"ok", true}});
             }));
  srv.Get("/lwm/new", http::guarded([&nt](const httplib::Request& req, httplib::Response& res) {
            Json arr = Json::array();
            for (const auto& n : nt.whats_new(req.get_param_value("id"), optional_u64(req, "since")))
              arr.push_back(to_json(n));
            http::reply(res, {{"notifications", arr}});
          }));
  srv.Get("/lwm/notification", http::guarded([&nt](const httplib::Request& req, httplib::Response& res) {
            http::reply(res, to_json(nt.notify(req.get_param_value("id"), http::u64_param(req, "sth_index"))));
          }));

  // One client per callback target, created on first use.
  auto clients = std::make_shared<std::map<std::string, std::unique_ptr<httplib::Client>>>();
  auto mutex = std::make_shared<std::mutex>();
  notifier.set_push([clients, mutex](const Subscription& sub, const Notification& n) {
    auto base = sub.callback_url;
    auto path = std::string("/");
    if (auto p = base.find('/', base.find("://") == std::string::npos ? 0 : base.find("://") + 3);
        p != std::string::npos) {
      path = base.substr(p);
      base = base.substr(0, p);
    }
    std::lock_guard lock(*mutex);
    auto& c = (*clients)[base];
    if (!c) c = http::make_client(base);
    (void)c->Post(path, push_body(sub.id, n).dump(), "application/json");
  });
}

NotifierServer::~NotifierServer() {
  stop();
  impl_->notifier.set_push({});
}

int NotifierServer::start(const std::string& host, int port) { return impl_->listener.start(host, port); }

void NotifierServer::stop() { impl_->listener.stop(); }

struct NotifierClient::Impl {
  std::unique_ptr<httplib::Client> client;
  std::mutex mutex;
};

NotifierClient::NotifierClient(std::string base_url) : impl_(std::make_unique<Impl>()) {
  impl_->client = http::make_client(base_url);
}

NotifierClient::~NotifierClient() = default;

std::string NotifierClient::subscribe(const WildcardQuery& query, const std::string& callback_url) {
  Json body = {{"query", query.raw()}, {"apex_included", query.apex_included()}};
  if (!callback_url.empty()) body["callback"] = callback_url;
  std::lock_guard lock(impl_->mutex);
  auto j = http::expect_ok(impl_->client->Post("/lwm/subscribe", body.dump(), "application/json"), Errc::Io,
                           "POST /lwm/subscribe");
  if (!j.contains("id") || !j["id"].is_string()) throw Error(Errc::MalformedEncoding, "missing id");
  return j["id"].get<std::string>();
}

void NotifierClient::unsubscribe(const std::string& id) {
  std::lock_guard lock(impl_->mutex);
  http::expect_ok(impl_->client->Delete("/lwm/subscribe/" + path_encode(id)), Errc::Io, "DELETE /lwm/subscribe");
}

std::vector<Notification> NotifierClient::whats_new(const std::string& id, std::optional<std::uint64_t> since) {
  std::string path = "/lwm/new?id=" + path_encode(id);
  if (since) path += "&since=" + std::to_string(*since);
  Json j;
  {
    std::lock_guard lock(impl_->mutex);
    j = http::expect_ok(impl_->client->Get(path), Errc::Io, "GET /lwm/new");
  }
  std::vector<Notification> out;
  if (!j.contains("notifications") || !j["notifications"].is_array())
    throw Error(Errc::MalformedEncoding, "missing notifications");
  for (const auto& n : j["notifications"]) out.push_back(notification_from_json(n));
  return out;
}

Notification NotifierClient::notification(const std::string& id, std::uint64_t sth_index) {
  std::string path = "/lwm/notification?id=" + path_encode(id) + "&sth_index=" + std::to_string(sth_index);
  std::lock_guard lock(impl_->mutex);
  return notification_from_json(http::expect_ok(impl_->client->Get(path), Errc::Io, "GET /lwm/notification"));
}

}  // namespace lwm
