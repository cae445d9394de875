#include "lwm/logsource.hpp"

#include <mutex>

#include "http_common.hpp"

namespace lwm {

const Log& LocalLogSource::log() const {
  if (log_ == nullptr) throw Error(Errc::LogUnreachable, "log is down");
  return *log_;
}

std::optional<SignedTreeHead> LocalLogSource::latest_sth() {
  if (log().sth_count() == 0) return std::nullopt;
  return log().get_sth();
}

SignedTreeHead LocalLogSource::sth_at(std::uint64_t index) { return log().get_sth_at(index); }

std::vector<LogEntry> LocalLogSource::entries(std::uint64_t from_size, std::uint64_t to_size) {
  return log().get_entries(from_size, to_size);
}

std::vector<Digest> LocalLogSource::consistency(std::uint64_t size1, std::uint64_t size2) {
  return log().consistency_proof(size1, size2);
}

struct HttpLogSource::Impl {
  std::unique_ptr<httplib::Client> client;
  std::mutex mutex;  // httplib::Client is not safe for concurrent use

  Json get(const std::string& path) {
    std::lock_guard lock(mutex);
    return http::expect_ok(client->Get(path), Errc::LogUnreachable, "GET " + path);
  }
};

HttpLogSource::HttpLogSource(std::string base_url) : impl_(std::make_unique<Impl>()) {
  impl_->client = http::make_client(base_url);
}

HttpLogSource::~HttpLogSource() = default;

std::optional<SignedTreeHead> HttpLogSource::latest_sth() {
  try {
    return sth_from_json(impl_->get("/ct/sth"));
  } catch (const Error& e) {
    if (e.code() == Errc::RangeError) return std::nullopt;
    throw;
  }
}

SignedTreeHead HttpLogSource::sth_at(std::uint64_t index) {
  return sth_from_json(impl_->get("/ct/sth/" + std::to_string(index)));
}

std::vector<LogEntry> HttpLogSource::entries(std::uint64_t from_size, std::uint64_t to_size) {
  auto j = impl_->get("/ct/entries?start=" + std::to_string(from_size) + "&end=" + std::to_string(to_size));
  std::vector<LogEntry> out;
  try {
    for (const auto& e : j.at("entries")) out.push_back(entry_from_json(e));
  } catch (const Json::exception& e) {
    throw Error(Errc::MalformedEncoding, e.what());
  }
  return out;
}

std::vector<Digest> HttpLogSource::consistency(std::uint64_t size1, std::uint64_t size2) {
  auto j = impl_->get("/ct/proof/consistency?first=" + std::to_string(size1) + "&second=" + std::to_string(size2));
  if (!j.contains("consistency")) throw Error(Errc::MalformedEncoding, "missing consistency field");
  return digests_from_json(j["consistency"]);
}

std::uint64_t HttpLogSource::submit(std::string_view subject, ByteView blob) {
  Json body = {{"subject", std::string(subject)}, {"blob", base64_encode(blob)}};
  std::lock_guard lock(impl_->mutex);
  auto j = http::expect_ok(impl_->client->Post("/ct/submit", body.dump(), "application/json"), Errc::LogUnreachable,
                           "POST /ct/submit");
  if (!j.contains("seq") || !j["seq"].is_number_unsigned()) throw Error(Errc::MalformedEncoding, "missing seq");
  return j["seq"].get<std::uint64_t>();
}

struct LogServer::Impl {
  Log& log;
  http::Listener listener;
  explicit Impl(Log& l) : log(l) {}
};

LogServer::LogServer(Log& log) : impl_(std::make_unique<Impl>(log)) {
  auto& srv = impl_->listener.server;
  Log& lg = log;
  srv.Get("/ct/sth", http::guarded([&lg](const httplib::Request&, httplib::Response& res) {
            http::reply(res, to_json(lg.get_sth()));
          }));
  srv.Get(R"(/ct/sth/(\d+))", http::guarded([&lg](const httplib::Request& req, httplib::Response& res) {
            std::uint64_t idx = 0;
            const std::string s = req.matches[1];
            auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), idx);
            if (ec != std::errc() || p != s.data() + s.size()) throw Error(Errc::MalformedEncoding, "bad index");
            http::reply(res, to_json(lg.get_sth_at(idx)));
          }));
  srv.Get("/ct/entries", http::guarded([&lg](const httplib::Request& req, httplib::Response& res) {
            Json arr = Json::array();
            for (const auto& e : lg.get_entries(http::u64_param(req, "start"), http::u64_param(req, "end")))
              arr.push_back(to_json(e));
            http::reply(res, {{"entries", arr}});
          }));
  srv.Get("/ct/proof/consistency", http::guarded([&lg](const httplib::Request& req, httplib::Response& res) {
            auto proof = lg.consistency_proof(http::u64_param(req, "first"), http::u64_param(req, "second"));
            http::reply(res, {{"consistency", digests_to_json(proof)}});
          }));
  srv.Post("/ct/submit", http::guarded([&lg](const httplib::Request& req, httplib::Response& res) {
             auto j = parse_json(req.body);
             if (!j.is_object() || !j.contains("subject") || !j["subject"].is_string() || !j.contains("blob") ||
                 !j["blob"].is_string())
               throw Error(Errc::MalformedEncoding, "expected {subject, blob}");
             auto seq = lg.submit(j["subject"].get<std::string>(), base64_decode(j["blob"].get<std::string>()));
             http::reply(res, {{"seq", seq}});
           }));
}

LogServer::~LogServer() { stop(); }

int LogServer::start(const std::string& host, int port) { return impl_->listener.start(host, port); }

void LogServer::stop() { impl_->listener.stop(); }

}  // namespace lwm
