#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <httplib.h>

#include <chrono>
#include <condition_variable>
#include <thread>

#include "lwm/error.hpp"
#include "lwm/notifier_http.hpp"
#include "protocol_support.hpp"

using namespace lwm;
using namespace lwm::test;

namespace {

Errc error_code(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return Errc::Io;
}

std::string url(int port) { return "http://127.0.0.1:" + std::to_string(port); }

}  // namespace

TEST_CASE("HTTP log source matches the local view") {
  World w;
  LogServer server(*w.log);
  int port = server.start("127.0.0.1", 0);
  REQUIRE(port > 0);
  HttpLogSource remote(url(port));

  CHECK_FALSE(remote.latest_sth().has_value());
  w.interval({"a.com", "b.org", "a.com"});
  CHECK(remote.submit("c.example.net", bytes_of("blob")) == 3);
  w.interval({});
  w.interval({"d.com"});

  CHECK(remote.latest_sth() == w.source.latest_sth());
  for (std::uint64_t i = 0; i < 3; ++i) CHECK(remote.sth_at(i) == w.source.sth_at(i));
  CHECK(remote.entries(0, 5) == w.source.entries(0, 5));
  CHECK(remote.entries(2, 4) == w.source.entries(2, 4));
  CHECK(remote.consistency(3, 5) == w.source.consistency(3, 5));
  CHECK(error_code([&] { (void)remote.sth_at(7); }) == Errc::RangeError);
  CHECK(error_code([&] { (void)remote.entries(4, 9); }) == Errc::RangeError);

  // A notifier fed over HTTP rebuilds the same batches.
  NotifierOptions opts;
  opts.clock = [&] { return w.now; };
  Notifier n(remote, opts);
  REQUIRE(n.poll().size() == 3);
  for (std::uint64_t i = 0; i < 3; ++i) CHECK(n.batch(i)->tree.root() == w.notifier->batch(i)->tree.root());
  CHECK(n.evidence().empty());

  server.stop();
  CHECK(error_code([&] { (void)remote.latest_sth(); }) == Errc::LogUnreachable);
}

TEST_CASE("notifier endpoints round-trip notifications") {
  World w;
  w.interval({"example.com", "a.example.com"});
  w.interval({"b.example.com", "x.org"});
  NotifierServer server(*w.notifier);
  int port = server.start("127.0.0.1", 0);
  NotifierClient client(url(port));

  auto id = client.subscribe(WildcardQuery::parse("*.example.com"));
  auto all = client.whats_new(id, std::nullopt);
  REQUIRE(all.size() == 2);
  CHECK(all[0] == w.notifier->notify(id, 0));
  CHECK(client.notification(id, 1) == all[1]);
  CHECK(client.whats_new(id, 1).empty());

  Subject s(w.subject_config("*.example.com"));
  for (const auto& n : all) CHECK(s.verify_notification(n, w.now).accepted());

  auto exact = client.subscribe(WildcardQuery::parse("*.example.com", false));
  CHECK(client.notification(exact, 0).proof.matches.size() == 1);

  CHECK(error_code([&] { (void)client.notification(id, 9); }) == Errc::RangeError);
  client.unsubscribe(id);
  CHECK(error_code([&] { (void)client.whats_new(id, std::nullopt); }) == Errc::UnknownSubscription);
  CHECK(error_code([&] { client.unsubscribe(id); }) == Errc::UnknownSubscription);

  httplib::Client raw("127.0.0.1", port);
  auto r = raw.Post("/lwm/subscribe", R"({"query": "*"})", "application/json");
  REQUIRE(r);
  CHECK(r->status == 400);

  server.stop();
  CHECK(error_code([&] { (void)client.whats_new(exact, std::nullopt); }) == Errc::Io);
}

TEST_CASE("pushes reach the callback URL") {
  httplib::Server sink;
  std::mutex m;
  std::condition_variable cv;
  std::vector<Json> got;
  sink.Post("/hook", [&](const httplib::Request& req, httplib::Response& res) {
    {
      std::lock_guard lock(m);
      got.push_back(Json::parse(req.body));
    }
    cv.notify_all();
    res.status = 200;
  });
  int sink_port = sink.bind_to_any_port("127.0.0.1");
  std::thread sink_thread([&] { sink.listen_after_bind(); });

  World w;
  NotifierServer server(*w.notifier);
  int port = server.start("127.0.0.1", 0);
  NotifierClient client(url(port));
  auto id = client.subscribe(WildcardQuery::parse("*.com"), url(sink_port) + "/hook");
  w.interval({"a.com"});
  w.interval({"b.org"});

  {
    std::unique_lock lock(m);
    cv.wait_for(lock, std::chrono::seconds(5), [&] { return got.size() >= 2; });
  }
  sink.stop();
  sink_thread.join();
  REQUIRE(got.size() == 2);
  Subject s(w.subject_config("*.com"));
  for (const auto& j : got) {
    CHECK(j["id"] == id);
    CHECK(s.verify_notification(notification_from_json(j["notification"]), w.now).accepted());
  }
}
