#pragma once

// Helpers shared by the HTTP servers and clients.

#include <httplib.h>

#include <charconv>
#include <functional>
#include <memory>
#include <thread>

#include "lwm/codec.hpp"
#include "lwm/error.hpp"

namespace lwm::http {

inline int status_for(Errc code) {
  switch (code) {
    case Errc::RangeError:
    case Errc::UnknownSubscription: return 404;
    case Errc::BatchEvicted: return 410;
    case Errc::SnapshotMismatch: return 409;
    case Errc::RateLimited: return 429;
    case Errc::MalformedName:
    case Errc::MalformedEncoding:
    case Errc::Config: return 400;
    case Errc::LogUnreachable: return 502;
    default: return 500;
  }
}

inline void reply(httplib::Response& res, const Json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

/// Runs a handler, turning library errors into JSON error bodies.
inline httplib::Server::Handler guarded(std::function<void(const httplib::Request&, httplib::Response&)> fn) {
  return [fn = std::move(fn)](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      reply(res, {{"error", to_string(e.code())}, {"message", e.what()}}, status_for(e.code()));
    } catch (const std::exception& e) {
      reply(res, {{"error", "Internal"}, {"message", e.what()}}, 500);
    }
  };
}

inline std::uint64_t u64_param(const httplib::Request& req, const std::string& name) {
  if (!req.has_param(name)) throw Error(Errc::MalformedEncoding, "missing parameter " + name);
  const auto& v = req.get_param_value(name);
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw Error(Errc::MalformedEncoding, "bad parameter " + name);
  return out;
}

/// Checks a client result; transport failures raise `unreachable`, error
/// bodies are re-raised with their original code.
inline Json expect_ok(const httplib::Result& r, Errc unreachable, const std::string& what) {
  if (!r) throw Error(unreachable, what + ": " + httplib::to_string(r.error()));
  if (r->status == 200) return parse_json(r->body);
  Errc code = unreachable;
  std::string msg = what + ": HTTP " + std::to_string(r->status);
  try {
    auto j = Json::parse(r->body);
    if (auto c = errc_from_string(j.value("error", ""))) code = *c;
    msg = j.value("message", msg);
  } catch (const Json::exception&) {
  }
  throw Error(code, msg);
}

/// httplib server on its own thread.
class Listener {
 public:
  httplib::Server server;

  int start(const std::string& host, int port) {
    int bound = port == 0 ? server.bind_to_any_port(host) : (server.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw Error(Errc::Io, "cannot bind " + host + ":" + std::to_string(port));
    thread_ = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
    return bound;
  }

  void stop() {
    if (thread_.joinable()) {
      server.stop();
      thread_.join();
    }
  }

  ~Listener() { stop(); }

 private:
  std::thread thread_;
};

inline std::unique_ptr<httplib::Client> make_client(const std::string& base_url) {
  auto c = std::make_unique<httplib::Client>(base_url);
  if (!c->is_valid()) throw Error(Errc::Config, "bad URL " + base_url);
  c->set_connection_timeout(5, 0);
  c->set_read_timeout(30, 0);
  return c;
}

}  // namespace lwm::http
