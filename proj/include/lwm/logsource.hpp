#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lwm/logsim.hpp"

namespace lwm {

/// Read side of a log as seen by notifiers and monitors. Implementations
/// throw Error(LogUnreachable) on transport failure and pass through the
/// log's own RangeError.
class LogSource {
 public:
  virtual ~LogSource() = default;
  /// nullopt while the log has issued no STH.
  virtual std::optional<SignedTreeHead> latest_sth() = 0;
  virtual SignedTreeHead sth_at(std::uint64_t index) = 0;
  virtual std::vector<LogEntry> entries(std::uint64_t from_size, std::uint64_t to_size) = 0;
  virtual std::vector<Digest> consistency(std::uint64_t size1, std::uint64_t size2) = 0;
};

/// In-process access. The target can be swapped or cleared to simulate a
/// restart; while cleared every call throws LogUnreachable.
class LocalLogSource final : public LogSource {
 public:
  explicit LocalLogSource(const Log* log = nullptr) : log_(log) {}
  void rebind(const Log* log) { log_ = log; }

  std::optional<SignedTreeHead> latest_sth() override;
  SignedTreeHead sth_at(std::uint64_t index) override;
  std::vector<LogEntry> entries(std::uint64_t from_size, std::uint64_t to_size) override;
  std::vector<Digest> consistency(std::uint64_t size1, std::uint64_t size2) override;

 private:
  const Log& log() const;
  const Log* log_;
};

/// Client for the /ct/ endpoints served by LogServer.
class HttpLogSource final : public LogSource {
 public:
  /// base_url like "http://127.0.0.1:8080".
  explicit HttpLogSource(std::string base_url);
  ~HttpLogSource() override;

  std::optional<SignedTreeHead> latest_sth() override;
  SignedTreeHead sth_at(std::uint64_t index) override;
  std::vector<LogEntry> entries(std::uint64_t from_size, std::uint64_t to_size) override;
  std::vector<Digest> consistency(std::uint64_t size1, std::uint64_t size2) override;
  /// POST /ct/submit; returns the assigned sequence number.
  std::uint64_t submit(std::string_view subject, ByteView blob);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Serves a Log over HTTP. Runs its own listener thread.
class LogServer {
 public:
  explicit LogServer(Log& log);
  ~LogServer();
  LogServer(const LogServer&) = delete;
  LogServer& operator=(const LogServer&) = delete;

  /// Binds and starts listening; port 0 picks a free port. Returns the port.
  int start(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace lwm
