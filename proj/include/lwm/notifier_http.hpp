#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lwm/codec.hpp"
#include "lwm/notifier.hpp"

namespace lwm {

/// Serves /lwm/ endpoints for a Notifier and delivers pushes to
/// subscriptions that registered a callback URL.
class NotifierServer {
 public:
  explicit NotifierServer(Notifier& notifier);
  ~NotifierServer();
  NotifierServer(const NotifierServer&) = delete;
  NotifierServer& operator=(const NotifierServer&) = delete;

  /// Port 0 picks a free port. Returns the bound port.
  int start(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

class NotifierClient {
 public:
  explicit NotifierClient(std::string base_url);
  ~NotifierClient();

  std::string subscribe(const WildcardQuery& query, const std::string& callback_url = {});
  void unsubscribe(const std::string& id);
  std::vector<Notification> whats_new(const std::string& id, std::optional<std::uint64_t> since);
  Notification notification(const std::string& id, std::uint64_t sth_index);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Body POSTed to a callback URL: {"id", "notification"}.
Json push_body(const std::string& id, const Notification& n);

}  // namespace lwm
