#pragma once

// JSON forms used on the HTTP surfaces and in state files. Binary fields are
// base64; every *_from_json throws Error(MalformedEncoding).

#include <json.hpp>

#include "lwm/error.hpp"
#include "lwm/evidence.hpp"
#include "lwm/logsim.hpp"
#include "lwm/notification.hpp"

namespace lwm {

using Json = nlohmann::json;

Json to_json(const SignedTreeHead& sth);
SignedTreeHead sth_from_json(const Json& j);

Json to_json(const LogEntry& entry);
LogEntry entry_from_json(const Json& j);

Json to_json(const Notification& n);
Notification notification_from_json(const Json& j);

/// Summary plus the full record, so exports stay re-verifiable.
Json to_json(const Evidence& e);
Evidence evidence_from_json(const Json& j);

Json digests_to_json(std::span<const Digest> ds);
std::vector<Digest> digests_from_json(const Json& j);

/// Wraps parsing and field access so JSON errors surface as Error.
Json parse_json(std::string_view text);

std::optional<Errc> errc_from_string(std::string_view name);

}  // namespace lwm
