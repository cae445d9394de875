#pragma once

#include <filesystem>
#include <vector>

#include "lwm/bytes.hpp"

namespace lwm {

/// Append-only file of u32-length-prefixed records.
namespace journal {

void append(const std::filesystem::path& file, ByteView record);

/// Reads every complete record. A torn trailing record (crash mid-append) is
/// dropped and the file is truncated back to the last whole record.
std::vector<Bytes> read_all(const std::filesystem::path& file);

/// Concatenated records, for in-memory export.
Bytes pack(const std::vector<Bytes>& records);
/// Throws Error(MalformedRecord) on a short record.
std::vector<Bytes> unpack(ByteView data);

/// Replaces `file` with `contents` via a temporary and rename.
void write_atomic(const std::filesystem::path& file, ByteView contents);

}  // namespace journal
}  // namespace lwm
