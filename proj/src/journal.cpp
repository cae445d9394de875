#include "lwm/journal.hpp"

#include <fstream>
#include <iterator>

#include "lwm/error.hpp"

namespace lwm::journal {

void append(const std::filesystem::path& file, ByteView record) {
  ByteWriter w;
  w.var32(record);
  std::ofstream out(file, std::ios::binary | std::ios::app);
  if (!out) throw Error(Errc::Io, "cannot append to " + file.string());
  out.write(reinterpret_cast<const char*>(w.bytes().data()), static_cast<std::streamsize>(w.bytes().size()));
  out.flush();
  if (!out) throw Error(Errc::Io, "short write to " + file.string());
}

std::vector<Bytes> read_all(const std::filesystem::path& file) {
  if (!std::filesystem::exists(file)) return {};
  Bytes data;
  {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw Error(Errc::Io, "cannot read " + file.string());
    data.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  std::vector<Bytes> out;
  std::size_t good = 0;
  ByteReader r(data);
  while (r.remaining() >= 4) {
    std::uint32_t len = r.u32();
    if (len > r.remaining()) break;
    auto rec = r.raw(len);
    out.emplace_back(rec.begin(), rec.end());
    good = data.size() - r.remaining();
  }
  if (good != data.size()) std::filesystem::resize_file(file, good);
  return out;
}

Bytes pack(const std::vector<Bytes>& records) {
  ByteWriter w;
  for (const auto& r : records) w.var32(r);
  return std::move(w).take();
}

std::vector<Bytes> unpack(ByteView data) {
  std::vector<Bytes> out;
  ByteReader r(data);
  try {
    while (!r.done()) {
      auto rec = r.var32();
      out.emplace_back(rec.begin(), rec.end());
    }
  } catch (const Error&) {
    throw Error(Errc::MalformedRecord, "truncated record");
  }
  return out;
}

void write_atomic(const std::filesystem::path& file, ByteView contents) {
  auto tmp = file;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(contents.data()), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error(Errc::Io, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, file);
}

}  // namespace lwm::journal
