#include "sadq/train/checkpoint.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sadq/common/bytes.hpp"
#include "sadq/common/error.hpp"

namespace sadq {

namespace {

constexpr char kMagic[8] = {'S', 'A', 'D', 'Q', 'C', 'K', 'P', 'T'};

std::uint32_t crc_of(const std::string& data) {
  uLong crc = crc32(0L, Z_NULL, 0);
  const auto* p = reinterpret_cast<const Bytef*>(data.data());
  std::size_t left = data.size();
  while (left > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(left, 1u << 30));
    crc = crc32(crc, p, chunk);
    p += chunk;
    left -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

void write_checkpoint_file(const std::string& path, const std::string& payload) {
  ByteWriter header;
  for (char c : kMagic) header.put<char>(c);
  header.put<std::uint32_t>(kCheckpointVersion);
  header.put<std::uint64_t>(payload.size());
  header.put<std::uint32_t>(crc_of(payload));

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::kIoError, "cannot write checkpoint " + tmp);
    out.write(header.bytes().data(), static_cast<std::streamsize>(header.bytes().size()));
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    out.flush();
    if (!out) fail(ErrorKind::kIoError, "short write on checkpoint " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorKind::kIoError, "cannot move checkpoint into place at " + path + ": " + ec.message());
}

std::string read_checkpoint_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIoError, "cannot open checkpoint " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string data = ss.str();

  ByteReader r(data);
  char magic[8];
  for (char& c : magic) c = r.get<char>();
  if (std::memcmp(magic, kMagic, sizeof magic) != 0) fail(ErrorKind::kCorruptChecksum, path + " is not a checkpoint");
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    fail(ErrorKind::kVersionMismatch, path + ": checkpoint format version " + std::to_string(version) +
                                          ", this build reads " + std::to_string(kCheckpointVersion));
  }
  const auto length = r.get<std::uint64_t>();
  const auto crc = r.get<std::uint32_t>();
  constexpr std::size_t kHeader = 8 + 4 + 8 + 4;
  if (data.size() - kHeader != length) fail(ErrorKind::kCorruptChecksum, path + ": payload length mismatch");
  std::string payload = data.substr(kHeader);
  if (crc_of(payload) != crc) fail(ErrorKind::kCorruptChecksum, path + ": checksum mismatch");
  return payload;
}

}  // namespace sadq
