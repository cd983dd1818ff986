#pragma once

#include <cstdint>
#include <string>

namespace sadq {

inline constexpr std::uint32_t kCheckpointVersion = 2;

/// Writes magic, version, payload length, CRC-32 and payload to a temporary
/// file next to path, then renames it over path.
void write_checkpoint_file(const std::string& path, const std::string& payload);

/// Returns the verified payload. IoError when unreadable, VersionMismatch for
/// other format versions, CorruptChecksum for truncated or altered files.
std::string read_checkpoint_file(const std::string& path);

}  // namespace sadq
