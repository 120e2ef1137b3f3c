#pragma once

// Binary checkpoint container, all integers and floats little-endian.
//
//   offset  size  field
//   0       8     magic "PCCKPT\0\0"
//   8       2     format major version (1)
//   10      2     format minor version (0)
//   12      4     reserved, zero
//   16      8     input_dim   (u64)
//   24      8     hidden_dim  (u64)
//   32      8     embed_dim   (u64)
//   40      8     init seed   (u64)
//   48      8     step count  (u64)
//   56      8     parameter count P (u64)
//   64      8P    theta       (IEEE-754 binary64)
//   64+8P   8P    Adam first moment
//   64+16P  8P    Adam second moment
//   64+24P  4     CRC-32 (zlib polynomial) of bytes [0, 64+24P)
//
// Readers accept any minor version of the same major version.

#include "pcc/encoder.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <span>
#include <vector>

namespace pcc {

inline constexpr std::uint16_t kCheckpointMajor = 1;
inline constexpr std::uint16_t kCheckpointMinor = 0;

std::vector<std::uint8_t> save_checkpoint(const EncoderParams& params);

/// Throws CheckpointError on bad magic, version mismatch, truncation,
/// inconsistent dimensions or checksum failure.
EncoderParams load_checkpoint(std::span<const std::uint8_t> bytes);

void write_checkpoint_file(const std::filesystem::path& path, const EncoderParams& params);
EncoderParams read_checkpoint_file(const std::filesystem::path& path);

/// Hex CRC-32 of the serialized checkpoint; used as a checkpoint id in reports.
std::string checkpoint_id(const EncoderParams& params);

} // namespace pcc
