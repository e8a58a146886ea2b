#pragma once

// Binary frame-batch container.
//
//   offset  field
//   0       magic "SQZFRAME" (8 bytes)
//   8       format version, u32
//   12      n_alpha, n_s, phi1 as f64
//   36      rows, cols as u32
//   44      rows*cols pixel weights as f64
//   ...     seed u64, stream u32
//   ...     n_frames u64
//   ...     counts, u32, frame-major then row-major
//   end-8   FNV-1a 64-bit hash of every preceding byte
//
// All integers and IEEE-754 doubles are little-endian.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "sqzcam/camera_sim.hpp"

namespace sqzcam {

inline constexpr std::uint32_t kFrameFormatVersion = 1;

std::vector<std::uint8_t> encode_batch(const FrameBatch& b);
FrameBatch decode_batch(std::span<const std::uint8_t> bytes);

/// FNV-1a, 64-bit.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);

/// Checksum stored in the trailer of an encoded batch.
std::uint64_t batch_checksum(const FrameBatch& b);

void write_batch(const FrameBatch& b, const std::filesystem::path& path);
FrameBatch read_batch(const std::filesystem::path& path);

/// CSV export with columns frame,pixel,count.
void write_batch_csv(const FrameBatch& b, std::ostream& os);

}  // namespace sqzcam
