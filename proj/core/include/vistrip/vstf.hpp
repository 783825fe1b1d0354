#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "vistrip/tensor.hpp"

namespace vistrip {

// VSTF tensor encoding, all fields little-endian:
//   "VSTF" | u32 version (=1) | u8 rank | rank x u64 extents | f32 payload
inline constexpr std::uint32_t kVstfVersion = 1;

/// Number of bytes write_vstf emits for a tensor of this shape.
std::size_t vstf_encoded_size(const Shape& shape);

void write_vstf(std::ostream& os, const Tensor& t);
/// Throws FormatError on bad magic, version, rank, or truncated payload.
Tensor read_vstf(std::istream& is);

void save_vstf(const std::filesystem::path& path, const Tensor& t);
Tensor load_vstf(const std::filesystem::path& path);

/// Rounds every element to the nearest float, the precision VSTF stores.
void round_to_f32(Tensor& t);

}  // namespace vistrip
