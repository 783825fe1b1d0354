#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vistrip/tensor.hpp"

namespace vistrip::io {

/// Encodes an [H,W,3] frame as binary PPM. Values are clamped to [0,1] and
/// rounded to 8 bits.
std::string encode_ppm(const Tensor& frame);
/// Decodes P6 with maxval 255. Header comments are accepted. Errors report the
/// byte offset of the offending token.
Tensor decode_ppm(const std::string& bytes);

void write_ppm(const std::filesystem::path& path, const Tensor& frame);
Tensor read_ppm(const std::filesystem::path& path);

/// Rounds to the 8-bit grid used by the image writers.
Tensor quantize(const Tensor& frame);

bool png_supported();
/// Throws Error when built without libpng.
void write_png(const std::filesystem::path& path, const Tensor& frame);

/// Writes frame_000.ppm, frame_001.ppm, ... (or .png) for each frame of [T,H,W,3].
void write_sequence(const std::filesystem::path& dir, const Tensor& video, bool png = false);
/// Reads the frame_*.ppm files of a directory, in name order, as [T,H,W,3].
Tensor read_sequence(const std::filesystem::path& dir);

}  // namespace vistrip::io
