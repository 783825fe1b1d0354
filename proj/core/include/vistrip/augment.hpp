#pragma once

#include <cstdint>

#include "vistrip/tensor.hpp"

namespace vistrip::augment {

/// Spatial transform shared by both clips of a training pair: crop, optional
/// horizontal flip, then `quarter_turns` counter-clockwise 90-degree rotations.
struct SpatialTransform {
  std::size_t y0 = 0, x0 = 0, height = 0, width = 0;
  bool flip = false;
  unsigned quarter_turns = 0;
};

// All take and return [T,H,W,C] volumes.
Tensor crop(const Tensor& video, std::size_t y0, std::size_t x0, std::size_t height, std::size_t width);
Tensor flip_horizontal(const Tensor& video);
Tensor rotate90(const Tensor& video, unsigned quarter_turns);
Tensor apply(const Tensor& video, const SpatialTransform& tf);

/// Random crop position, flip and rotation. Throws ShapeError if the crop does not fit.
SpatialTransform random_transform(std::size_t height, std::size_t width, std::size_t crop_h, std::size_t crop_w,
                                  std::uint64_t seed);

struct Pair {
  Tensor clean;
  Tensor degraded;
};

Pair augment_pair(const Pair& pair, std::size_t crop_h, std::size_t crop_w, std::uint64_t seed);

}  // namespace vistrip::augment
