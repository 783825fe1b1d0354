#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

#include "vistrip/tensor.hpp"

namespace vistrip::verify {

/// Input site of a single-value perturbation in a [T,H,W,C] volume.
struct ProbeSite {
  std::size_t frame = 0, row = 0, col = 0, channel = 0;
};

/// Output positions (frame, row, col) with at least one changed channel.
struct Footprint {
  std::vector<std::array<std::size_t, 3>> changed;

  bool empty() const { return changed.empty(); }
  bool within_frame(std::size_t t) const;
  /// Every changed position lies on row `i` or column `j` (any frame).
  bool within_cross(std::size_t i, std::size_t j) const;
};

using BlockFn = std::function<Tensor(const Tensor&)>;

/// Runs `block` on `x` and on `x` with `delta` added at `site`, and returns
/// every output position whose bits differ.
Footprint locality_probe(const BlockFn& block, const Tensor& x, const ProbeSite& site, double delta = 0.5);

}  // namespace vistrip::verify
