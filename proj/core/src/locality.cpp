#include "vistrip/locality.hpp"

#include <cstring>

namespace vistrip::verify {

bool Footprint::within_frame(std::size_t t) const {
  for (const auto& p : changed)
    if (p[0] != t) return false;
  return true;
}

bool Footprint::within_cross(std::size_t i, std::size_t j) const {
  for (const auto& p : changed)
    if (p[1] != i && p[2] != j) return false;
  return true;
}

Footprint locality_probe(const BlockFn& block, const Tensor& x, const ProbeSite& site, double delta) {
  if (x.rank() != 4) throw ShapeError("locality_probe: expected [T,H,W,C], got " + vistrip::to_string(x.shape()));
  Tensor moved = x;
  moved.at({site.frame, site.row, site.col, site.channel}) += delta;
  const Tensor a = block(x);
  const Tensor b = block(moved);
  if (a.shape() != b.shape() || a.rank() != 4) throw ShapeError("locality_probe: block output must be [T,H,W,C]");
  const std::size_t T = a.extent(0), H = a.extent(1), W = a.extent(2), C = a.extent(3);
  Footprint fp;
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t y = 0; y < H; ++y)
      for (std::size_t xx = 0; xx < W; ++xx) {
        const std::size_t off = ((t * H + y) * W + xx) * C;
        if (std::memcmp(a.raw() + off, b.raw() + off, C * sizeof(double)) != 0) fp.changed.push_back({t, y, xx});
      }
  return fp;
}

}  // namespace vistrip::verify
