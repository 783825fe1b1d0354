#include "vistrip/footprint.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "vistrip/random.hpp"
#include "vistrip/strip_attention.hpp"

namespace vistrip::attn {

Tensor full_attention_forward(const Tensor& x, std::size_t heads, std::uint64_t* entries_per_head_set) {
  if (x.rank() != 4) throw ShapeError("full attention expects [T,H,W,C], got " + vistrip::to_string(x.shape()));
  const std::size_t c = x.extent(3);
  if (heads == 0 || c % heads != 0) throw ConfigError("full attention: channels not divisible by heads");
  const std::size_t n = x.size() / c;
  const std::size_t d = c / heads;

  // Per-token LN without affine parameters.
  Tensor z(x.shape());
  for (std::size_t i = 0; i < n; ++i) {
    const double* in = x.raw() + i * c;
    double mu = 0.0, var = 0.0;
    for (std::size_t j = 0; j < c; ++j) mu += in[j];
    mu /= static_cast<double>(c);
    for (std::size_t j = 0; j < c; ++j) var += (in[j] - mu) * (in[j] - mu);
    const double is = 1.0 / std::sqrt(var / static_cast<double>(c) + 1e-5);
    for (std::size_t j = 0; j < c; ++j) z[i * c + j] = (in[j] - mu) * is;
  }

  Tensor out(x.shape());
  std::vector<double> row(n);
  std::uint64_t entries = 0;
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::size_t m = 0; m < heads; ++m) {
    for (std::size_t q = 0; q < n; ++q) {
      const double* qv = z.raw() + q * c + m * d;
      double mx = -INFINITY;
      for (std::size_t k = 0; k < n; ++k) {
        const double* kv = z.raw() + k * c + m * d;
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += qv[j] * kv[j];
        row[k] = s * inv_scale;
        mx = std::max(mx, row[k]);
      }
      double total = 0.0;
      for (std::size_t k = 0; k < n; ++k) total += (row[k] = std::exp(row[k] - mx));
      double* o = out.raw() + q * c + m * d;
      for (std::size_t k = 0; k < n; ++k) {
        const double a = row[k] / total;
        const double* vv = z.raw() + k * c + m * d;
        for (std::size_t j = 0; j < d; ++j) o[j] += a * vv[j];
      }
      if (m == 0) entries += n;
    }
  }
  if (entries_per_head_set) *entries_per_head_set = entries;
  return out;
}

FootprintReport attention_footprint(std::size_t frames, std::size_t height, std::size_t width,
                                    FootprintMode mode) {
  if (frames == 0 || height == 0 || width == 0) throw ConfigError("footprint extents must be positive");
  FootprintReport r;
  r.frames = frames;
  r.height = height;
  r.width = width;
  const std::uint64_t t = frames, h = height, w = width;
  r.intra_closed = t * (h * h + w * w);
  r.inter_closed = (h + w) * t * t;
  r.joint_closed = t * t * (h * h + w * w);
  r.full_closed = (h * w * t) * (h * w * t);
  if (mode == FootprintMode::ClosedForm) return r;

  // Smallest legal block: C = 4, two heads, so per-head-set counts are
  // checked against a genuinely multi-head pass.
  constexpr std::size_t kChannels = 4, kHeads = 2;
  Rng rng(0x5eed0f00du + t * 131 + h * 17 + w);
  const Tensor x = random_normal({frames, height, width, kChannels}, rng);
  const StripAttentionParams p = init_strip_params(kChannels, kHeads, rng);

  StripTrace intra, inter, joint;
  apply_block(x, p, {Mechanism::Intra, Directions::Both}, &intra);
  apply_block(x, p, {Mechanism::Inter, Directions::Both}, &inter);
  apply_block(x, p, {Mechanism::Joint, Directions::Both}, &joint);
  r.intra_entries = intra.entries_per_head_set;
  r.inter_entries = inter.entries_per_head_set;
  r.joint_entries = joint.entries_per_head_set;
  std::uint64_t full = 0;
  full_attention_forward(x, kHeads, &full);
  r.full_entries = full;
  r.measured = true;
  return r;
}

}  // namespace vistrip::attn
