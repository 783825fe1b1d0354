#include "vistrip/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vistrip/random.hpp"

namespace vistrip::synth {

namespace {

constexpr double kPi = std::numbers::pi;

// cos/sin of an angle in degrees, exact at multiples of 90.
std::array<double, 2> direction(double deg) {
  double c = std::cos(deg * kPi / 180.0);
  double s = std::sin(deg * kPi / 180.0);
  if (std::abs(c) < 1e-12) c = 0.0;
  if (std::abs(s) < 1e-12) s = 0.0;
  return {c, s};
}

std::size_t wrap(long v, std::size_t n) {
  const long m = static_cast<long>(n);
  return static_cast<std::size_t>(((v % m) + m) % m);
}

void require_frame(const Tensor& t, const char* what) {
  if (t.rank() != 3 || t.size() == 0)
    throw ShapeError(std::string(what) + ": expected [H,W,C] frame, got " + vistrip::to_string(t.shape()));
}

void clamp01(Tensor& t) {
  for (double& v : t.data()) v = std::clamp(v, 0.0, 1.0);
}

// Bilinear splat of weight `w` at fractional (y, x) into a wrapped [h,w] plane.
void splat(std::vector<double>& plane, std::size_t h, std::size_t w, double y, double x, double weight) {
  const double fy = std::floor(y), fx = std::floor(x);
  const double ay = y - fy, ax = x - fx;
  const long iy = static_cast<long>(fy), ix = static_cast<long>(fx);
  const double wts[4] = {(1 - ay) * (1 - ax), (1 - ay) * ax, ay * (1 - ax), ay * ax};
  const long dy[4] = {0, 0, 1, 1}, dx[4] = {0, 1, 0, 1};
  for (int k = 0; k < 4; ++k) {
    if (wts[k] == 0.0) continue;
    plane[wrap(iy + dy[k], h) * w + wrap(ix + dx[k], w)] += weight * wts[k];
  }
}

Tensor apply_blur(const Tensor& img, const DegradationSpec& spec) {
  const Tensor k = blur_kernel(spec.magnitude, spec.orientation_deg);
  const std::size_t h = img.extent(0), w = img.extent(1), c = img.extent(2);
  const std::size_t ks = k.extent(0);
  const long r = static_cast<long>(ks / 2);
  Tensor out(img.shape());
  for (std::size_t i = 0; i < ks; ++i)
    for (std::size_t j = 0; j < ks; ++j) {
      const double kv = k[i * ks + j];
      if (kv == 0.0) continue;
      for (std::size_t y = 0; y < h; ++y) {
        const std::size_t sy = wrap(static_cast<long>(y) + static_cast<long>(i) - r, h);
        for (std::size_t x = 0; x < w; ++x) {
          const std::size_t sx = wrap(static_cast<long>(x) + static_cast<long>(j) - r, w);
          const double* src = img.raw() + (sy * w + sx) * c;
          double* dst = out.raw() + (y * w + x) * c;
          for (std::size_t ch = 0; ch < c; ++ch) dst[ch] += kv * src[ch];
        }
      }
    }
  return out;
}

Tensor apply_rain(const Tensor& img, const DegradationSpec& spec) {
  const std::size_t h = img.extent(0), w = img.extent(1), c = img.extent(2);
  const auto count = static_cast<std::size_t>(std::llround(spec.density * static_cast<double>(h * w) / 100.0));
  Tensor out = img;
  if (count == 0) return out;
  Rng rng(Rng::mix(spec.seed, 0x7261696e));
  std::vector<double> mask(h * w, 0.0);
  for (std::size_t n = 0; n < count; ++n) {
    const double cy = rng.uniform(0.0, static_cast<double>(h));
    const double cx = rng.uniform(0.0, static_cast<double>(w));
    const double len = spec.magnitude * rng.uniform(0.7, 1.3);
    const auto [dc, ds] = direction(spec.orientation_deg + 3.0 * rng.normal());
    const double bright = rng.uniform(0.35, 0.75);
    const auto steps = static_cast<std::size_t>(std::ceil(len * 4.0)) + 1;
    for (std::size_t s = 0; s < steps; ++s) {
      const double u = -len / 2 + len * static_cast<double>(s) / static_cast<double>(steps - 1);
      splat(mask, h, w, cy + u * ds, cx + u * dc, 0.25 * bright);
    }
  }
  for (std::size_t i = 0; i < h * w; ++i) {
    const double m = std::min(mask[i], 1.0);
    for (std::size_t ch = 0; ch < c; ++ch) out[i * c + ch] += m;
  }
  return out;
}

Tensor apply_moire(const Tensor& img, const DegradationSpec& spec) {
  const std::size_t h = img.extent(0), w = img.extent(1), c = img.extent(2);
  Tensor out = img;
  if (spec.density == 0.0) return out;
  Rng rng(Rng::mix(spec.seed, 0x6d6f6972));
  const double phase = rng.uniform(0.0, 2 * kPi);
  const auto [dc, ds] = direction(spec.orientation_deg);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const double u = static_cast<double>(x) * dc + static_cast<double>(y) * ds;
      for (std::size_t ch = 0; ch < c; ++ch) {
        const double wave = std::sin(2 * kPi * spec.magnitude * u + phase + 2 * kPi * static_cast<double>(ch) / 3.0);
        out[(y * w + x) * c + ch] *= 1.0 - spec.density * 0.5 * (1.0 + wave);
      }
    }
  return out;
}

// Tileable value noise with smoothstep interpolation; `cells` lattice cells per axis.
void add_value_noise(Tensor& img, std::size_t cells_y, std::size_t cells_x, double amp, Rng& rng) {
  const std::size_t h = img.extent(0), w = img.extent(1), c = img.extent(2);
  std::vector<double> lattice(cells_y * cells_x * c);
  for (double& v : lattice) v = rng.uniform(-1.0, 1.0);
  auto smooth = [](double t) { return t * t * (3 - 2 * t); };
  for (std::size_t y = 0; y < h; ++y) {
    const double gy = static_cast<double>(y) * static_cast<double>(cells_y) / static_cast<double>(h);
    const auto y0 = static_cast<std::size_t>(gy) % cells_y, y1 = (y0 + 1) % cells_y;
    const double ty = smooth(gy - std::floor(gy));
    for (std::size_t x = 0; x < w; ++x) {
      const double gx = static_cast<double>(x) * static_cast<double>(cells_x) / static_cast<double>(w);
      const auto x0 = static_cast<std::size_t>(gx) % cells_x, x1 = (x0 + 1) % cells_x;
      const double tx = smooth(gx - std::floor(gx));
      for (std::size_t ch = 0; ch < c; ++ch) {
        auto at = [&](std::size_t yy, std::size_t xx) { return lattice[(yy * cells_x + xx) * c + ch]; };
        const double top = at(y0, x0) * (1 - tx) + at(y0, x1) * tx;
        const double bot = at(y1, x0) * (1 - tx) + at(y1, x1) * tx;
        img[(y * w + x) * c + ch] += amp * (top * (1 - ty) + bot * ty);
      }
    }
  }
}

// Signed wrap-around distance from a to b along an axis of length n.
double wrap_delta(double a, double b, double n) {
  double d = std::fmod(a - b, n);
  if (d > n / 2) d -= n;
  if (d < -n / 2) d += n;
  return d;
}

}  // namespace

const char* to_string(DegradationKind k) {
  switch (k) {
    case DegradationKind::Blur: return "blur";
    case DegradationKind::Rain: return "rain";
    case DegradationKind::Moire: return "moire";
  }
  return "?";
}

DegradationKind parse_degradation(const std::string& s) {
  if (s == "blur") return DegradationKind::Blur;
  if (s == "rain") return DegradationKind::Rain;
  if (s == "moire") return DegradationKind::Moire;
  throw ConfigError("unknown degradation '" + s + "' (expected blur, rain or moire)");
}

void DegradationSpec::validate() const {
  switch (kind) {
    case DegradationKind::Blur:
      if (!(magnitude >= 1.0)) throw ConfigError("blur length must be >= 1");
      break;
    case DegradationKind::Rain:
      if (!(density >= 0.0)) throw ConfigError("rain density must be >= 0");
      if (!(magnitude > 0.0)) throw ConfigError("rain streak length must be positive");
      break;
    case DegradationKind::Moire:
      if (!(density >= 0.0 && density <= 1.0)) throw ConfigError("moire depth must be in [0, 1]");
      if (!(magnitude > 0.0)) throw ConfigError("moire frequency must be positive");
      break;
    default:
      throw ConfigError("unknown degradation kind");
  }
  if (!std::isfinite(orientation_deg)) throw ConfigError("orientation must be finite");
}

Tensor blur_kernel(double length, double orientation_deg) {
  if (!(length >= 1.0)) throw ConfigError("blur length must be >= 1");
  if (length <= 1.0) return Tensor({1, 1}, 1.0);
  const double half = length / 2.0;
  const std::size_t r = static_cast<std::size_t>(std::ceil(half));
  const std::size_t k = 2 * r + 1;
  const auto [c, s] = direction(orientation_deg);
  const auto samples = static_cast<std::size_t>(std::ceil(16.0 * length));
  std::vector<double> plane(k * k, 0.0);
  for (std::size_t i = 0; i < samples; ++i) {
    const double u = -half + length * (static_cast<double>(i) + 0.5) / static_cast<double>(samples);
    splat(plane, k, k, static_cast<double>(r) + u * s, static_cast<double>(r) + u * c, 1.0);
  }
  double total = 0.0;
  for (double v : plane) total += v;
  Tensor out({k, k});
  for (std::size_t i = 0; i < plane.size(); ++i) out[i] = plane[i] / total;
  return out;
}

Tensor degrade_frame(const Tensor& clean, const DegradationSpec& spec) {
  require_frame(clean, "degrade_frame");
  spec.validate();
  Tensor out;
  switch (spec.kind) {
    case DegradationKind::Blur: out = apply_blur(clean, spec); break;
    case DegradationKind::Rain: out = apply_rain(clean, spec); break;
    case DegradationKind::Moire: out = apply_moire(clean, spec); break;
  }
  clamp01(out);
  return out;
}

Tensor procedural_base(std::size_t height, std::size_t width, std::uint64_t seed) {
  if (height == 0 || width == 0) throw ShapeError("procedural_base: empty extents");
  Rng rng(Rng::mix(seed, 0x62617365));
  Tensor img({height, width, 3}, 0.5);
  const std::size_t base_cells = std::max<std::size_t>(2, std::min(height, width) / 12);
  add_value_noise(img, base_cells, base_cells, 0.25, rng);
  add_value_noise(img, 2 * base_cells, 2 * base_cells, 0.12, rng);
  add_value_noise(img, 4 * base_cells, 4 * base_cells, 0.06, rng);

  const double H = static_cast<double>(height), W = static_cast<double>(width);
  const double area = H * W;
  const auto shapes = 4 + static_cast<std::size_t>(area / 400.0) + rng.below(4);
  for (std::size_t n = 0; n < shapes; ++n) {
    const double cy = rng.uniform(0.0, H), cx = rng.uniform(0.0, W);
    const double ry = rng.uniform(2.0, std::max(3.0, H / 5)), rx = rng.uniform(2.0, std::max(3.0, W / 5));
    const bool disc = rng.coin();
    const double color[3] = {rng.uniform(), rng.uniform(), rng.uniform()};
    for (std::size_t y = 0; y < height; ++y)
      for (std::size_t x = 0; x < width; ++x) {
        const double dy = wrap_delta(static_cast<double>(y), cy, H) / ry;
        const double dx = wrap_delta(static_cast<double>(x), cx, W) / rx;
        const bool inside = disc ? dy * dy + dx * dx <= 1.0 : std::abs(dy) <= 1.0 && std::abs(dx) <= 1.0;
        if (!inside) continue;
        for (std::size_t ch = 0; ch < 3; ++ch) img[(y * width + x) * 3 + ch] = color[ch];
      }
  }

  // Rows of short dark strokes, like lines of text.
  const auto lines = 1 + static_cast<std::size_t>(H / 24.0);
  for (std::size_t l = 0; l < lines; ++l) {
    const auto y0 = rng.below(height);
    const bool vertical = rng.uniform() < 0.3;
    const double ink = rng.uniform(0.0, 0.25);
    std::size_t pos = rng.below(4);
    const std::size_t span = vertical ? height : width;
    while (pos < span) {
      const std::size_t len = 2 + rng.below(5);
      for (std::size_t p = pos; p < std::min(pos + len, span); ++p)
        for (std::size_t thick = 0; thick < 2; ++thick) {
          const std::size_t y = vertical ? p : (y0 + thick) % height;
          const std::size_t x = vertical ? (y0 + thick) % width : p;
          for (std::size_t ch = 0; ch < 3; ++ch) img[(y * width + x) * 3 + ch] = ink;
        }
      pos += len + 2 + rng.below(3);
    }
  }
  clamp01(img);
  return img;
}

Tensor translate_wrap(const Tensor& image, long dy, long dx) {
  require_frame(image, "translate_wrap");
  const std::size_t h = image.extent(0), w = image.extent(1), c = image.extent(2);
  Tensor out(image.shape());
  for (std::size_t y = 0; y < h; ++y) {
    const std::size_t sy = wrap(static_cast<long>(y) - dy, h);
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t sx = wrap(static_cast<long>(x) - dx, w);
      std::copy_n(image.raw() + (sy * w + sx) * c, c, out.raw() + (y * w + x) * c);
    }
  }
  return out;
}

VideoPair gen_video_pair(std::uint64_t base_seed, std::size_t frames, std::size_t height, std::size_t width,
                         const DegradationSpec& spec, const SequenceOptions& opts) {
  if (frames == 0) throw ShapeError("gen_video_pair: need at least one frame");
  spec.validate();
  Rng rng(Rng::mix(base_seed, 0x76696465));
  const Tensor base = procedural_base(height, width, Rng::mix(base_seed, 1));

  long vy = 0, vx = 0;
  if (!opts.zero_motion && opts.max_motion > 0) {
    const auto span = static_cast<std::uint64_t>(2 * opts.max_motion + 1);
    vy = static_cast<long>(rng.below(span)) - opts.max_motion;
    vx = static_cast<long>(rng.below(span)) - opts.max_motion;
  }
  const double turn = rng.coin() ? 1.0 : -1.0;
  const double swell = rng.coin() ? 1.0 : -1.0;

  VideoPair pair;
  std::vector<Tensor> clean, degraded;
  for (std::size_t t = 0; t < frames; ++t) {
    const auto lt = static_cast<long>(t);
    clean.push_back(translate_wrap(base, vy * lt, vx * lt));
    pair.clean.motion.push_back(t == 0 ? std::array<long, 2>{0, 0} : std::array<long, 2>{vy, vx});

    const double frac = frames > 1 ? static_cast<double>(t) / static_cast<double>(frames - 1) : 0.0;
    DegradationSpec s = spec;
    s.orientation_deg = spec.orientation_deg + turn * opts.orientation_drift_deg * frac;
    s.magnitude = spec.magnitude * (1.0 + swell * opts.magnitude_drift * std::sin(kPi * frac / 2));
    if (spec.kind == DegradationKind::Blur) s.magnitude = std::max(1.0, s.magnitude);
    s.seed = Rng::mix(spec.seed, t);
    degraded.push_back(degrade_frame(clean.back(), s));
    pair.frame_specs.push_back(s);
  }
  pair.clean.frames = stack_frames(clean);
  pair.degraded = stack_frames(degraded);
  return pair;
}

DegradationSpec task_spec(DegradationKind kind, std::uint64_t seed, std::uint64_t index, bool mixed_orientation) {
  Rng rng(Rng::mix(seed, index));
  DegradationSpec s;
  s.kind = kind;
  s.seed = rng.next();
  switch (kind) {
    case DegradationKind::Blur:
      s.magnitude = rng.uniform(5.0, 9.0);
      s.orientation_deg = mixed_orientation ? rng.uniform(0.0, 180.0) : rng.uniform(-20.0, 20.0);
      break;
    case DegradationKind::Rain:
      s.magnitude = rng.uniform(6.0, 12.0);
      s.density = rng.uniform(1.0, 3.0);
      s.orientation_deg = mixed_orientation ? rng.uniform(0.0, 180.0) : 90.0 + rng.uniform(-20.0, 20.0);
      break;
    case DegradationKind::Moire:
      s.magnitude = rng.uniform(0.15, 0.35);
      s.density = rng.uniform(0.3, 0.6);
      s.orientation_deg = mixed_orientation ? rng.uniform(0.0, 180.0) : rng.uniform(-20.0, 20.0);
      break;
  }
  return s;
}

}  // namespace vistrip::synth
