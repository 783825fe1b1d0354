#include "vistrip/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace vistrip::metrics {

namespace {

void check_frames(const Tensor& a, const Tensor& b, std::size_t rank, const char* what) {
  if (a.shape() != b.shape() || a.rank() != rank)
    throw ShapeError(std::string(what) + ": shapes " + vistrip::to_string(a.shape()) + " and " +
                     vistrip::to_string(b.shape()));
  if (!(a.size() > 0)) throw ShapeError(std::string(what) + ": empty input");
}

std::vector<double> gaussian_window(std::size_t size, double sigma) {
  std::vector<double> g(size);
  const double c = (static_cast<double>(size) - 1.0) / 2.0;
  double total = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    const double d = static_cast<double>(i) - c;
    g[i] = std::exp(-d * d / (2.0 * sigma * sigma));
    total += g[i];
  }
  for (double& v : g) v /= total;
  return g;
}

// Separable valid-region filter of a single-channel [H,W] plane.
std::vector<double> filter_valid(const std::vector<double>& img, std::size_t h, std::size_t w,
                                 const std::vector<double>& g) {
  const std::size_t k = g.size();
  const std::size_t oh = h - k + 1, ow = w - k + 1;
  std::vector<double> tmp(h * ow, 0.0);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < ow; ++x) {
      double s = 0.0;
      for (std::size_t i = 0; i < k; ++i) s += g[i] * img[y * w + x + i];
      tmp[y * ow + x] = s;
    }
  std::vector<double> out(oh * ow, 0.0);
  for (std::size_t y = 0; y < oh; ++y)
    for (std::size_t x = 0; x < ow; ++x) {
      double s = 0.0;
      for (std::size_t i = 0; i < k; ++i) s += g[i] * tmp[(y + i) * ow + x];
      out[y * ow + x] = s;
    }
  return out;
}

}  // namespace

double psnr(const Tensor& restored, const Tensor& truth, double peak) {
  if (!(peak > 0.0)) throw ConfigError("psnr: peak must be positive");
  if (restored.shape() != truth.shape())
    throw ShapeError("psnr: shapes " + vistrip::to_string(restored.shape()) + " and " +
                     vistrip::to_string(truth.shape()));
  double se = 0.0;
  for (std::size_t i = 0; i < restored.size(); ++i) {
    const double d = restored[i] - truth[i];
    se += d * d;
  }
  if (se == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = se / static_cast<double>(restored.size());
  return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const Tensor& restored, const Tensor& truth, double peak) {
  check_frames(restored, truth, 3, "ssim");
  if (!(peak > 0.0)) throw ConfigError("ssim: peak must be positive");
  const std::size_t h = restored.extent(0), w = restored.extent(1), c = restored.extent(2);
  std::size_t win = std::min<std::size_t>({11, h, w});
  if (win % 2 == 0) --win;
  const auto g = gaussian_window(win, 1.5);
  const double c1 = (0.01 * peak) * (0.01 * peak);
  const double c2 = (0.03 * peak) * (0.03 * peak);

  double acc = 0.0;
  std::vector<double> a(h * w), b(h * w), aa(h * w), bb(h * w), ab(h * w);
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t i = 0; i < h * w; ++i) {
      a[i] = restored[i * c + ch];
      b[i] = truth[i * c + ch];
      aa[i] = a[i] * a[i];
      bb[i] = b[i] * b[i];
      ab[i] = a[i] * b[i];
    }
    const auto mu_a = filter_valid(a, h, w, g);
    const auto mu_b = filter_valid(b, h, w, g);
    const auto s_aa = filter_valid(aa, h, w, g);
    const auto s_bb = filter_valid(bb, h, w, g);
    const auto s_ab = filter_valid(ab, h, w, g);
    double sum = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
      const double va = s_aa[i] - mu_a[i] * mu_a[i];
      const double vb = s_bb[i] - mu_b[i] * mu_b[i];
      const double cov = s_ab[i] - mu_a[i] * mu_b[i];
      sum += ((2 * mu_a[i] * mu_b[i] + c1) * (2 * cov + c2)) /
             ((mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (va + vb + c2));
    }
    acc += sum / static_cast<double>(mu_a.size());
  }
  return acc / static_cast<double>(c);
}

QualityMetrics quality_metrics(const Tensor& restored, const Tensor& truth, double peak) {
  check_frames(restored, truth, 4, "quality_metrics");
  const std::size_t t = restored.extent(0);
  QualityMetrics m;
  for (std::size_t i = 0; i < t; ++i) {
    const Tensor r = frame(restored, i), g = frame(truth, i);
    m.psnr_db += psnr(r, g, peak);
    m.ssim += ssim(r, g, peak);
  }
  m.psnr_db /= static_cast<double>(t);
  m.ssim /= static_cast<double>(t);
  return m;
}

}  // namespace vistrip::metrics
