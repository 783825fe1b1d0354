#pragma once

#include <limits>

#include "vistrip/tensor.hpp"

namespace vistrip::metrics {

struct QualityMetrics {
  /// +infinity when restored == truth.
  double psnr_db = 0.0;
  double ssim = 0.0;
};

/// PSNR value written to CSV files in place of +infinity.
inline constexpr double kPsnrCsvCap = 99.0;
inline double psnr_for_csv(double psnr) { return psnr > kPsnrCsvCap ? kPsnrCsvCap : psnr; }

/// 10 log10(peak^2 / MSE) of one [H,W,C] frame.
double psnr(const Tensor& restored, const Tensor& truth, double peak = 1.0);

/// Mean SSIM of one [H,W,C] frame: 11x11 Gaussian window (sigma 1.5),
/// K1 = 0.01, K2 = 0.03, valid-region averaging, channel mean.
/// Frames smaller than the window use the largest odd window that fits.
double ssim(const Tensor& restored, const Tensor& truth, double peak = 1.0);

/// Per-frame PSNR and SSIM of [T,H,W,C] clips, averaged over frames.
QualityMetrics quality_metrics(const Tensor& restored, const Tensor& truth, double peak = 1.0);

}  // namespace vistrip::metrics
