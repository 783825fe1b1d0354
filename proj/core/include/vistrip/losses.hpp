#pragma once

#include <vector>

#include "vistrip/autodiff.hpp"

namespace vistrip::loss {

enum class CharbonnierMode {
  /// sqrt(sum of squared differences over the frame + eps^2), averaged over frames.
  PerFrame,
  /// sqrt(d^2 + eps^2) per element, averaged over all elements.
  PerPixel,
};

struct LossConfig {
  double epsilon = 1e-3;
  double lambda = 0.01;
  CharbonnierMode mode = CharbonnierMode::PerFrame;

  void validate() const;
};

struct LossReport {
  double charbonnier = 0.0;
  double fft = 0.0;
  double total = 0.0;
  std::vector<double> per_frame_charbonnier;
  std::vector<double> per_frame_fft;
};

/// Differentiable terms of the training objective.
struct LossTerms {
  Var charbonnier;
  Var fft;
  Var total;

  LossReport report() const;
};

// Tape versions. Inputs are [T,H,W,C] volumes; frames are the averaging unit.
Var charbonnier_loss(Var restored, Var truth, double eps, CharbonnierMode mode = CharbonnierMode::PerFrame);
Var fft_loss(Var restored, Var truth);
/// total = charbonnier + lambda * fft.
LossTerms total_loss(Var restored, Var truth, const LossConfig& cfg);

// Plain-tensor versions.
double charbonnier_loss(const Tensor& restored, const Tensor& truth, double eps,
                        CharbonnierMode mode = CharbonnierMode::PerFrame);
double fft_loss(const Tensor& restored, const Tensor& truth);
LossReport total_loss(const Tensor& restored, const Tensor& truth, const LossConfig& cfg);

}  // namespace vistrip::loss
