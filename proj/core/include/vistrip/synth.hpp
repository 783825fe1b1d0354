#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "vistrip/tensor.hpp"

namespace vistrip::synth {

enum class DegradationKind { Blur, Rain, Moire };

const char* to_string(DegradationKind k);
/// Accepts "blur", "rain", "moire". Throws ConfigError otherwise.
DegradationKind parse_degradation(const std::string& s);

struct DegradationSpec {
  DegradationKind kind = DegradationKind::Blur;
  double orientation_deg = 0.0;
  /// blur: kernel length in pixels (>= 1); rain: streak length in pixels;
  /// moire: fringe frequency in cycles per pixel.
  double magnitude = 7.0;
  /// rain: streaks per 100 pixels; moire: modulation depth in [0, 1].
  double density = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Normalised line kernel of the given length and orientation, [k,k] with k odd.
/// Length 1 (or less) is the 1x1 identity. At 0 and 180 degrees the support is
/// a single row, at 90 degrees a single column.
Tensor blur_kernel(double length, double orientation_deg);

/// Applies one degradation to an [H,W,3] frame in [0,1]; output clamped to [0,1].
Tensor degrade_frame(const Tensor& clean, const DegradationSpec& spec);

/// Textured [H,W,3] image in [0,1]: smoothed multi-octave noise, shapes and bars.
Tensor procedural_base(std::size_t height, std::size_t width, std::uint64_t seed);

/// Shifts an [H,W,C] image by integer (dy, dx) with wrap-around.
Tensor translate_wrap(const Tensor& image, long dy, long dx);

struct CleanVideo {
  Tensor frames;  // [T,H,W,3]
  /// Per-frame global translation (dy, dx) in pixels relative to the previous frame.
  std::vector<std::array<long, 2>> motion;
};

struct VideoPair {
  CleanVideo clean;
  Tensor degraded;  // [T,H,W,3]
  std::vector<DegradationSpec> frame_specs;
};

struct SequenceOptions {
  bool zero_motion = false;
  /// Largest per-frame translation component in pixels.
  long max_motion = 2;
  /// Orientation change across the clip, degrees; magnitude drifts by up to this fraction.
  double orientation_drift_deg = 6.0;
  double magnitude_drift = 0.1;
};

/// Deterministic clean/degraded clip. The spec's orientation and magnitude
/// are the values at frame 0 and drift smoothly across frames.
VideoPair gen_video_pair(std::uint64_t base_seed, std::size_t frames, std::size_t height, std::size_t width,
                         const DegradationSpec& spec, const SequenceOptions& opts = {});

/// Spec for training/evaluation sequence `index` of a task. With
/// `mixed_orientation` the orientation is drawn uniformly from [0, 180).
DegradationSpec task_spec(DegradationKind kind, std::uint64_t seed, std::uint64_t index, bool mixed_orientation);

}  // namespace vistrip::synth
