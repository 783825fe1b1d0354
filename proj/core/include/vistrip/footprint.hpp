#pragma once

#include <cstddef>
#include <cstdint>

#include "vistrip/tensor.hpp"

namespace vistrip::attn {

/// Attention-matrix element counts for one head set, measured and closed-form.
struct FootprintReport {
  std::size_t frames = 0, height = 0, width = 0;

  std::uint64_t intra_entries = 0;
  std::uint64_t inter_entries = 0;
  std::uint64_t joint_entries = 0;
  std::uint64_t full_entries = 0;

  std::uint64_t intra_closed = 0;  ///< T(H^2 + W^2)
  std::uint64_t inter_closed = 0;  ///< (H + W) T^2
  std::uint64_t joint_closed = 0;  ///< T^2 (H^2 + W^2)
  std::uint64_t full_closed = 0;   ///< (HWT)^2

  bool measured = false;
  bool matches() const {
    return intra_entries == intra_closed && inter_entries == inter_closed &&
           joint_entries == joint_closed && full_entries == full_closed;
  }
};

enum class FootprintMode {
  ClosedForm,    ///< formulas only
  Instrumented,  ///< also count entries during real forward passes
};

FootprintReport attention_footprint(std::size_t frames, std::size_t height, std::size_t width,
                                    FootprintMode mode = FootprintMode::Instrumented);

/// Vanilla spatio-temporal self-attention over pixel tokens (one token per
/// (t, y, x)), the baseline the strip mechanisms are compared against.
///
/// Uses identity projections on the layer-normalised input and builds the
/// attention matrix one query row at a time; `entries_per_head_set` receives
/// (HWT)^2. Not differentiable.
Tensor full_attention_forward(const Tensor& x, std::size_t heads, std::uint64_t* entries_per_head_set);

}  // namespace vistrip::attn
