#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "vistrip/autodiff.hpp"

// Differentiable operations. Every op records its local adjoint on the tape
// of its first operand; all operands must live on that tape.
namespace vistrip::ops {

// Elementwise.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var add_scalar(Var a, double c);
Var sqrt(Var a);
Var leaky_relu(Var a, double slope);
/// Exact (erf-based) Gaussian error linear unit.
Var gelu(Var a);

/// a[..., c] + bias[c].
Var add_bias(Var a, Var bias);

// Reductions.
Var sum(Var a);
Var mean(Var a);
/// Sums everything except the leading axis: [N, ...] -> [N].
Var sum_per_leading(Var a);

// Linear algebra.
/// [m,k] x [k,n] -> [m,n].
Var matmul(Var a, Var b);
/// Applies w[k,n] to the last axis: [..., k] -> [..., n].
Var linear(Var x, Var w);
/// Batched product over the leading axis: [B,m,k] x [B,k,n] (or [B,n,k] when
/// `transpose_b`) -> [B,m,n].
Var bmm(Var a, Var b, bool transpose_b);

// Layout.
Var reshape(Var a, Shape shape);
Var permute(Var a, std::span<const std::size_t> axes);
/// Channels [begin, end) of the last axis.
Var slice_last(Var a, std::size_t begin, std::size_t end);
Var concat_last(Var a, Var b);
/// Nearest-neighbour upsampling of a [T,H,W,C] volume by an integer factor.
Var upsample_nearest(Var x, std::size_t factor);

// Normalisation and attention pieces.
Var softmax_last_axis(Var a);
/// Normalises the last (channel) axis at every location, then applies
/// gamma/beta. Throws ConfigError if eps <= 0.
Var layer_norm_channels(Var x, Var gamma, Var beta, double eps = 1e-5);

struct Conv2dOptions {
  std::size_t stride = 1;
  /// Zero padding; defaults to k/2 so outputs are ceil(H/stride) x ceil(W/stride).
  std::optional<std::size_t> pad;
};

/// Cross-correlation of x [T,H,W,Cin] (or [H,W,Cin]) with w [k,k,Cin,Cout].
/// `bias` may be an invalid Var for no bias.
Var conv2d(Var x, Var w, Var bias, Conv2dOptions opts = {});

/// Per-frame L1 norm of the unnormalised 2-D DFT of each channel of a
/// [T,H,W,C] volume, counting real and imaginary parts: returns [T].
Var spectral_l1_per_frame(Var d);

}  // namespace vistrip::ops
