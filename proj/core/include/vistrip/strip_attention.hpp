#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "vistrip/autodiff.hpp"
#include "vistrip/params.hpp"
#include "vistrip/random.hpp"

namespace vistrip::attn {

/// Which strips attend to each other.
enum class Mechanism {
  Intra,  ///< rows (columns) within one frame
  Inter,  ///< co-located rows (columns) across the frame window
  Joint,  ///< all rows (columns) of all frames together
};

/// Which strip branches contribute; a disabled branch feeds zeros to the fusion conv.
enum class Directions { Horizontal, Vertical, Both };

enum class Branch { Horizontal, Vertical };

struct AttentionVariant {
  Mechanism mechanism = Mechanism::Intra;
  Directions directions = Directions::Both;
};

const char* to_string(Mechanism m);
const char* to_string(Directions d);
Mechanism parse_mechanism(const std::string& s);
Directions parse_directions(const std::string& s);

/// Weights of one strip-attention block operating on C channels.
///
/// The horizontal branch sees channels [0, C/2) of the normalised input and
/// the vertical branch channels [C/2, C). Each projection is C/2 x C/2 and
/// holds the M per-head matrices (C/2 x C/(2M)) as consecutive column blocks.
/// The output stage is a 1x1 fusion conv with residual, then LN and a
/// C -> 2C -> C GELU MLP with a second residual.
template <class T>
struct StripAttentionParamsT {
  std::size_t heads = 8;
  T ln1_gamma, ln1_beta;
  T q_h, k_h, v_h;
  T q_v, k_v, v_v;
  T fuse_w, fuse_b;
  T ln2_gamma, ln2_beta;
  T mlp1_w, mlp1_b;
  T mlp2_w, mlp2_b;

  template <class Self, class F>
  static void visit(Self& s, const std::string& prefix, F&& f) {
    f(prefix + "ln1.gamma", s.ln1_gamma);
    f(prefix + "ln1.beta", s.ln1_beta);
    f(prefix + "h.q", s.q_h);
    f(prefix + "h.k", s.k_h);
    f(prefix + "h.v", s.v_h);
    f(prefix + "v.q", s.q_v);
    f(prefix + "v.k", s.k_v);
    f(prefix + "v.v", s.v_v);
    f(prefix + "fuse.weight", s.fuse_w);
    f(prefix + "fuse.bias", s.fuse_b);
    f(prefix + "ln2.gamma", s.ln2_gamma);
    f(prefix + "ln2.beta", s.ln2_beta);
    f(prefix + "mlp1.weight", s.mlp1_w);
    f(prefix + "mlp1.bias", s.mlp1_b);
    f(prefix + "mlp2.weight", s.mlp2_w);
    f(prefix + "mlp2.bias", s.mlp2_b);
  }

  template <class U, class F>
  StripAttentionParamsT<U> map(F&& f) const {
    return {heads,     f(ln1_gamma), f(ln1_beta), f(q_h),       f(k_h),       f(v_h),
            f(q_v),    f(k_v),       f(v_v),      f(fuse_w),    f(fuse_b),    f(ln2_gamma),
            f(ln2_beta), f(mlp1_w),  f(mlp1_b),   f(mlp2_w),    f(mlp2_b)};
  }
};

using StripAttentionParams = StripAttentionParamsT<Tensor>;
using StripAttentionVars = StripAttentionParamsT<Var>;

/// Throws ConfigError unless C is even and C/2 is divisible by `heads`.
void validate_geometry(std::size_t channels, std::size_t heads);

StripAttentionParams init_strip_params(std::size_t channels, std::size_t heads, Rng& rng);
/// Learnable scalars in one block: 6.5 C^2 + 8 C.
std::size_t strip_param_count(std::size_t channels);

/// Probe data filled in by a forward pass.
struct StripTrace {
  /// Attended features before fusion, [T,H,W,C/2] each; zeros for a disabled branch.
  Tensor attended_h;
  Tensor attended_v;
  /// Attention-matrix entries over all heads, and per head set (divided by M).
  std::size_t attention_entries = 0;
  std::size_t entries_per_head_set = 0;
  /// When set, every [B,n,n] attention matrix is copied into `maps`.
  bool keep_maps = false;
  std::vector<Tensor> maps;
};

/// Full block: LN, channel split, strip attention per branch, fusion and MLP.
Var strip_attention_block(Var x, const StripAttentionVars& p, AttentionVariant variant,
                          StripTrace* trace = nullptr, double ln_eps = 1e-5);

Var intra_sa_block(Var x, const StripAttentionVars& p, Directions dirs = Directions::Both,
                   StripTrace* trace = nullptr);
Var inter_sa_block(Var x, const StripAttentionVars& p, Directions dirs = Directions::Both,
                   StripTrace* trace = nullptr);
Var joint_strip_attention(Var x, const StripAttentionVars& p, Directions dirs = Directions::Both,
                          StripTrace* trace = nullptr);

/// Inference helper: runs the block on a scratch tape with constant weights.
Tensor apply_block(const Tensor& x, const StripAttentionParams& p, AttentionVariant variant,
                   StripTrace* trace = nullptr);

/// Token count, token dimension and batch of one branch's attention.
struct StripTokens {
  std::size_t batch;      ///< independent attention problems (includes heads)
  std::size_t tokens;     ///< n: matrix is n x n
  std::size_t token_dim;  ///< feature length of one strip token
};
StripTokens strip_tokens(Mechanism m, Branch b, std::size_t frames, std::size_t height,
                         std::size_t width, std::size_t half_channels, std::size_t heads);

}  // namespace vistrip::attn
