#pragma once

#include <cstddef>
#include <vector>

#include "vistrip/strip_attention.hpp"

namespace vistrip::verify {

/// One strip token: a row (Horizontal) or column (Vertical) of one frame.
struct StripToken {
  std::size_t frame = 0;
  attn::Branch direction = attn::Branch::Horizontal;
  std::size_t index = 0;
};

/// Boolean matrix over token pairs: allowed(q, k) says whether query q may attend to key k.
class AttentionMask {
 public:
  AttentionMask(std::size_t queries, std::size_t keys, bool fill = false);

  std::size_t queries() const { return q_; }
  std::size_t keys() const { return k_; }
  bool allowed(std::size_t q, std::size_t k) const { return bits_[q * k_ + k] != 0; }
  void set(std::size_t q, std::size_t k, bool v) { bits_[q * k_ + k] = v ? 1 : 0; }

  /// intra: same frame and direction; inter: same strip index and direction;
  /// joint: same direction.
  static AttentionMask for_mechanism(attn::Mechanism m, const std::vector<StripToken>& tokens);

 private:
  std::size_t q_, k_;
  std::vector<unsigned char> bits_;
};

/// Every row strip then every column strip of a T x H x W volume, frame-major.
std::vector<StripToken> all_strip_tokens(std::size_t frames, std::size_t height, std::size_t width);

/// Dense masked attention. Q [n,d], K [n,d], V [n,dv]; disallowed scores are
/// excluded from the softmax. Throws ConfigError when a query has no allowed key.
Tensor masked_full_attention(const Tensor& q, const Tensor& k, const Tensor& v, const AttentionMask& mask,
                             double scale);

/// What the oracle divides scores by.
enum class ScaleRule {
  TokenDim,  ///< sqrt(strip length * head width), the block's rule
  HeadDim,   ///< sqrt(head width) only; a deliberately wrong rule for negative controls
};

struct OracleFeatures {
  Tensor attended_h;  // [T,H,W,C/2]
  Tensor attended_v;  // [T,H,W,C/2]
};

/// Pre-fusion attended features of a strip-attention block, recomputed from
/// scratch with explicit loops: layer norm, per-head projections, strip
/// gathering, and masked_full_attention over all strip tokens.
OracleFeatures oracle_attended_features(const Tensor& x, const attn::StripAttentionParams& p, attn::Mechanism m,
                                        ScaleRule rule = ScaleRule::TokenDim, double ln_eps = 1e-5);

}  // namespace vistrip::verify
