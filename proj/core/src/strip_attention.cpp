#include "vistrip/strip_attention.hpp"

#include <array>
#include <cmath>

#include "vistrip/ops.hpp"

namespace vistrip::attn {

const char* to_string(Mechanism m) {
  switch (m) {
    case Mechanism::Intra: return "intra";
    case Mechanism::Inter: return "inter";
    case Mechanism::Joint: return "joint";
  }
  return "?";
}

const char* to_string(Directions d) {
  switch (d) {
    case Directions::Horizontal: return "h";
    case Directions::Vertical: return "v";
    case Directions::Both: return "both";
  }
  return "?";
}

Mechanism parse_mechanism(const std::string& s) {
  if (s == "intra") return Mechanism::Intra;
  if (s == "inter") return Mechanism::Inter;
  if (s == "joint") return Mechanism::Joint;
  throw ConfigError("unknown attention mechanism '" + s + "'");
}

Directions parse_directions(const std::string& s) {
  if (s == "h") return Directions::Horizontal;
  if (s == "v") return Directions::Vertical;
  if (s == "both") return Directions::Both;
  throw ConfigError("unknown direction '" + s + "' (expected h, v or both)");
}

void validate_geometry(std::size_t channels, std::size_t heads) {
  if (heads == 0) throw ConfigError("heads must be >= 1");
  if (channels == 0 || channels % 2 != 0) {
    throw ConfigError("strip attention needs an even channel count, got " + std::to_string(channels));
  }
  if ((channels / 2) % heads != 0) {
    throw ConfigError("half channel count " + std::to_string(channels / 2) +
                      " is not divisible by heads=" + std::to_string(heads));
  }
}

StripAttentionParams init_strip_params(std::size_t channels, std::size_t heads, Rng& rng) {
  validate_geometry(channels, heads);
  const std::size_t c = channels, half = channels / 2;
  const double proj_std = 1.0 / std::sqrt(static_cast<double>(half));
  StripAttentionParams p;
  p.heads = heads;
  p.ln1_gamma = Tensor({c}, 1.0);
  p.ln1_beta = Tensor({c});
  p.q_h = random_normal({half, half}, rng, proj_std);
  p.k_h = random_normal({half, half}, rng, proj_std);
  p.v_h = random_normal({half, half}, rng, proj_std);
  p.q_v = random_normal({half, half}, rng, proj_std);
  p.k_v = random_normal({half, half}, rng, proj_std);
  p.v_v = random_normal({half, half}, rng, proj_std);
  p.fuse_w = random_normal({c, c}, rng, 1.0 / std::sqrt(static_cast<double>(c)));
  p.fuse_b = Tensor({c});
  p.ln2_gamma = Tensor({c}, 1.0);
  p.ln2_beta = Tensor({c});
  p.mlp1_w = random_normal({c, 2 * c}, rng, 1.0 / std::sqrt(static_cast<double>(c)));
  p.mlp1_b = Tensor({2 * c});
  p.mlp2_w = random_normal({2 * c, c}, rng, 1.0 / std::sqrt(static_cast<double>(2 * c)));
  p.mlp2_b = Tensor({c});
  return p;
}

std::size_t strip_param_count(std::size_t channels) {
  const std::size_t c = channels, half = c / 2;
  return 2 * c                // ln1
         + 6 * half * half    // q,k,v per branch
         + c * c + c          // fuse
         + 2 * c              // ln2
         + c * 2 * c + 2 * c  // mlp1
         + 2 * c * c + c;     // mlp2
}

namespace {

// Axis order of a projected volume reshaped to [T,H,W,M,D].
constexpr std::size_t kT = 0, kH = 1, kW = 2, kM = 3, kD = 4;

// Permutation grouping each attention problem's tokens contiguously,
// leaving [batch..., token..., feature...].
std::array<std::size_t, 5> token_permutation(Mechanism m, Branch b) {
  const bool h = b == Branch::Horizontal;
  switch (m) {
    case Mechanism::Intra:
      return h ? std::array<std::size_t, 5>{kT, kM, kH, kW, kD}
               : std::array<std::size_t, 5>{kT, kM, kW, kH, kD};
    case Mechanism::Inter:
      return h ? std::array<std::size_t, 5>{kH, kM, kT, kW, kD}
               : std::array<std::size_t, 5>{kW, kM, kT, kH, kD};
    case Mechanism::Joint:
      return h ? std::array<std::size_t, 5>{kM, kT, kH, kW, kD}
               : std::array<std::size_t, 5>{kM, kT, kW, kH, kD};
  }
  return {};
}

Var branch_attention(Var x_half, Var wq, Var wk, Var wv, Mechanism mech, Branch branch,
                     std::size_t heads, StripTrace* trace) {
  const Shape& s = x_half.shape();
  const std::size_t t = s[0], h = s[1], w = s[2], half = s[3];
  const std::size_t d = half / heads;
  const StripTokens tok = strip_tokens(mech, branch, t, h, w, half, heads);

  const auto perm = token_permutation(mech, branch);
  const Shape five{t, h, w, heads, d};
  Shape permuted(5);
  for (std::size_t i = 0; i < 5; ++i) permuted[i] = five[perm[i]];
  const Shape tokens{tok.batch, tok.tokens, tok.token_dim};

  auto to_tokens = [&](Var proj) {
    return ops::reshape(ops::permute(ops::reshape(proj, five), perm), tokens);
  };
  Var q = to_tokens(ops::linear(x_half, wq));
  Var k = to_tokens(ops::linear(x_half, wk));
  Var v = to_tokens(ops::linear(x_half, wv));

  Var scores = ops::scale(ops::bmm(q, k, true), 1.0 / std::sqrt(static_cast<double>(tok.token_dim)));
  Var attn = ops::softmax_last_axis(scores);
  Var out = ops::bmm(attn, v, false);

  if (trace) {
    trace->attention_entries += tok.batch * tok.tokens * tok.tokens;
    trace->entries_per_head_set += tok.batch / heads * tok.tokens * tok.tokens;
    if (trace->keep_maps) trace->maps.push_back(attn.value());
  }

  const auto inv = inverse_permutation(perm);
  return ops::reshape(ops::permute(ops::reshape(out, permuted), inv), {t, h, w, half});
}

}  // namespace

StripTokens strip_tokens(Mechanism m, Branch b, std::size_t frames, std::size_t height,
                         std::size_t width, std::size_t half_channels, std::size_t heads) {
  const std::size_t d = half_channels / heads;
  const bool h = b == Branch::Horizontal;
  // A horizontal strip is one row (W pixels); a vertical strip one column (H pixels).
  const std::size_t strips = h ? height : width;
  const std::size_t dim = (h ? width : height) * d;
  switch (m) {
    case Mechanism::Intra: return {frames * heads, strips, dim};
    case Mechanism::Inter: return {strips * heads, frames, dim};
    case Mechanism::Joint: return {heads, frames * strips, dim};
  }
  return {};
}

Var strip_attention_block(Var x, const StripAttentionVars& p, AttentionVariant variant,
                          StripTrace* trace, double ln_eps) {
  const Shape& s = x.shape();
  if (s.size() != 4) throw ShapeError("strip attention expects [T,H,W,C], got " + vistrip::to_string(s));
  const std::size_t c = s[3];
  validate_geometry(c, p.heads);
  const std::size_t half = c / 2;
  Tape& tape = *x.tape();

  Var normed = ops::layer_norm_channels(x, p.ln1_gamma, p.ln1_beta, ln_eps);
  const bool use_h = variant.directions != Directions::Vertical;
  const bool use_v = variant.directions != Directions::Horizontal;

  const Shape half_shape{s[0], s[1], s[2], half};
  Var oh = use_h ? branch_attention(ops::slice_last(normed, 0, half), p.q_h, p.k_h, p.v_h,
                                    variant.mechanism, Branch::Horizontal, p.heads, trace)
                 : tape.constant(Tensor(half_shape));
  Var ov = use_v ? branch_attention(ops::slice_last(normed, half, c), p.q_v, p.k_v, p.v_v,
                                    variant.mechanism, Branch::Vertical, p.heads, trace)
                 : tape.constant(Tensor(half_shape));
  if (trace) {
    trace->attended_h = oh.value();
    trace->attended_v = ov.value();
  }

  Var fused = ops::add_bias(ops::linear(ops::concat_last(oh, ov), p.fuse_w), p.fuse_b);
  Var mid = ops::add(fused, x);

  Var n2 = ops::layer_norm_channels(mid, p.ln2_gamma, p.ln2_beta, ln_eps);
  Var hidden = ops::gelu(ops::add_bias(ops::linear(n2, p.mlp1_w), p.mlp1_b));
  Var mlp = ops::add_bias(ops::linear(hidden, p.mlp2_w), p.mlp2_b);
  return ops::add(mlp, mid);
}

Var intra_sa_block(Var x, const StripAttentionVars& p, Directions dirs, StripTrace* trace) {
  return strip_attention_block(x, p, {Mechanism::Intra, dirs}, trace);
}

Var inter_sa_block(Var x, const StripAttentionVars& p, Directions dirs, StripTrace* trace) {
  return strip_attention_block(x, p, {Mechanism::Inter, dirs}, trace);
}

Var joint_strip_attention(Var x, const StripAttentionVars& p, Directions dirs, StripTrace* trace) {
  return strip_attention_block(x, p, {Mechanism::Joint, dirs}, trace);
}

Tensor apply_block(const Tensor& x, const StripAttentionParams& p, AttentionVariant variant,
                   StripTrace* trace) {
  Tape tape;
  Var xv = tape.constant(x);
  StripAttentionVars pv = bind_constant(tape, p);
  return strip_attention_block(xv, pv, variant, trace).value();
}

}  // namespace vistrip::attn
