#include "vistrip/oracle.hpp"

#include <cmath>
#include <limits>

namespace vistrip::verify {

AttentionMask::AttentionMask(std::size_t queries, std::size_t keys, bool fill)
    : q_(queries), k_(keys), bits_(queries * keys, fill ? 1 : 0) {}

AttentionMask AttentionMask::for_mechanism(attn::Mechanism m, const std::vector<StripToken>& tokens) {
  AttentionMask mask(tokens.size(), tokens.size());
  for (std::size_t a = 0; a < tokens.size(); ++a)
    for (std::size_t b = 0; b < tokens.size(); ++b) {
      const auto& ta = tokens[a];
      const auto& tb = tokens[b];
      bool ok = ta.direction == tb.direction;
      if (m == attn::Mechanism::Intra) ok = ok && ta.frame == tb.frame;
      if (m == attn::Mechanism::Inter) ok = ok && ta.index == tb.index;
      mask.set(a, b, ok);
    }
  return mask;
}

std::vector<StripToken> all_strip_tokens(std::size_t frames, std::size_t height, std::size_t width) {
  std::vector<StripToken> out;
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t i = 0; i < height; ++i) out.push_back({t, attn::Branch::Horizontal, i});
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t j = 0; j < width; ++j) out.push_back({t, attn::Branch::Vertical, j});
  return out;
}

Tensor masked_full_attention(const Tensor& q, const Tensor& k, const Tensor& v, const AttentionMask& mask,
                             double scale) {
  if (q.rank() != 2 || k.rank() != 2 || v.rank() != 2 || q.extent(1) != k.extent(1) || k.extent(0) != v.extent(0))
    throw ShapeError("masked_full_attention: Q " + vistrip::to_string(q.shape()) + ", K " +
                     vistrip::to_string(k.shape()) + ", V " + vistrip::to_string(v.shape()));
  const std::size_t nq = q.extent(0), nk = k.extent(0), d = q.extent(1), dv = v.extent(1);
  if (mask.queries() != nq || mask.keys() != nk) throw ShapeError("masked_full_attention: mask extents differ");
  Tensor out({nq, dv});
  std::vector<double> s(nk);
  for (std::size_t a = 0; a < nq; ++a) {
    double mx = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t b = 0; b < nk; ++b) {
      if (!mask.allowed(a, b)) continue;
      double dot = 0.0;
      for (std::size_t e = 0; e < d; ++e) dot += q[a * d + e] * k[b * d + e];
      s[b] = dot * scale;
      mx = std::max(mx, s[b]);
      any = true;
    }
    if (!any) throw ConfigError("masked_full_attention: query " + std::to_string(a) + " has no allowed keys");
    double z = 0.0;
    for (std::size_t b = 0; b < nk; ++b) {
      s[b] = mask.allowed(a, b) ? std::exp(s[b] - mx) : 0.0;
      z += s[b];
    }
    for (std::size_t b = 0; b < nk; ++b) {
      if (s[b] == 0.0) continue;
      const double w = s[b] / z;
      for (std::size_t e = 0; e < dv; ++e) out[a * dv + e] += w * v[b * dv + e];
    }
  }
  return out;
}

OracleFeatures oracle_attended_features(const Tensor& x, const attn::StripAttentionParams& p, attn::Mechanism m,
                                        ScaleRule rule, double ln_eps) {
  if (x.rank() != 4) throw ShapeError("oracle: expected [T,H,W,C], got " + vistrip::to_string(x.shape()));
  const std::size_t T = x.extent(0), H = x.extent(1), W = x.extent(2), C = x.extent(3);
  attn::validate_geometry(C, p.heads);
  const std::size_t half = C / 2, M = p.heads, D = half / M;

  // Layer norm over channels.
  Tensor xn(x.shape());
  for (std::size_t r = 0; r < T * H * W; ++r) {
    double mu = 0.0, var = 0.0;
    for (std::size_t c = 0; c < C; ++c) mu += x[r * C + c];
    mu /= static_cast<double>(C);
    for (std::size_t c = 0; c < C; ++c) var += (x[r * C + c] - mu) * (x[r * C + c] - mu);
    var /= static_cast<double>(C);
    for (std::size_t c = 0; c < C; ++c)
      xn[r * C + c] = (x[r * C + c] - mu) / std::sqrt(var + ln_eps) * p.ln1_gamma[c] + p.ln1_beta[c];
  }

  // Projected features of one pixel for head m, using channel block [off, off + half).
  auto project = [&](const Tensor& P, std::size_t off, std::size_t t, std::size_t y, std::size_t xx, std::size_t head,
                     std::size_t e) {
    double acc = 0.0;
    const std::size_t base = ((t * H + y) * W + xx) * C + off;
    for (std::size_t c = 0; c < half; ++c) acc += xn[base + c] * P[c * half + head * D + e];
    return acc;
  };

  OracleFeatures out{Tensor({T, H, W, half}), Tensor({T, H, W, half})};
  const auto tokens = all_strip_tokens(T, H, W);
  const auto mask = AttentionMask::for_mechanism(m, tokens);
  const std::size_t nh = T * H;  // first nh tokens are rows

  for (int dir = 0; dir < 2; ++dir) {
    const bool horiz = dir == 0;
    const std::size_t len = horiz ? W : H;
    const std::size_t first = horiz ? 0 : nh;
    const std::size_t count = horiz ? T * H : T * W;
    const Tensor& Pq = horiz ? p.q_h : p.q_v;
    const Tensor& Pk = horiz ? p.k_h : p.k_v;
    const Tensor& Pv = horiz ? p.v_h : p.v_v;
    const std::size_t off = horiz ? 0 : half;
    Tensor& dst = horiz ? out.attended_h : out.attended_v;
    const double token_dim = static_cast<double>(len * D);
    const double scale = 1.0 / std::sqrt(rule == ScaleRule::TokenDim ? token_dim : static_cast<double>(D));

    AttentionMask sub(count, count);
    for (std::size_t a = 0; a < count; ++a)
      for (std::size_t b = 0; b < count; ++b) sub.set(a, b, mask.allowed(first + a, first + b));

    for (std::size_t head = 0; head < M; ++head) {
      Tensor Q({count, len * D}), K({count, len * D}), V({count, len * D});
      for (std::size_t n = 0; n < count; ++n) {
        const StripToken& tok = tokens[first + n];
        for (std::size_t pos = 0; pos < len; ++pos) {
          const std::size_t y = horiz ? tok.index : pos;
          const std::size_t xx = horiz ? pos : tok.index;
          for (std::size_t e = 0; e < D; ++e) {
            Q[n * len * D + pos * D + e] = project(Pq, off, tok.frame, y, xx, head, e);
            K[n * len * D + pos * D + e] = project(Pk, off, tok.frame, y, xx, head, e);
            V[n * len * D + pos * D + e] = project(Pv, off, tok.frame, y, xx, head, e);
          }
        }
      }
      const Tensor O = masked_full_attention(Q, K, V, sub, scale);
      for (std::size_t n = 0; n < count; ++n) {
        const StripToken& tok = tokens[first + n];
        for (std::size_t pos = 0; pos < len; ++pos) {
          const std::size_t y = horiz ? tok.index : pos;
          const std::size_t xx = horiz ? pos : tok.index;
          for (std::size_t e = 0; e < D; ++e)
            dst[((tok.frame * H + y) * W + xx) * half + head * D + e] = O[n * len * D + pos * D + e];
        }
      }
    }
  }
  return out;
}

}  // namespace vistrip::verify
