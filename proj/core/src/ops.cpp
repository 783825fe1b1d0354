#include "vistrip/ops.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gemm.hpp"

namespace vistrip::ops {

namespace {

Tape& tape_of(Var a) {
  if (!a.valid()) throw Error("operation on an unbound Var");
  return *a.tape();
}

void check_same_tape(Var a, Var b) {
  if (a.tape() != b.tape()) throw Error("operands live on different tapes");
}

template <class F>
Tensor map_values(const Tensor& in, F f) {
  Tensor out(in.shape());
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = f(in[i]);
  return out;
}

}  // namespace

Var add(Var a, Var b) {
  check_same_tape(a, b);
  require_same_shape(a.value(), b.value(), "add");
  Tensor out = a.value();
  out.add_inplace(b.value());
  return tape_of(a).record(std::move(out), {a, b}, [](BackwardContext& ctx) {
    for (std::size_t p = 0; p < 2; ++p) {
      if (Tensor* g = ctx.parent_grad(p)) g->add_inplace(ctx.out_grad());
    }
  });
}

Var sub(Var a, Var b) {
  check_same_tape(a, b);
  require_same_shape(a.value(), b.value(), "sub");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  return tape_of(a).record(std::move(out), {a, b}, [](BackwardContext& ctx) {
    const Tensor& g = ctx.out_grad();
    if (Tensor* ga = ctx.parent_grad(0)) ga->add_inplace(g);
    if (Tensor* gb = ctx.parent_grad(1)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] -= g[i];
    }
  });
}

Var mul(Var a, Var b) {
  check_same_tape(a, b);
  require_same_shape(a.value(), b.value(), "mul");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return tape_of(a).record(std::move(out), {a, b}, [](BackwardContext& ctx) {
    const Tensor& g = ctx.out_grad();
    const Tensor& av = ctx.parent_value(0);
    const Tensor& bv = ctx.parent_value(1);
    if (Tensor* ga = ctx.parent_grad(0)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i] * bv[i];
    }
    if (Tensor* gb = ctx.parent_grad(1)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] += g[i] * av[i];
    }
  });
}

Var scale(Var a, double factor) {
  Tensor out = a.value();
  out.scale_inplace(factor);
  return tape_of(a).record(std::move(out), {a}, [factor](BackwardContext& ctx) {
    const Tensor& g = ctx.out_grad();
    Tensor* ga = ctx.parent_grad(0);
    for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += factor * g[i];
  });
}

Var add_scalar(Var a, double c) {
  Tensor out = map_values(a.value(), [c](double v) { return v + c; });
  return tape_of(a).record(std::move(out), {a}, [](BackwardContext& ctx) {
    ctx.parent_grad(0)->add_inplace(ctx.out_grad());
  });
}

Var sqrt(Var a) {
  for (double v : a.value().data()) {
    if (!(v >= 0.0)) throw NumericError("sqrt: negative or non-finite input");
  }
  Tensor out = map_values(a.value(), [](double v) { return std::sqrt(v); });
  return tape_of(a).record(std::move(out), {a}, [](BackwardContext& ctx) {
    const Tensor& g = ctx.out_grad();
    const Tensor& y = ctx.out_value();
    Tensor* ga = ctx.parent_grad(0);
    for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += 0.5 * g[i] / y[i];
  });
}

Var leaky_relu(Var a, double slope) {
  const Tensor& x = a.value();
  Tensor out(x.shape());
  BranchHasher hasher;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const bool pos = x[i] > 0.0;
    hasher.add(pos);
    out[i] = pos ? x[i] : slope * x[i];
  }
  tape_of(a).note_branch_pattern(hasher.finish());
  return tape_of(a).record(std::move(out), {a}, [slope](BackwardContext& ctx) {
    const Tensor& g = ctx.out_grad();
    const Tensor& x = ctx.parent_value(0);
    Tensor* ga = ctx.parent_grad(0);
    for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += x[i] > 0.0 ? g[i] : slope * g[i];
  });
}

Var gelu(Var a) {
  constexpr double kInvSqrt2 = 0.70710678118654752440;
  Tensor out = map_values(a.value(), [](double v) { return 0.5 * v * (1.0 + std::erf(v * kInvSqrt2)); });
  return tape_of(a).record(std::move(out), {a}, [](BackwardContext& ctx) {
    const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
    const Tensor& g = ctx.out_grad();
    const Tensor& x = ctx.parent_value(0);
    Tensor* ga = ctx.parent_grad(0);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double v = x[i];
      const double cdf = 0.5 * (1.0 + std::erf(v * kInvSqrt2));
      const double pdf = inv_sqrt_2pi * std::exp(-0.5 * v * v);
      (*ga)[i] += g[i] * (cdf + v * pdf);
    }
  });
}

Var add_bias(Var a, Var bias) {
  check_same_tape(a, bias);
  const Tensor& x = a.value();
  const Tensor& b = bias.value();
  const std::size_t c = x.shape().back();
  if (b.rank() != 1 || b.size() != c) {
    throw ShapeError("add_bias: bias " + to_string(b.shape()) + " vs input " + to_string(x.shape()));
  }
  Tensor out = x;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i % c];
  return tape_of(a).record(std::move(out), {a, bias}, [c](BackwardContext& ctx) {
    const Tensor& g = ctx.out_grad();
    if (Tensor* ga = ctx.parent_grad(0)) ga->add_inplace(g);
    if (Tensor* gb = ctx.parent_grad(1)) {
      for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i % c] += g[i];
    }
  });
}

Var sum(Var a) {
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  return tape_of(a).record(Tensor::scalar(s), {a}, [](BackwardContext& ctx) {
    const double g = ctx.out_grad()[0];
    Tensor* ga = ctx.parent_grad(0);
    for (double& v : ga->data()) v += g;
  });
}

Var mean(Var a) {
  const double n = static_cast<double>(a.value().size());
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  return tape_of(a).record(Tensor::scalar(s / n), {a}, [n](BackwardContext& ctx) {
    const double g = ctx.out_grad()[0] / n;
    Tensor* ga = ctx.parent_grad(0);
    for (double& v : ga->data()) v += g;
  });
}

Var sum_per_leading(Var a) {
  const Tensor& x = a.value();
  const std::size_t lead = x.extent(0);
  const std::size_t inner = x.size() / std::max<std::size_t>(lead, 1);
  Tensor out({lead});
  for (std::size_t t = 0; t < lead; ++t) {
    double s = 0.0;
    for (std::size_t i = 0; i < inner; ++i) s += x[t * inner + i];
    out[t] = s;
  }
  return tape_of(a).record(std::move(out), {a}, [inner](BackwardContext& ctx) {
    const Tensor& g = ctx.out_grad();
    Tensor* ga = ctx.parent_grad(0);
    for (std::size_t t = 0; t < g.size(); ++t) {
      for (std::size_t i = 0; i < inner; ++i) (*ga)[t * inner + i] += g[t];
    }
  });
}

Var matmul(Var a, Var b) {
  check_same_tape(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() != 2 || bv.rank() != 2 || av.extent(1) != bv.extent(0)) {
    throw ShapeError("matmul: incompatible shapes " + to_string(av.shape()) + " and " +
                     to_string(bv.shape()));
  }
  const std::size_t m = av.extent(0), k = av.extent(1), n = bv.extent(1);
  Tensor out({m, n});
  detail::gemm(av.raw(), false, bv.raw(), false, out.raw(), m, k, n, false);
  return tape_of(a).record(std::move(out), {a, b}, [m, k, n](BackwardContext& ctx) {
    const Tensor& g = ctx.out_grad();
    if (Tensor* ga = ctx.parent_grad(0)) {
      detail::gemm(g.raw(), false, ctx.parent_value(1).raw(), true, ga->raw(), m, n, k, true);
    }
    if (Tensor* gb = ctx.parent_grad(1)) {
      detail::gemm(ctx.parent_value(0).raw(), true, g.raw(), false, gb->raw(), k, m, n, true);
    }
  });
}

Var linear(Var x, Var w) {
  check_same_tape(x, w);
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  if (wv.rank() != 2 || xv.shape().back() != wv.extent(0)) {
    throw ShapeError("linear: input " + to_string(xv.shape()) + " vs weight " +
                     to_string(wv.shape()));
  }
  const std::size_t k = wv.extent(0), n = wv.extent(1);
  const std::size_t m = xv.size() / k;
  Shape out_shape = xv.shape();
  out_shape.back() = n;
  Tensor out(out_shape);
  detail::gemm(xv.raw(), false, wv.raw(), false, out.raw(), m, k, n, false);
  return tape_of(x).record(std::move(out), {x, w}, [m, k, n](BackwardContext& ctx) {
    const Tensor& g = ctx.out_grad();
    if (Tensor* gx = ctx.parent_grad(0)) {
      detail::gemm(g.raw(), false, ctx.parent_value(1).raw(), true, gx->raw(), m, n, k, true);
    }
    if (Tensor* gw = ctx.parent_grad(1)) {
      detail::gemm(ctx.parent_value(0).raw(), true, g.raw(), false, gw->raw(), k, m, n, true);
    }
  });
}

Var bmm(Var a, Var b, bool transpose_b) {
  check_same_tape(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() != 3 || bv.rank() != 3 || av.extent(0) != bv.extent(0)) {
    throw ShapeError("bmm: incompatible shapes " + to_string(av.shape()) + " and " +
                     to_string(bv.shape()));
  }
  const std::size_t batch = av.extent(0), m = av.extent(1), k = av.extent(2);
  const std::size_t bk = transpose_b ? bv.extent(2) : bv.extent(1);
  const std::size_t n = transpose_b ? bv.extent(1) : bv.extent(2);
  if (bk != k) {
    throw ShapeError("bmm: inner extents differ " + to_string(av.shape()) + " and " +
                     to_string(bv.shape()));
  }
  Tensor out({batch, m, n});
  for (std::size_t i = 0; i < batch; ++i) {
    detail::gemm(av.raw() + i * m * k, false, bv.raw() + i * k * n, transpose_b,
                 out.raw() + i * m * n, m, k, n, false);
  }
  return tape_of(a).record(
      std::move(out), {a, b}, [batch, m, k, n, transpose_b](BackwardContext& ctx) {
        const Tensor& g = ctx.out_grad();
        const Tensor& av = ctx.parent_value(0);
        const Tensor& bv = ctx.parent_value(1);
        Tensor* ga = ctx.parent_grad(0);
        Tensor* gb = ctx.parent_grad(1);
        for (std::size_t i = 0; i < batch; ++i) {
          const double* gi = g.raw() + i * m * n;
          if (ga) {
            // dA = dC * op(B)^T
            detail::gemm(gi, false, bv.raw() + i * k * n, !transpose_b, ga->raw() + i * m * k, m,
                         n, k, true);
          }
          if (gb) {
            if (transpose_b) {
              // B stored n x k: dB = dC^T * A
              detail::gemm(gi, true, av.raw() + i * m * k, false, gb->raw() + i * k * n, n, m, k,
                           true);
            } else {
              detail::gemm(av.raw() + i * m * k, true, gi, false, gb->raw() + i * k * n, k, m, n,
                           true);
            }
          }
        }
      });
}

Var reshape(Var a, Shape shape) {
  Tensor out = a.value().reshaped(std::move(shape));
  return tape_of(a).record(std::move(out), {a}, [](BackwardContext& ctx) {
    const Tensor& g = ctx.out_grad();
    Tensor* ga = ctx.parent_grad(0);
    for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i];
  });
}

Var permute(Var a, std::span<const std::size_t> axes) {
  Tensor out = vistrip::permute(a.value(), axes);
  std::vector<std::size_t> inv = inverse_permutation(axes);
  return tape_of(a).record(std::move(out), {a}, [inv = std::move(inv)](BackwardContext& ctx) {
    Tensor back = vistrip::permute(ctx.out_grad(), inv);
    ctx.parent_grad(0)->add_inplace(back);
  });
}

Var slice_last(Var a, std::size_t begin, std::size_t end) {
  const Tensor& x = a.value();
  const std::size_t c = x.shape().back();
  if (begin >= end || end > c) {
    throw ShapeError("slice_last: range [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") invalid for " + to_string(x.shape()));
  }
  const std::size_t w = end - begin;
  const std::size_t rows = x.size() / c;
  Shape s = x.shape();
  s.back() = w;
  Tensor out(s);
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(x.raw() + r * c + begin, w, out.raw() + r * w);
  }
  return tape_of(a).record(std::move(out), {a}, [rows, c, w, begin](BackwardContext& ctx) {
    const Tensor& g = ctx.out_grad();
    Tensor* ga = ctx.parent_grad(0);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t j = 0; j < w; ++j) (*ga)[r * c + begin + j] += g[r * w + j];
    }
  });
}

Var concat_last(Var a, Var b) {
  check_same_tape(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() != bv.rank() ||
      !std::equal(av.shape().begin(), av.shape().end() - 1, bv.shape().begin())) {
    throw ShapeError("concat_last: " + to_string(av.shape()) + " vs " + to_string(bv.shape()));
  }
  const std::size_t ca = av.shape().back(), cb = bv.shape().back(), c = ca + cb;
  const std::size_t rows = av.size() / ca;
  Shape s = av.shape();
  s.back() = c;
  Tensor out(s);
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(av.raw() + r * ca, ca, out.raw() + r * c);
    std::copy_n(bv.raw() + r * cb, cb, out.raw() + r * c + ca);
  }
  return tape_of(a).record(std::move(out), {a, b}, [rows, ca, cb, c](BackwardContext& ctx) {
    const Tensor& g = ctx.out_grad();
    if (Tensor* ga = ctx.parent_grad(0)) {
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < ca; ++j) (*ga)[r * ca + j] += g[r * c + j];
    }
    if (Tensor* gb = ctx.parent_grad(1)) {
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t j = 0; j < cb; ++j) (*gb)[r * cb + j] += g[r * c + ca + j];
    }
  });
}

Var upsample_nearest(Var x, std::size_t factor) {
  const Tensor& v = x.value();
  if (v.rank() != 4) throw ShapeError("upsample_nearest: expected [T,H,W,C], got " + to_string(v.shape()));
  if (factor == 0) throw ShapeError("upsample_nearest: factor must be positive");
  if (factor == 1) return x;
  const std::size_t t = v.extent(0), h = v.extent(1), w = v.extent(2), c = v.extent(3);
  const std::size_t oh = h * factor, ow = w * factor;
  Tensor out({t, oh, ow, c});
  for (std::size_t f = 0; f < t; ++f)
    for (std::size_t i = 0; i < oh; ++i)
      for (std::size_t j = 0; j < ow; ++j)
        std::copy_n(v.raw() + ((f * h + i / factor) * w + j / factor) * c, c,
                    out.raw() + ((f * oh + i) * ow + j) * c);
  return tape_of(x).record(std::move(out), {x}, [t, h, w, c, factor](BackwardContext& ctx) {
    const Tensor& g = ctx.out_grad();
    Tensor* gx = ctx.parent_grad(0);
    const std::size_t oh = h * factor, ow = w * factor;
    for (std::size_t f = 0; f < t; ++f)
      for (std::size_t i = 0; i < oh; ++i)
        for (std::size_t j = 0; j < ow; ++j) {
          const double* src = g.raw() + ((f * oh + i) * ow + j) * c;
          double* dst = gx->raw() + ((f * h + i / factor) * w + j / factor) * c;
          for (std::size_t k = 0; k < c; ++k) dst[k] += src[k];
        }
  });
}

Var softmax_last_axis(Var a) {
  const Tensor& x = a.value();
  if (!all_finite(x)) throw NumericError("softmax_last_axis: non-finite input");
  const std::size_t n = x.shape().back();
  if (n == 0) throw ShapeError("softmax_last_axis: empty last axis");
  const std::size_t rows = x.size() / n;
  Tensor out(x.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = x.raw() + r * n;
    double* o = out.raw() + r * n;
    const double mx = *std::max_element(in, in + n);
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      o[j] = std::exp(in[j] - mx);
      s += o[j];
    }
    const double inv = 1.0 / s;
    for (std::size_t j = 0; j < n; ++j) o[j] *= inv;
  }
  return tape_of(a).record(std::move(out), {a}, [rows, n](BackwardContext& ctx) {
    const Tensor& g = ctx.out_grad();
    const Tensor& y = ctx.out_value();
    Tensor* ga = ctx.parent_grad(0);
    for (std::size_t r = 0; r < rows; ++r) {
      const double* yr = y.raw() + r * n;
      const double* gr = g.raw() + r * n;
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += yr[j] * gr[j];
      double* out = ga->raw() + r * n;
      for (std::size_t j = 0; j < n; ++j) out[j] += yr[j] * (gr[j] - dot);
    }
  });
}

Var layer_norm_channels(Var x, Var gamma, Var beta, double eps) {
  if (!(eps > 0.0)) throw ConfigError("layer_norm_channels: eps must be positive");
  check_same_tape(x, gamma);
  check_same_tape(x, beta);
  const Tensor& xv = x.value();
  const std::size_t c = xv.shape().back();
  if (gamma.value().size() != c || beta.value().size() != c) {
    throw ShapeError("layer_norm_channels: affine params must have " + std::to_string(c) +
                     " entries");
  }
  const std::size_t rows = xv.size() / c;
  Tensor normalized(xv.shape());
  Tensor inv_std({rows});
  Tensor out(xv.shape());
  const double* g = gamma.value().raw();
  const double* b = beta.value().raw();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* in = xv.raw() + r * c;
    double mu = 0.0;
    for (std::size_t j = 0; j < c; ++j) mu += in[j];
    mu /= static_cast<double>(c);
    double var = 0.0;
    for (std::size_t j = 0; j < c; ++j) var += (in[j] - mu) * (in[j] - mu);
    var /= static_cast<double>(c);
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[r] = is;
    for (std::size_t j = 0; j < c; ++j) {
      const double nh = (in[j] - mu) * is;
      normalized[r * c + j] = nh;
      out[r * c + j] = nh * g[j] + b[j];
    }
  }
  return tape_of(x).record(
      std::move(out), {x, gamma, beta},
      [rows, c, normalized = std::move(normalized), inv_std = std::move(inv_std)](BackwardContext& ctx) {
        const Tensor& dy = ctx.out_grad();
        const double* g = ctx.parent_value(1).raw();
        Tensor* gx = ctx.parent_grad(0);
        Tensor* gg = ctx.parent_grad(1);
        Tensor* gb = ctx.parent_grad(2);
        const double inv_c = 1.0 / static_cast<double>(c);
        for (std::size_t r = 0; r < rows; ++r) {
          const double* dyr = dy.raw() + r * c;
          const double* nr = normalized.raw() + r * c;
          if (gg || gb) {
            for (std::size_t j = 0; j < c; ++j) {
              if (gg) (*gg)[j] += dyr[j] * nr[j];
              if (gb) (*gb)[j] += dyr[j];
            }
          }
          if (gx) {
            double mean_d = 0.0, mean_dn = 0.0;
            for (std::size_t j = 0; j < c; ++j) {
              const double d = dyr[j] * g[j];
              mean_d += d;
              mean_dn += d * nr[j];
            }
            mean_d *= inv_c;
            mean_dn *= inv_c;
            double* out = gx->raw() + r * c;
            for (std::size_t j = 0; j < c; ++j) {
              const double d = dyr[j] * g[j];
              out[j] += inv_std[r] * (d - mean_d - nr[j] * mean_dn);
            }
          }
        }
      });
}

}  // namespace vistrip::ops
