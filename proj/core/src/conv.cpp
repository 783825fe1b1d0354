#include <algorithm>
#include <vector>

#include "gemm.hpp"
#include "vistrip/ops.hpp"

namespace vistrip::ops {

namespace {

struct ConvGeometry {
  std::size_t frames, h, w, cin, k, cout, stride, pad, oh, ow;

  std::size_t patch() const { return k * k * cin; }
  std::size_t positions() const { return oh * ow; }
};

// Unrolls one frame [h,w,cin] into rows of k*k*cin taps per output position.
void im2col(const double* x, const ConvGeometry& g, double* col) {
  const std::size_t patch = g.patch();
  for (std::size_t oy = 0; oy < g.oh; ++oy) {
    for (std::size_t ox = 0; ox < g.ow; ++ox) {
      double* row = col + (oy * g.ow + ox) * patch;
      for (std::size_t ky = 0; ky < g.k; ++ky) {
        const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
                                  static_cast<std::ptrdiff_t>(g.pad);
        for (std::size_t kx = 0; kx < g.k; ++kx) {
          const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) -
                                    static_cast<std::ptrdiff_t>(g.pad);
          double* dst = row + (ky * g.k + kx) * g.cin;
          if (iy < 0 || ix < 0 || iy >= static_cast<std::ptrdiff_t>(g.h) ||
              ix >= static_cast<std::ptrdiff_t>(g.w)) {
            std::fill_n(dst, g.cin, 0.0);
          } else {
            std::copy_n(x + (static_cast<std::size_t>(iy) * g.w + static_cast<std::size_t>(ix)) * g.cin,
                        g.cin, dst);
          }
        }
      }
    }
  }
}

void col2im_add(const double* col, const ConvGeometry& g, double* dx) {
  const std::size_t patch = g.patch();
  for (std::size_t oy = 0; oy < g.oh; ++oy) {
    for (std::size_t ox = 0; ox < g.ow; ++ox) {
      const double* row = col + (oy * g.ow + ox) * patch;
      for (std::size_t ky = 0; ky < g.k; ++ky) {
        const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
                                  static_cast<std::ptrdiff_t>(g.pad);
        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) continue;
        for (std::size_t kx = 0; kx < g.k; ++kx) {
          const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) -
                                    static_cast<std::ptrdiff_t>(g.pad);
          if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.w)) continue;
          const double* src = row + (ky * g.k + kx) * g.cin;
          double* dst = dx + (static_cast<std::size_t>(iy) * g.w + static_cast<std::size_t>(ix)) * g.cin;
          for (std::size_t c = 0; c < g.cin; ++c) dst[c] += src[c];
        }
      }
    }
  }
}

}  // namespace

Var conv2d(Var x, Var w, Var bias, Conv2dOptions opts) {
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  if (xv.rank() != 3 && xv.rank() != 4) {
    throw ShapeError("conv2d: input must be [H,W,C] or [T,H,W,C], got " + to_string(xv.shape()));
  }
  if (wv.rank() != 4 || wv.extent(0) != wv.extent(1) || wv.extent(0) % 2 == 0) {
    throw ShapeError("conv2d: kernel must be [k,k,Cin,Cout] with odd k, got " + to_string(wv.shape()));
  }
  const bool batched = xv.rank() == 4;
  ConvGeometry g{};
  g.frames = batched ? xv.extent(0) : 1;
  g.h = xv.extent(batched ? 1 : 0);
  g.w = xv.extent(batched ? 2 : 1);
  g.cin = xv.extent(batched ? 3 : 2);
  g.k = wv.extent(0);
  g.cout = wv.extent(3);
  if (wv.extent(2) != g.cin) {
    throw ShapeError("conv2d: kernel expects " + std::to_string(wv.extent(2)) +
                     " input channels, input has " + std::to_string(g.cin));
  }
  if (opts.stride == 0) throw ShapeError("conv2d: stride must be positive");
  g.stride = opts.stride;
  g.pad = opts.pad.value_or(g.k / 2);
  if (g.h + 2 * g.pad < g.k || g.w + 2 * g.pad < g.k) throw ShapeError("conv2d: input smaller than kernel");
  g.oh = (g.h + 2 * g.pad - g.k) / g.stride + 1;
  g.ow = (g.w + 2 * g.pad - g.k) / g.stride + 1;

  const bool has_bias = bias.valid();
  if (has_bias && (bias.value().rank() != 1 || bias.value().size() != g.cout)) {
    throw ShapeError("conv2d: bias must have " + std::to_string(g.cout) + " entries");
  }

  Shape out_shape = batched ? Shape{g.frames, g.oh, g.ow, g.cout} : Shape{g.oh, g.ow, g.cout};
  Tensor out(out_shape);
  AlignedBuffer col(g.positions() * g.patch());
  const std::size_t in_frame = g.h * g.w * g.cin;
  const std::size_t out_frame = g.positions() * g.cout;
  for (std::size_t f = 0; f < g.frames; ++f) {
    im2col(xv.raw() + f * in_frame, g, col.data());
    double* o = out.raw() + f * out_frame;
    detail::gemm(col.data(), false, wv.raw(), false, o, g.positions(), g.patch(), g.cout, false);
    if (has_bias) {
      const double* b = bias.value().raw();
      for (std::size_t p = 0; p < g.positions(); ++p)
        for (std::size_t c = 0; c < g.cout; ++c) o[p * g.cout + c] += b[c];
    }
  }

  std::vector<Var> parents{x, w};
  if (has_bias) parents.push_back(bias);
  return x.tape()->record(std::move(out), std::move(parents), [g, has_bias](BackwardContext& ctx) {
    const Tensor& dy = ctx.out_grad();
    const Tensor& xv = ctx.parent_value(0);
    const Tensor& wv = ctx.parent_value(1);
    Tensor* gx = ctx.parent_grad(0);
    Tensor* gw = ctx.parent_grad(1);
    Tensor* gb = has_bias ? ctx.parent_grad(2) : nullptr;
    const std::size_t in_frame = g.h * g.w * g.cin;
    const std::size_t out_frame = g.positions() * g.cout;
    AlignedBuffer col(g.positions() * g.patch());
    for (std::size_t f = 0; f < g.frames; ++f) {
      const double* dyf = dy.raw() + f * out_frame;
      if (gw) {
        im2col(xv.raw() + f * in_frame, g, col.data());
        detail::gemm(col.data(), true, dyf, false, gw->raw(), g.patch(), g.positions(), g.cout, true);
      }
      if (gb) {
        for (std::size_t p = 0; p < g.positions(); ++p)
          for (std::size_t c = 0; c < g.cout; ++c) (*gb)[c] += dyf[p * g.cout + c];
      }
      if (gx) {
        detail::gemm(dyf, false, wv.raw(), true, col.data(), g.positions(), g.cout, g.patch(), false);
        col2im_add(col.data(), g, gx->raw() + f * in_frame);
      }
    }
  });
}

}  // namespace vistrip::ops
