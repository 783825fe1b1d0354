#include "vistrip/fft.hpp"

#include <cmath>
#include <numbers>

#include "vistrip/ops.hpp"

namespace vistrip {

namespace {

using cd = std::complex<double>;

bool is_pow2(std::size_t n) { return n && !(n & (n - 1)); }

// Twiddles w^j = exp(sign * 2 pi i j / n) for j in [0, n).
std::vector<cd> twiddles(std::size_t n, int sign) {
  std::vector<cd> w(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double a = sign * 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
    w[j] = cd(std::cos(a), std::sin(a));
  }
  return w;
}

class Dft1d {
 public:
  Dft1d(std::size_t n, int sign) : n_(n), w_(twiddles(n, sign)), scratch_(n) {}

  // Transforms n values spaced `stride` apart.
  void run(cd* data, std::size_t stride) {
    for (std::size_t i = 0; i < n_; ++i) scratch_[i] = data[i * stride];
    if (is_pow2(n_)) {
      radix2(scratch_);
    } else {
      direct(scratch_);
    }
    for (std::size_t i = 0; i < n_; ++i) data[i * stride] = scratch_[i];
  }

 private:
  void radix2(std::vector<cd>& a) const {
    const std::size_t n = n_;
    for (std::size_t i = 1, j = 0; i < n; ++i) {
      std::size_t bit = n >> 1;
      for (; j & bit; bit >>= 1) j ^= bit;
      j ^= bit;
      if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
      const std::size_t step = n / len;
      for (std::size_t i = 0; i < n; i += len) {
        for (std::size_t j = 0; j < len / 2; ++j) {
          const cd u = a[i + j];
          const cd v = a[i + j + len / 2] * w_[j * step];
          a[i + j] = u + v;
          a[i + j + len / 2] = u - v;
        }
      }
    }
  }

  void direct(std::vector<cd>& a) {
    std::vector<cd> out(n_);
    for (std::size_t k = 0; k < n_; ++k) {
      cd s = 0.0;
      for (std::size_t j = 0; j < n_; ++j) s += a[j] * w_[(k * j) % n_];
      out[k] = s;
    }
    a.swap(out);
  }

  std::size_t n_;
  std::vector<cd> w_;
  std::vector<cd> scratch_;
};

}  // namespace

void dft2_inplace(std::vector<cd>& data, std::size_t rows, std::size_t cols, int sign) {
  if (data.size() != rows * cols) throw ShapeError("dft2_inplace: buffer size mismatch");
  Dft1d row_plan(cols, sign);
  for (std::size_t r = 0; r < rows; ++r) row_plan.run(data.data() + r * cols, 1);
  Dft1d col_plan(rows, sign);
  for (std::size_t c = 0; c < cols; ++c) col_plan.run(data.data() + c, cols);
}

Spectrum rfft2(const Tensor& image) {
  if (image.rank() != 2) throw ShapeError("rfft2: expected [H,W], got " + to_string(image.shape()));
  Spectrum s;
  s.rows = image.extent(0);
  s.cols = image.extent(1);
  s.bins.resize(image.size());
  for (std::size_t i = 0; i < image.size(); ++i) s.bins[i] = cd(image[i], 0.0);
  dft2_inplace(s.bins, s.rows, s.cols, -1);
  return s;
}

namespace ops {

Var spectral_l1_per_frame(Var d) {
  const Tensor& x = d.value();
  if (x.rank() != 4) throw ShapeError("spectral_l1_per_frame: expected [T,H,W,C], got " + to_string(x.shape()));
  const std::size_t t = x.extent(0), h = x.extent(1), w = x.extent(2), c = x.extent(3);
  Tensor out({t});
  // Sign of each real/imag part, kept for the adjoint.
  std::vector<cd> signs(t * c * h * w);
  BranchHasher hasher;
  std::vector<cd> plane(h * w);
  auto sgn = [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); };
  for (std::size_t f = 0; f < t; ++f) {
    double total = 0.0;
    for (std::size_t ch = 0; ch < c; ++ch) {
      for (std::size_t p = 0; p < h * w; ++p) plane[p] = cd(x[(f * h * w + p) * c + ch], 0.0);
      dft2_inplace(plane, h, w, -1);
      cd* sg = signs.data() + (f * c + ch) * h * w;
      for (std::size_t p = 0; p < h * w; ++p) {
        total += std::abs(plane[p].real()) + std::abs(plane[p].imag());
        sg[p] = cd(sgn(plane[p].real()), sgn(plane[p].imag()));
        hasher.add(plane[p].real() > 0.0);
        hasher.add(plane[p].imag() > 0.0);
      }
    }
    out[f] = total;
  }
  d.tape()->note_branch_pattern(hasher.finish());
  return d.tape()->record(std::move(out), {d}, [t, h, w, c, signs = std::move(signs)](BackwardContext& ctx) {
    const Tensor& g = ctx.out_grad();
    Tensor* gx = ctx.parent_grad(0);
    std::vector<cd> plane(h * w);
    for (std::size_t f = 0; f < t; ++f) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        const cd* sg = signs.data() + (f * c + ch) * h * w;
        std::copy_n(sg, h * w, plane.begin());
        // d/dx sum |Re X| + |Im X| = Re(sum_k (s_re + i s_im) exp(+i theta)).
        dft2_inplace(plane, h, w, +1);
        for (std::size_t p = 0; p < h * w; ++p) (*gx)[(f * h * w + p) * c + ch] += g[f] * plane[p].real();
      }
    }
  });
}

}  // namespace ops

}  // namespace vistrip
