#include "vistrip/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <numeric>
#include <sstream>

namespace vistrip {

std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {

void check_rank(const Shape& shape) {
  if (shape.empty() || shape.size() > Tensor::kMaxRank) {
    throw ShapeError("tensor rank must be 1.." + std::to_string(Tensor::kMaxRank) + ", got " +
                     std::to_string(shape.size()));
  }
}

}  // namespace

Tensor::Tensor() : shape_{0} {}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  check_rank(shape_);
  data_.assign(numel(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(data.begin(), data.end()) {
  check_rank(shape_);
  if (numel(shape_) != data_.size()) {
    throw ShapeError("shape " + to_string(shape_) + " needs " + std::to_string(numel(shape_)) +
                     " elements, got " + std::to_string(data_.size()));
  }
}

Tensor Tensor::scalar(double value) { return Tensor({1}, std::vector<double>{value}); }

std::size_t Tensor::extent(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for shape " +
                     to_string(shape_));
  }
  return shape_[axis];
}

std::size_t Tensor::offset(std::initializer_list<std::size_t> index) const {
  if (index.size() != shape_.size()) {
    throw ShapeError("index rank " + std::to_string(index.size()) + " vs tensor rank " +
                     std::to_string(shape_.size()));
  }
  std::size_t off = 0;
  std::size_t axis = 0;
  for (std::size_t i : index) {
    if (i >= shape_[axis]) {
      throw ShapeError("index out of range on axis " + std::to_string(axis) + " of " +
                       to_string(shape_));
    }
    off = off * shape_[axis] + i;
    ++axis;
  }
  return off;
}

double& Tensor::at(std::initializer_list<std::size_t> index) { return data_[offset(index)]; }
double Tensor::at(std::initializer_list<std::size_t> index) const { return data_[offset(index)]; }

Tensor Tensor::reshaped(Shape shape) const& {
  Tensor copy = *this;
  return std::move(copy).reshaped(std::move(shape));
}

Tensor Tensor::reshaped(Shape shape) && {
  check_rank(shape);
  if (numel(shape) != data_.size()) {
    throw ShapeError("cannot reshape " + to_string(shape_) + " to " + to_string(shape));
  }
  shape_ = std::move(shape);
  return std::move(*this);
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

void Tensor::add_inplace(const Tensor& other) {
  require_same_shape(*this, other, "add_inplace");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
}

void Tensor::scale_inplace(double factor) {
  for (double& v : data_) v *= factor;
}

double Tensor::item() const {
  if (data_.size() != 1) {
    throw ShapeError("item() on tensor of shape " + to_string(shape_));
  }
  return data_[0];
}

bool same_shape(const Tensor& a, const Tensor& b) { return a.shape() == b.shape(); }

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (!same_shape(a, b)) {
    throw ShapeError(std::string(what) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                     to_string(b.shape()));
  }
}

bool bit_equal(const Tensor& a, const Tensor& b) {
  if (!same_shape(a, b)) return false;
  return std::memcmp(a.raw(), b.raw(), a.size() * sizeof(double)) == 0;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

bool all_finite(const Tensor& t) {
  return std::all_of(t.data().begin(), t.data().end(), [](double v) { return std::isfinite(v); });
}

std::vector<std::size_t> inverse_permutation(std::span<const std::size_t> axes) {
  std::vector<std::size_t> inv(axes.size());
  for (std::size_t i = 0; i < axes.size(); ++i) inv[axes[i]] = i;
  return inv;
}

Tensor permute(const Tensor& in, std::span<const std::size_t> axes) {
  const std::size_t r = in.rank();
  if (axes.size() != r) {
    throw ShapeError("permute: " + std::to_string(axes.size()) + " axes for rank " +
                     std::to_string(r));
  }
  std::vector<bool> seen(r, false);
  for (std::size_t a : axes) {
    if (a >= r || seen[a]) throw ShapeError("permute: axes are not a permutation");
    seen[a] = true;
  }

  Shape out_shape(r);
  for (std::size_t i = 0; i < r; ++i) out_shape[i] = in.shape()[axes[i]];

  std::vector<std::size_t> in_strides(r);
  std::size_t s = 1;
  for (std::size_t i = r; i-- > 0;) {
    in_strides[i] = s;
    s *= in.shape()[i];
  }
  // Stride in the input of each output axis.
  std::vector<std::size_t> step(r);
  for (std::size_t i = 0; i < r; ++i) step[i] = in_strides[axes[i]];

  Tensor out(out_shape);
  if (out.size() == 0) return out;

  // Innermost output axis is walked in a tight loop.
  const std::size_t inner = out_shape[r - 1];
  const std::size_t inner_step = step[r - 1];
  std::vector<std::size_t> idx(r, 0);
  const double* src = in.raw();
  double* dst = out.raw();
  std::size_t base = 0;
  const std::size_t outer = out.size() / inner;
  for (std::size_t o = 0; o < outer; ++o) {
    const double* p = src + base;
    for (std::size_t k = 0; k < inner; ++k) dst[k] = p[k * inner_step];
    dst += inner;
    // Advance the multi-index over axes [0, r-1).
    for (std::size_t ax = r - 1; ax-- > 0;) {
      ++idx[ax];
      base += step[ax];
      if (idx[ax] < out_shape[ax]) break;
      base -= step[ax] * idx[ax];
      idx[ax] = 0;
    }
  }
  return out;
}

Tensor frame(const Tensor& video, std::size_t t) {
  if (video.rank() != 4) throw ShapeError("frame(): expected rank-4 video, got " + to_string(video.shape()));
  if (t >= video.extent(0)) throw ShapeError("frame(): index out of range");
  const std::size_t n = video.size() / video.extent(0);
  std::vector<double> data(video.raw() + t * n, video.raw() + (t + 1) * n);
  return Tensor({video.extent(1), video.extent(2), video.extent(3)}, std::move(data));
}

Tensor stack_frames(std::span<const Tensor> frames) {
  if (frames.empty()) throw ShapeError("stack_frames(): no frames");
  const Shape& s = frames.front().shape();
  if (s.size() != 3) throw ShapeError("stack_frames(): frames must be rank 3");
  std::vector<double> data;
  data.reserve(frames.size() * frames.front().size());
  for (const Tensor& f : frames) {
    if (f.shape() != s) throw ShapeError("stack_frames(): inconsistent frame shapes");
    data.insert(data.end(), f.data().begin(), f.data().end());
  }
  return Tensor({frames.size(), s[0], s[1], s[2]}, std::move(data));
}

}  // namespace vistrip
