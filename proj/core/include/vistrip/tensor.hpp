#pragma once

#include <cstddef>
#include <initializer_list>
#include <new>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace vistrip {

// 64-byte aligned storage. Vectorised kernels pick different code paths for
// different pointer alignments, so a fixed alignment keeps results reproducible.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t alignment{64};
  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}
  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), alignment)); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, alignment); }
  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

using AlignedBuffer = std::vector<double, AlignedAllocator<double>>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Incompatible extents passed to an operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid model, loss, or run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed file contents (VSTF, checkpoint, PPM, manifest).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values where finite values are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

using Shape = std::vector<std::size_t>;

std::size_t numel(const Shape& shape);
std::string to_string(const Shape& shape);

/// Dense row-major array of doubles.
///
/// Model-facing volumes are rank 4 and indexed (frame, row, col, channel).
/// Attention internals use up to rank 6 while regrouping heads and strips.
class Tensor {
 public:
  static constexpr std::size_t kMaxRank = 6;

  Tensor();
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double value);
  static Tensor zeros_like(const Tensor& other) { return Tensor(other.shape()); }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t extent(std::size_t axis) const;

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  double* raw() { return data_.data(); }
  const double* raw() const { return data_.data(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double& at(std::initializer_list<std::size_t> index);
  double at(std::initializer_list<std::size_t> index) const;
  std::size_t offset(std::initializer_list<std::size_t> index) const;

  /// Same data, new extents; the element count must not change.
  Tensor reshaped(Shape shape) const&;
  Tensor reshaped(Shape shape) &&;

  void fill(double value);
  void add_inplace(const Tensor& other);
  void scale_inplace(double factor);

  /// Scalar value of a one-element tensor.
  double item() const;

 private:
  Shape shape_;
  AlignedBuffer data_;
};

bool same_shape(const Tensor& a, const Tensor& b);
void require_same_shape(const Tensor& a, const Tensor& b, const char* what);

/// Exact elementwise equality of shape and bits.
bool bit_equal(const Tensor& a, const Tensor& b);
double max_abs_diff(const Tensor& a, const Tensor& b);
bool all_finite(const Tensor& t);

/// out[... axes permuted ...] = in[...]; `axes[i]` names the input axis placed at position i.
Tensor permute(const Tensor& in, std::span<const std::size_t> axes);
std::vector<std::size_t> inverse_permutation(std::span<const std::size_t> axes);

/// Frame `t` of a rank-4 volume as a rank-3 tensor.
Tensor frame(const Tensor& video, std::size_t t);
/// Stacks rank-3 frames along a new leading axis.
Tensor stack_frames(std::span<const Tensor> frames);

}  // namespace vistrip
