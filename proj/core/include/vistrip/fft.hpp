#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "vistrip/tensor.hpp"

namespace vistrip {

/// Full H x W complex spectrum, row-major, bin (u, v) at index u * cols + v.
struct Spectrum {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::complex<double>> bins;

  std::complex<double> at(std::size_t u, std::size_t v) const { return bins[u * cols + v]; }
};

/// Unnormalised forward 2-D DFT of a real [H,W] image:
/// X[u,v] = sum_{y,x} img[y,x] exp(-2 pi i (u y / H + v x / W)).
/// Power-of-two lengths use radix-2 FFT; other lengths use a direct DFT.
Spectrum rfft2(const Tensor& image);

/// Unnormalised 2-D DFT of complex data in place. `sign` is -1 for the
/// forward transform and +1 for the (unscaled) inverse direction.
void dft2_inplace(std::vector<std::complex<double>>& data, std::size_t rows, std::size_t cols,
                  int sign);

}  // namespace vistrip
