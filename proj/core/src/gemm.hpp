#pragma once

#include <cstddef>

namespace vistrip::detail {

/// C (m x n) = [C +] op(A) * op(B), row-major, op = optional transpose.
/// A is m x k after op, B is k x n after op.
void gemm(const double* a, bool trans_a, const double* b, bool trans_b, double* c, std::size_t m,
          std::size_t k, std::size_t n, bool accumulate);

}  // namespace vistrip::detail
