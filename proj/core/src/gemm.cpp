#include "gemm.hpp"

#include <Eigen/Core>

namespace vistrip::detail {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using Map = Eigen::Map<RowMat>;

}  // namespace

void gemm(const double* a, bool trans_a, const double* b, bool trans_b, double* c, std::size_t m,
          std::size_t k, std::size_t n, bool accumulate) {
  if (m == 0 || n == 0) return;
  const auto em = static_cast<Eigen::Index>(m);
  const auto ek = static_cast<Eigen::Index>(k);
  const auto en = static_cast<Eigen::Index>(n);
  Map cm(c, em, en);
  if (k == 0) {
    if (!accumulate) cm.setZero();
    return;
  }
  // Stored extents: A is (m x k) or (k x m); B is (k x n) or (n x k).
  ConstMap am(a, trans_a ? ek : em, trans_a ? em : ek);
  ConstMap bm(b, trans_b ? en : ek, trans_b ? ek : en);
  auto run = [&](const auto& lhs, const auto& rhs) {
    if (accumulate) {
      cm.noalias() += lhs * rhs;
    } else {
      cm.noalias() = lhs * rhs;
    }
  };
  if (!trans_a && !trans_b) run(am, bm);
  else if (trans_a && !trans_b) run(am.transpose(), bm);
  else if (!trans_a && trans_b) run(am, bm.transpose());
  else run(am.transpose(), bm.transpose());
}

}  // namespace vistrip::detail
