// Dense row-major matrix of doubles plus the handful of free-function
// kernels the rest of the library builds on. The matrix product is backed by
// Eigen; everything else is a simple loop.
#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>
#include <vector>

namespace mgb {

struct Tensor2 {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;  // row-major, rows*cols entries

  Tensor2() = default;
  Tensor2(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {
    if (r < 0 || c < 0) throw std::invalid_argument("Tensor2: negative shape");
  }

  double& at(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
  double at(int i, int j) const {
    return data[static_cast<std::size_t>(i) * cols + j];
  }

  bool same_shape(const Tensor2& o) const {
    return rows == o.rows && cols == o.cols;
  }

  static Tensor2 identity(int n) {
    Tensor2 t(n, n);
    for (int i = 0; i < n; ++i) t.at(i, i) = 1.0;
    return t;
  }
};

namespace detail {
using EigenRowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
inline Eigen::Map<const EigenRowMat> emap(const Tensor2& t) {
  return {t.data.data(), t.rows, t.cols};
}
inline Eigen::Map<EigenRowMat> emap(Tensor2& t) {
  return {t.data.data(), t.rows, t.cols};
}
}  // namespace detail

inline Tensor2 matmul(const Tensor2& a, const Tensor2& b) {
  if (a.cols != b.rows) {
    throw std::invalid_argument("matmul: inner dimensions disagree (" +
                                std::to_string(a.cols) + " vs " +
                                std::to_string(b.rows) + ")");
  }
  Tensor2 out(a.rows, b.cols);
  detail::emap(out).noalias() = detail::emap(a) * detail::emap(b);
  return out;
}

// A^T * B without materializing the transpose.
inline Tensor2 matmul_tn(const Tensor2& a, const Tensor2& b) {
  if (a.rows != b.rows) throw std::invalid_argument("matmul_tn: shape");
  Tensor2 out(a.cols, b.cols);
  detail::emap(out).noalias() = detail::emap(a).transpose() * detail::emap(b);
  return out;
}

// A * B^T without materializing the transpose.
inline Tensor2 matmul_nt(const Tensor2& a, const Tensor2& b) {
  if (a.cols != b.cols) throw std::invalid_argument("matmul_nt: shape");
  Tensor2 out(a.rows, b.rows);
  detail::emap(out).noalias() = detail::emap(a) * detail::emap(b).transpose();
  return out;
}

}  // namespace mgb
