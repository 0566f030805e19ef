#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "genhop/tensor.hpp"

namespace genhop::detail {

/// Eigenpairs of a symmetric matrix, eigenvalues descending, eigenvectors in
/// columns.
struct SortedEigen {
  Vector values;
  Matrix vectors;
};

inline SortedEigen symmetric_eigen_descending(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  const Eigen::Index n = sym.rows();
  SortedEigen out{Vector(n), Matrix(n, n)};
  // The solver returns ascending order.
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values[i] = solver.eigenvalues()[n - 1 - i];
    out.vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
  }
  return out;
}

/// Flips v so that its largest-magnitude entry (first one on ties) is
/// positive.
template <typename Derived>
void fix_sign(Eigen::MatrixBase<Derived>&& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (std::abs(v(i)) > std::abs(v(best))) best = i;
  }
  if (v(best) < 0) v = -v;
}

/// Eigenvalues below this fraction of the trace are treated as exact zeros.
inline constexpr double kRelativeEigenFloor = 1e-13;

inline void clamp_small_eigenvalues(Vector& values) {
  const double scale = values.cwiseAbs().sum();
  for (auto& v : values) {
    if (v <= kRelativeEigenFloor * scale || v < 0.0) v = 0.0;
  }
}

}  // namespace genhop::detail
