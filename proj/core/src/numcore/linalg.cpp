#include "kc/numcore/linalg.hpp"

#include "kc/numcore/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace kc {

bool is_symmetric(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < m.cols(); ++j) {
      if (std::abs(m(i, j) - m(j, i)) > tol) return false;
    }
  }
  return true;
}

Matrix cholesky_spd(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "cholesky_spd: matrix is not square");
  }
  if (!m.allFinite()) {
    throw Error(ErrorCode::NotPositiveDefinite, "cholesky_spd: non-finite entry");
  }
  const Eigen::Index n = m.rows();
  Matrix lower = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double pivot = m(j, j);
    for (Eigen::Index k = 0; k < j; ++k) pivot -= lower(j, k) * lower(j, k);
    if (!(pivot > kCholeskyPivotFloor)) {
      throw Error(ErrorCode::NotPositiveDefinite,
                  "cholesky_spd: pivot " + std::to_string(pivot) + " at column " + std::to_string(j));
    }
    const double diag = std::sqrt(pivot);
    lower(j, j) = diag;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double acc = m(i, j);
      for (Eigen::Index k = 0; k < j; ++k) acc -= lower(i, k) * lower(j, k);
      lower(i, j) = acc / diag;
    }
  }
  return lower;
}

Matrix cholesky_solve(const Matrix& lower, const Matrix& rhs) {
  if (lower.rows() != rhs.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "cholesky_solve: shape mismatch");
  }
  const auto tri = lower.triangularView<Eigen::Lower>();
  Matrix y = tri.solve(rhs);
  return tri.transpose().solve(y);
}

Vector cholesky_solve(const Matrix& lower, const Vector& rhs) {
  if (lower.rows() != rhs.size()) {
    throw Error(ErrorCode::DimensionMismatch, "cholesky_solve: shape mismatch");
  }
  const auto tri = lower.triangularView<Eigen::Lower>();
  Vector y = tri.solve(rhs);
  return tri.transpose().solve(y);
}

Vector symmetric_eigenvalues(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "symmetric_eigenvalues: matrix is not square");
  }
  const Eigen::Index n = m.rows();
  Matrix a = 0.5 * (m + m.transpose());
  constexpr int kMaxSweeps = 100;
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    }
    if (std::sqrt(off) <= 1e-15 * scale * static_cast<double>(n)) {
      Vector eig = a.diagonal();
      std::sort(eig.data(), eig.data() + n);
      return eig;
    }
    for (Eigen::Index p = 0; p < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rotation angle that annihilates a(p, q).
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  throw Error(ErrorCode::NoConvergence, "symmetric_eigenvalues: Jacobi sweep cap reached");
}

double min_eigenvalue(const Matrix& m) { return symmetric_eigenvalues(m)(0); }

}  // namespace kc
