#ifndef ELAS_CORE_LINALG_HPP
#define ELAS_CORE_LINALG_HPP

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "elas/core/error.hpp"
#include "elas/core/types.hpp"

namespace elas::linalg {

/// Eigendecomposition of a symmetric matrix with eigenvalues floored at
/// `rel_floor * max eigenvalue`. `repaired` reports whether flooring happened.
struct SymmetricEigen {
  Vector values;
  Matrix vectors;
  bool repaired = false;

  explicit SymmetricEigen(const Matrix& a, double rel_floor = 1e-12) {
    require(a.rows() == a.cols() && a.rows() > 0, ErrorCode::DimensionMismatch, "matrix must be square");
    require(a.allFinite(), ErrorCode::DegenerateCovariance, "matrix has non-finite entries");
    const Matrix sym = 0.5 * (a + a.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
    require(solver.info() == Eigen::Success, ErrorCode::DegenerateCovariance, "eigendecomposition failed");
    values = solver.eigenvalues();
    vectors = solver.eigenvectors();
    const double top = values.maxCoeff();
    require(top > 0.0, ErrorCode::DegenerateCovariance, "matrix has no positive eigenvalue");
    const double floor = rel_floor * top;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      if (values(i) < floor) {
        values(i) = floor;
        repaired = true;
      }
    }
  }

  Matrix sqrt() const { return vectors * values.cwiseSqrt().asDiagonal() * vectors.transpose(); }
  Matrix inv_sqrt() const { return vectors * values.cwiseSqrt().cwiseInverse().asDiagonal() * vectors.transpose(); }
  Matrix reconstruct() const { return vectors * values.asDiagonal() * vectors.transpose(); }
  double log_det() const { return values.array().log().sum(); }
};

/// Cholesky factor of an SPD matrix; throws DegenerateCovariance otherwise.
inline Eigen::LLT<Matrix> spd_cholesky(const Matrix& a) {
  require(a.rows() == a.cols(), ErrorCode::DimensionMismatch, "matrix must be square");
  Eigen::LLT<Matrix> llt(a);
  require(llt.info() == Eigen::Success && a.allFinite(), ErrorCode::DegenerateCovariance,
          "matrix is not positive definite");
  return llt;
}

}  // namespace elas::linalg

#endif  // ELAS_CORE_LINALG_HPP
