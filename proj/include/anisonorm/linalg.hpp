#pragma once

// Small dense helpers shared by the analysis headers: scale-aware positive
// definiteness, log-determinants through Cholesky, symmetric square roots.

#include <algorithm>
#include <cmath>
#include <optional>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace anisonorm {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Relative pivot threshold used by every positive-definiteness test.
inline constexpr double kPivotRelTol = 1e-12;

inline MatrixXd symmetrized(const MatrixXd& x) {
  return 0.5 * (x + x.transpose());
}

inline double max_abs(const MatrixXd& x) {
  return x.size() == 0 ? 0.0 : x.cwiseAbs().maxCoeff();
}

/// Cholesky factorization that only succeeds when every pivot exceeds
/// kPivotRelTol * max|x_ij|. The input is symmetrized first.
class SymmetricFactor {
 public:
  static std::optional<SymmetricFactor> of(const MatrixXd& x) {
    const MatrixXd s = symmetrized(x);
    if (s.rows() == 0) return SymmetricFactor(Eigen::LLT<MatrixXd>(s));
    if (!s.allFinite()) return std::nullopt;
    const double scale = max_abs(s);
    if (scale == 0.0) return std::nullopt;
    Eigen::LLT<MatrixXd> llt(s);
    if (llt.info() != Eigen::Success) return std::nullopt;
    const VectorXd diag = llt.matrixLLT().diagonal();
    for (Eigen::Index i = 0; i < diag.size(); ++i) {
      if (!(diag(i) * diag(i) > kPivotRelTol * scale)) return std::nullopt;
    }
    return SymmetricFactor(std::move(llt));
  }

  /// ln det of the factored matrix, summed over pivots.
  double log_det() const {
    double acc = 0.0;
    const auto& l = llt_.matrixLLT();
    for (Eigen::Index i = 0; i < l.rows(); ++i) acc += std::log(l(i, i));
    return 2.0 * acc;
  }

  MatrixXd solve(const MatrixXd& rhs) const { return llt_.solve(rhs); }

  MatrixXd inverse() const {
    const auto n = llt_.matrixLLT().rows();
    return symmetrized(llt_.solve(MatrixXd::Identity(n, n)));
  }

 private:
  explicit SymmetricFactor(Eigen::LLT<MatrixXd> llt) : llt_(std::move(llt)) {}
  Eigen::LLT<MatrixXd> llt_;
};

inline bool is_positive_definite(const MatrixXd& x) {
  return SymmetricFactor::of(x).has_value();
}

/// Symmetric PSD square root via eigen-decomposition; tiny negative
/// eigenvalues from rounding are clamped to zero.
inline MatrixXd symmetric_sqrt(const MatrixXd& x) {
  if (x.rows() == 0) return x;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrized(x));
  const VectorXd roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return symmetrized(es.eigenvectors() * roots.asDiagonal() *
                     es.eigenvectors().transpose());
}

}  // namespace anisonorm
