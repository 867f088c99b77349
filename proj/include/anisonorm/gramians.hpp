#pragma once

// Controllability / observability gramians of an LDTV system on [0, N]
//
//   P_{j+1} = A_j P_j A_j^T + B_j B_j^T,   P_0 = 0,
//   Q_k     = A_k^T Q_{k+1} A_k + C_k^T C_k,   Q_{N+1} = 0,
//
// and the state-space outerness test (F_{0:N} F_{0:N}^T = I) built on them:
//
//   C_k P_k C_k^T + D_k D_k^T = I_r,
//   Q_{k+1} (A_k P_k C_k^T + B_k D_k^T) = 0,   k = 0..N.

#include <algorithm>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "anisonorm/errors.hpp"
#include "anisonorm/linalg.hpp"
#include "anisonorm/system_model.hpp"

namespace anisonorm {

struct GramianSet {
  std::vector<MatrixXd> P;  ///< P_0 .. P_{N+1}
  std::vector<MatrixXd> Q;  ///< Q_0 .. Q_{N+1}
};

inline GramianSet compute_gramians(const LdtvSystem& sys) {
  validate(sys);
  const std::size_t len = sys.steps() + 1;
  GramianSet g;
  g.P.assign(len, MatrixXd::Zero(sys.n, sys.n));
  g.Q.assign(len, MatrixXd::Zero(sys.n, sys.n));
  for (std::size_t j = 0; j + 1 < len; ++j) {
    g.P[j + 1] = symmetrized(sys.A[j] * g.P[j] * sys.A[j].transpose() +
                             sys.B[j] * sys.B[j].transpose());
  }
  for (std::size_t k = len - 1; k-- > 0;) {
    g.Q[k] = symmetrized(sys.A[k].transpose() * g.Q[k + 1] * sys.A[k] +
                         sys.C[k].transpose() * sys.C[k]);
  }
  return g;
}

/// cov(z_k) under unit white-noise input.
inline MatrixXd output_covariance(const LdtvSystem& sys, int k) {
  if (k < 0 || k > sys.horizon) {
    throw DimensionError("output_covariance: k outside [0, N]");
  }
  MatrixXd p = MatrixXd::Zero(sys.n, sys.n);
  for (int j = 0; j < k; ++j) {
    p = sys.A[j] * p * sys.A[j].transpose() + sys.B[j] * sys.B[j].transpose();
  }
  return symmetrized(sys.C[k] * p * sys.C[k].transpose() +
                     sys.D[k] * sys.D[k].transpose());
}

struct OuternessReport {
  bool outer = false;
  double tol = 0.0;
  /// max|C_k P_k C_k^T + D_k D_k^T - I_r| per k.
  std::vector<double> covariance_residual;
  /// max|Q_{k+1}(A_k P_k C_k^T + B_k D_k^T)| per k.
  std::vector<double> cross_residual;
  /// ||sqrt(Q_{k+1})(A_k P_k C_k^T + B_k D_k^T)||_F^2, the total squared
  /// cross-covariance between z_k and all later outputs.
  std::vector<double> cross_energy;
};

namespace detail {
inline void require_outer_shape(const LdtvSystem& sys) {
  if (sys.r > sys.m) {
    throw DimensionError("outerness requires r <= m (got r=" +
                         std::to_string(sys.r) + ", m=" +
                         std::to_string(sys.m) + ")");
  }
}
}  // namespace detail

inline constexpr double kDefaultOuterTol = 1e-8;

inline OuternessReport is_outer(const LdtvSystem& sys,
                                double tol = kDefaultOuterTol) {
  validate(sys);
  detail::require_outer_shape(sys);
  const GramianSet g = compute_gramians(sys);
  OuternessReport rep;
  rep.tol = tol;
  rep.outer = true;
  const MatrixXd eye = MatrixXd::Identity(sys.r, sys.r);
  for (int k = 0; k <= sys.horizon; ++k) {
    const MatrixXd cov = sys.C[k] * g.P[k] * sys.C[k].transpose() +
                         sys.D[k] * sys.D[k].transpose();
    const MatrixXd x = sys.A[k] * g.P[k] * sys.C[k].transpose() +
                       sys.B[k] * sys.D[k].transpose();
    const double cov_res = max_abs(cov - eye);
    const double cross_res = max_abs(g.Q[k + 1] * x);
    rep.covariance_residual.push_back(cov_res);
    rep.cross_residual.push_back(cross_res);
    rep.cross_energy.push_back(
        (symmetric_sqrt(g.Q[k + 1]) * x).squaredNorm());
    if (!(cov_res <= tol && cross_res <= tol)) rep.outer = false;
  }
  return rep;
}

/// Dense check of F_{0:N} F_{0:N}^T = I.
inline bool outerness_oracle(const LdtvSystem& sys,
                             double tol = kDefaultOuterTol) {
  validate(sys);
  detail::require_outer_shape(sys);
  const MatrixXd f = assemble_stacked(sys, 0, sys.horizon).matrix;
  const MatrixXd ff = f * f.transpose();
  return max_abs(ff - MatrixXd::Identity(ff.rows(), ff.cols())) <= tol;
}

}  // namespace anisonorm
