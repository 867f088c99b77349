#pragma once

// Oracle path: every quantity here is computed from the dense Gram matrix
// Lambda = F^T F of the stacked operator F = F_{0:N}, with ell = m(N+1).
//
//   S(q) = (I - q Lambda)^{-1},           0 <= q < 1/||F||_inf^2
//   A(q) = -1/2 ln det(ell S / Tr S)      anisotropy of the worst input
//   N(q) = sqrt(Tr(Lambda S) / Tr S)      its RMS gain
//   fA(q, gamma) = 1/2 ln det(I - q Lambda) - ell/2 ln(1 - q gamma^2)
//
// A and N are strictly increasing unless Lambda is scalar, so
// |||F|||_a = N(A^{-1}(a)) is found by bisection on q.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "anisonorm/errors.hpp"
#include "anisonorm/linalg.hpp"
#include "anisonorm/system_model.hpp"

namespace anisonorm {

struct GramOperator {
  MatrixXd lambda;
  int ell = 0;
  double hinf_sq = 0.0;  ///< largest eigenvalue of lambda

  double trace() const { return lambda.trace(); }
  bool is_zero() const { return max_abs(lambda) == 0.0; }

  /// Lambda == (Tr Lambda / ell) I up to 1e-12 relative. Every admissible
  /// input then sees the same RMS gain.
  bool is_scalar() const {
    const double mean = trace() / ell;
    const MatrixXd dev =
        lambda - mean * MatrixXd::Identity(ell, ell);
    return max_abs(dev) <= 1e-12 * std::abs(mean);
  }

  /// Upper end of the admissible q-range, +inf for the zero operator.
  double q_sup() const {
    return hinf_sq > 0.0 ? 1.0 / hinf_sq
                         : std::numeric_limits<double>::infinity();
  }
};

inline GramOperator gram_operator(const LdtvSystem& sys) {
  validate(sys);
  const MatrixXd f = assemble_stacked(sys, 0, sys.horizon).matrix;
  GramOperator g;
  g.lambda = symmetrized(f.transpose() * f);
  g.ell = static_cast<int>(g.lambda.rows());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(g.lambda,
                                             Eigen::EigenvaluesOnly);
  g.hinf_sq = std::max(0.0, es.eigenvalues().maxCoeff());
  return g;
}

inline double h2_norm(const GramOperator& g) {
  return std::sqrt(std::max(0.0, g.trace()));
}
inline double hinf_norm(const GramOperator& g) { return std::sqrt(g.hinf_sq); }
inline double h2_norm(const LdtvSystem& sys) {
  return h2_norm(gram_operator(sys));
}
inline double hinf_norm(const LdtvSystem& sys) {
  return hinf_norm(gram_operator(sys));
}

namespace detail {

inline SymmetricFactor factor_resolvent(const GramOperator& g, double q) {
  if (!(q >= 0.0)) {
    throw RangeError("q must be nonnegative (got " + std::to_string(q) + ")");
  }
  const MatrixXd m = MatrixXd::Identity(g.ell, g.ell) - q * g.lambda;
  auto f = SymmetricFactor::of(m);
  if (!f) {
    throw RangeError("I - q*Lambda is not positive definite at q = " +
                     std::to_string(q));
  }
  return *std::move(f);
}

}  // namespace detail

/// (I - q Lambda)^{-1}; RangeError outside [0, 1/hinf_sq).
inline MatrixXd s_of_q(const GramOperator& g, double q) {
  return detail::factor_resolvent(g, q).inverse();
}

/// One evaluation of the worst-case input family at parameter q.
struct QPoint {
  double q = 0.0;
  MatrixXd s_of_q;
  double aniso = 0.0;  ///< A(q), nats
  double gain = 0.0;   ///< N(q)
};

inline QPoint evaluate_q(const GramOperator& g, double q) {
  const SymmetricFactor resolvent = detail::factor_resolvent(g, q);
  QPoint p;
  p.q = q;
  p.s_of_q = resolvent.inverse();
  const double ell = g.ell;
  const double tr_s = p.s_of_q.trace();
  // ln det S = -ln det(I - q Lambda)
  const double log_det_s = -resolvent.log_det();
  p.aniso =
      std::max(0.0, -0.5 * (ell * std::log(ell) + log_det_s -
                            ell * std::log(tr_s)));
  const double tr_ls = (g.lambda * p.s_of_q).trace();
  p.gain = std::sqrt(std::max(0.0, tr_ls / tr_s));
  return p;
}

inline double aniso_of_q(const GramOperator& g, double q) {
  return evaluate_q(g, q).aniso;
}

inline double gain_of_q(const GramOperator& g, double q) {
  return evaluate_q(g, q).gain;
}

/// ln det(I - q Lambda), RangeError outside the admissible range.
inline double log_det_resolvent(const GramOperator& g, double q) {
  return detail::factor_resolvent(g, q).log_det();
}

inline double fa(const GramOperator& g, double q, double gamma) {
  if (!(q * gamma * gamma < 1.0)) {
    throw RangeError("fa: q*gamma^2 must be < 1");
  }
  return 0.5 * log_det_resolvent(g, q) -
         0.5 * g.ell * std::log1p(-q * gamma * gamma);
}

/// Closed-form partial derivative of fA in q:
///   ell (gamma^2 - N(q)^2) / (2 (1 - q gamma^2)(1 - q N(q)^2)).
inline double fa_dq(const GramOperator& g, double q, double gamma) {
  if (!(q * gamma * gamma < 1.0)) {
    throw RangeError("fa_dq: q*gamma^2 must be < 1");
  }
  const double n2 = std::pow(gain_of_q(g, q), 2);
  const double g2 = gamma * gamma;
  return g.ell * (g2 - n2) / (2.0 * (1.0 - q * g2) * (1.0 - q * n2));
}

inline constexpr double kDefaultRootTol = 1e-10;
inline constexpr int kMaxBisection = 200;

/// |||F|||_a from the dense operator.
inline double anisotropic_norm_dense(const GramOperator& g, double a,
                                     double tol = kDefaultRootTol) {
  if (!(a >= 0.0)) throw RangeError("anisotropy level a must be >= 0");
  if (!(tol > 0.0)) throw RangeError("tolerance must be positive");
  if (g.is_zero()) return 0.0;
  if (g.is_scalar()) return hinf_norm(g);
  if (a == 0.0) return h2_norm(g) / std::sqrt(static_cast<double>(g.ell));

  double lo = 0.0;
  double hi = g.q_sup();
  double best_gain = gain_of_q(g, 0.0);
  for (int it = 0; it < kMaxBisection; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    QPoint p;
    try {
      p = evaluate_q(g, mid);
    } catch (const RangeError&) {
      // Beyond the numerically admissible range; anisotropy is +inf there.
      hi = mid;
      continue;
    }
    if (p.aniso < a) {
      lo = mid;
      best_gain = p.gain;
    } else {
      hi = mid;
      best_gain = p.gain;
    }
    if (std::abs(p.aniso - a) <= tol) break;
  }
  return best_gain;
}

/// Smallest input anisotropy that reaches RMS gain gamma; nullopt when
/// gamma >= ||F||_inf (not attainable with finite anisotropy).
inline std::optional<double> min_required_anisotropy(
    const GramOperator& g, double gamma, double tol = kDefaultRootTol) {
  if (!(gamma >= 0.0)) throw RangeError("gamma must be >= 0");
  if (gamma <= gain_of_q(g, 0.0)) return 0.0;
  if (gamma >= hinf_norm(g)) return std::nullopt;
  double lo = 0.0;
  double hi = g.q_sup();
  double aniso = 0.0;
  for (int it = 0; it < kMaxBisection; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    QPoint p;
    try {
      p = evaluate_q(g, mid);
    } catch (const RangeError&) {
      hi = mid;
      continue;
    }
    aniso = p.aniso;
    if (p.gain < gamma) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (std::abs(p.gain - gamma) <= tol * std::max(1.0, gamma)) break;
  }
  return aniso;
}

/// Normalized worst-case covariance S(q) / Tr S(q).
inline MatrixXd worst_case_covariance(const GramOperator& g, double q) {
  const MatrixXd s = s_of_q(g, q);
  return s / s.trace();
}

/// sqrt(Tr(Lambda Pi)) for a unit-trace PSD covariance Pi.
inline double rms_gain(const GramOperator& g, const MatrixXd& pi) {
  if (pi.rows() != g.ell || pi.cols() != g.ell) {
    throw DimensionError("rms_gain: Pi must be ell x ell");
  }
  if (std::abs(pi.trace() - 1.0) > 1e-10) {
    throw RangeError("rms_gain: Pi must have unit trace");
  }
  if (max_abs(pi - pi.transpose()) > 1e-12 * std::max(1.0, max_abs(pi))) {
    throw RangeError("rms_gain: Pi must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrized(pi),
                                             Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-12 * max_abs(pi)) {
    throw RangeError("rms_gain: Pi must be positive semidefinite");
  }
  return std::sqrt(std::max(0.0, (g.lambda * pi).trace()));
}

}  // namespace anisonorm
