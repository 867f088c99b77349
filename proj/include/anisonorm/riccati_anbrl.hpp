#pragma once

// State-space route to the a-anisotropic norm. For q >= 0 the forward
// difference Riccati recursion, started from R_0 = 0,
//
//   S_k     = I_r - C_k R_k C_k^T - q D_k D_k^T
//   M_k     = -(A_k R_k C_k^T + q B_k D_k^T) S_k^{-1}
//   R_{k+1} = A_k R_k A_k^T + q B_k B_k^T + M_k S_k M_k^T
//
// yields an all-positive-definite S-sequence iff q < ||F||_inf^{-2}, and
//
//   sum_k ln det S_k = ln det(I - q F^T F).
//
// |||F|||_a <= gamma holds iff some admissible q satisfies
//
//   sum_k ln det S_k >= m(N+1) ln(1 - q gamma^2) + 2a.
//
// The margin (lhs - rhs) is unimodal in q, so the existence question is
// settled by a golden-section maximization over the localized interval
//   gamma^{-2}(1 - exp(-2a/(m(N+1)))) <= q < gamma^{-2}.
//
// sqrt(S_k) is the symmetric PSD root throughout. Any root with
// sqrt(S) sqrt(S)^T = S would satisfy the factorization identity; a
// Cholesky factor gives a different (but equally valid) H.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "anisonorm/dense_analysis.hpp"
#include "anisonorm/errors.hpp"
#include "anisonorm/gramians.hpp"
#include "anisonorm/linalg.hpp"
#include "anisonorm/system_model.hpp"

namespace anisonorm {

/// Raised by operations that need an all-PD recursion and did not get one.
class NonPdError : public RangeError {
 public:
  NonPdError(int k, double q)
      : RangeError("Riccati matrix S_" + std::to_string(k) +
                   " is not positive definite at q = " + std::to_string(q)),
        step(k) {}
  int step;
};

inline constexpr double kDefaultDecisionTol = 1e-9;

/// One step of the recursion. When S_k is not positive definite, pd is false
/// and M, R_next are left empty.
struct RiccatiStep {
  int k = 0;
  bool pd = false;
  MatrixXd S;
  MatrixXd M;
  MatrixXd R_next;
  double logdet_S = 0.0;
};

inline RiccatiStep riccati_step(const LdtvSystem& sys, int k,
                                const MatrixXd& r_k, double q) {
  if (k < 0 || k > sys.horizon) {
    throw DimensionError("riccati_step: k outside [0, N]");
  }
  if (!(q >= 0.0)) throw RangeError("riccati_step: q must be >= 0");
  const MatrixXd& a = sys.A[k];
  const MatrixXd& b = sys.B[k];
  const MatrixXd& c = sys.C[k];
  const MatrixXd& d = sys.D[k];

  RiccatiStep step;
  step.k = k;
  step.S = symmetrized(MatrixXd::Identity(sys.r, sys.r) -
                       c * r_k * c.transpose() - q * d * d.transpose());
  const auto factor = SymmetricFactor::of(step.S);
  if (!factor) return step;
  step.pd = true;
  step.logdet_S = factor->log_det();
  const MatrixXd x = a * r_k * c.transpose() + q * b * d.transpose();
  step.M = -factor->solve(x.transpose()).transpose();
  step.R_next = symmetrized(a * r_k * a.transpose() + q * b * b.transpose() +
                            step.M * step.S * step.M.transpose());
  return step;
}

/// Evidence record of a full run on [0, N]. On failure at step k the
/// sequences stop there: R and S hold entries 0..k (S_k is the offending
/// matrix), M and logdet_S hold entries 0..k-1.
struct RiccatiTrace {
  double q = 0.0;
  std::vector<MatrixXd> R;
  std::vector<MatrixXd> M;
  std::vector<MatrixXd> S;
  std::vector<double> logdet_S;
  bool all_pd = false;
  std::optional<int> first_failure;

  double sum_logdet() const {
    double acc = 0.0;
    for (double v : logdet_S) acc += v;
    return acc;
  }
};

inline RiccatiTrace run_riccati(const LdtvSystem& sys, double q) {
  if (!(q >= 0.0)) throw RangeError("run_riccati: q must be >= 0");
  RiccatiTrace tr;
  tr.q = q;
  tr.R.push_back(MatrixXd::Zero(sys.n, sys.n));
  for (int k = 0; k <= sys.horizon; ++k) {
    RiccatiStep st = riccati_step(sys, k, tr.R.back(), q);
    tr.S.push_back(std::move(st.S));
    if (!st.pd) {
      tr.first_failure = k;
      tr.all_pd = false;
      return tr;
    }
    tr.M.push_back(std::move(st.M));
    tr.logdet_S.push_back(st.logdet_S);
    if (k < sys.horizon) tr.R.push_back(std::move(st.R_next));
  }
  tr.all_pd = true;
  return tr;
}

namespace detail {

/// sum_k ln det S_k without keeping the trace; nullopt on a non-PD step.
inline std::optional<double> riccati_logdet_sum(const LdtvSystem& sys,
                                                double q) {
  MatrixXd r = MatrixXd::Zero(sys.n, sys.n);
  double acc = 0.0;
  for (int k = 0; k <= sys.horizon; ++k) {
    RiccatiStep st = riccati_step(sys, k, r, q);
    if (!st.pd) return std::nullopt;
    acc += st.logdet_S;
    r = std::move(st.R_next);
  }
  return acc;
}

inline bool riccati_feasible(const LdtvSystem& sys, double q) {
  return riccati_logdet_sum(sys, q).has_value();
}

/// Supremum of the all-PD q-range, i.e. ||F||_inf^{-2}, bracketed by
/// doubling/halving and then bisected until hi - lo <= rel_tol * hi.
/// Returns +inf when the recursion stays PD for every q (F = 0).
inline double q_feasible_sup(const LdtvSystem& sys, double rel_tol = 0.0) {
  double lo = 0.0;
  double hi = 1.0;
  if (riccati_feasible(sys, hi)) {
    lo = hi;
    while (riccati_feasible(sys, hi)) {
      lo = hi;
      hi *= 2.0;
      if (hi > 1e300) return std::numeric_limits<double>::infinity();
    }
  } else {
    double probe = 0.5;
    while (!riccati_feasible(sys, probe)) {
      hi = probe;
      probe *= 0.5;
      if (probe < 1e-300) return 0.0;
    }
    lo = probe;
  }
  for (int it = 0; it < kMaxBisection; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi || hi - lo <= rel_tol * hi) break;
    (riccati_feasible(sys, mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace detail

struct DeterminantIdentity {
  double lhs = 0.0;  ///< ln det(I - q Lambda), dense
  double rhs = 0.0;  ///< sum_k ln det S_k, Riccati
  double abs_diff = 0.0;
};

inline DeterminantIdentity determinant_identity_check(const LdtvSystem& sys,
                                                      double q) {
  const RiccatiTrace tr = run_riccati(sys, q);
  if (!tr.all_pd) throw NonPdError(*tr.first_failure, q);
  DeterminantIdentity out;
  out.lhs = log_det_resolvent(gram_operator(sys), q);
  out.rhs = tr.sum_logdet();
  out.abs_diff = std::abs(out.lhs - out.rhs);
  return out;
}

/// sum ln det S_k - m(N+1) ln(1 - q gamma^2) - 2a, or nullopt when some
/// S_k is not positive definite.
inline std::optional<double> anbrl_margin(const LdtvSystem& sys, double q,
                                          double gamma, double a) {
  if (!(q >= 0.0) || !(q * gamma * gamma < 1.0)) {
    throw RangeError("anbrl_margin: q must satisfy 0 <= q < gamma^-2");
  }
  const auto sum = detail::riccati_logdet_sum(sys, q);
  if (!sum) return std::nullopt;
  const double ell = static_cast<double>(sys.m) * sys.steps();
  return *sum - ell * std::log1p(-q * gamma * gamma) - 2.0 * a;
}

struct QInterval {
  double lower = 0.0;
  double upper = 0.0;
};

/// Candidate range for q given gamma and a, with alpha = a/(N+1) the
/// anisotropy per time step.
inline QInterval q_localization(double gamma, double a, int horizon, int m) {
  if (!(gamma > 0.0)) throw RangeError("q_localization: gamma must be > 0");
  if (!(a >= 0.0)) throw RangeError("q_localization: a must be >= 0");
  const double alpha = a / (horizon + 1.0);
  const double inv_g2 = 1.0 / (gamma * gamma);
  return {inv_g2 * -std::expm1(-2.0 * alpha / m), inv_g2};
}

struct AnbrlVerdict {
  bool holds = false;
  double gamma = 0.0;
  double a = 0.0;
  double alpha = 0.0;
  double q_lower = 0.0;
  double q_upper = 0.0;
  std::optional<double> witness_q;
  std::optional<double> margin;
  /// True when the Riccati recursion is PD at q = gamma^-2 (gamma exceeds
  /// ||F||_inf). The margin then grows without bound as q -> gamma^-2 and
  /// the verdict holds for every a even if the sampled margin is finite.
  bool margin_unbounded = false;
  double decision_tol = 0.0;
};

namespace detail {

/// Squared H2 norm from the gramians: sum_k Tr(C_k P_k C_k^T + D_k D_k^T).
inline double h2_norm_sq_state_space(const LdtvSystem& sys) {
  const GramianSet g = compute_gramians(sys);
  double acc = 0.0;
  for (int k = 0; k <= sys.horizon; ++k) {
    acc += (sys.C[k] * g.P[k] * sys.C[k].transpose()).trace() +
           sys.D[k].squaredNorm();
  }
  return std::max(0.0, acc);
}

inline constexpr int kMaxGolden = 300;

/// Core of check_anbrl with the all-PD supremum supplied by the caller so
/// that repeated decisions on one system reuse it.
inline AnbrlVerdict check_anbrl_with(const LdtvSystem& sys, double gamma,
                                     double a, double tol, double q_pd_sup) {
  AnbrlVerdict v;
  v.gamma = gamma;
  v.a = a;
  v.alpha = a / sys.steps();
  v.decision_tol = tol;
  const QInterval qi = q_localization(gamma, a, sys.horizon, sys.m);
  v.q_lower = qi.lower;
  v.q_upper = qi.upper;
  v.margin_unbounded = q_pd_sup > qi.upper && riccati_feasible(sys, qi.upper);

  auto margin_at = [&](double q) {
    const auto m = anbrl_margin(sys, q, gamma, a);
    return m ? *m : -std::numeric_limits<double>::infinity();
  };

  const double eps = 1e-12 * qi.upper;
  double lo = std::max(qi.lower, eps);
  double hi = std::min(qi.upper, q_pd_sup) - eps;

  bool searched = false;
  if (lo <= hi) {
    // Golden-section maximization; endpoints are kept as candidates.
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double best_q = lo;
    double best = margin_at(lo);
    const double m_hi = margin_at(hi);
    if (m_hi > best) {
      best = m_hi;
      best_q = hi;
    }
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = margin_at(x1);
    double f2 = margin_at(x2);
    for (int it = 0; it < kMaxGolden; ++it) {
      if (hi - lo <= 1e-15 * hi) break;
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + inv_phi * (hi - lo);
        f2 = margin_at(x2);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - inv_phi * (hi - lo);
        f1 = margin_at(x1);
      }
    }
    for (auto [q, f] : {std::pair{x1, f1}, std::pair{x2, f2}}) {
      if (f > best) {
        best = f;
        best_q = q;
      }
    }
    if (std::isfinite(best)) {
      v.witness_q = best_q;
      v.margin = best;
      searched = true;
    }
  }

  if (a == 0.0) {
    // At (a = 0, q = 0) the determinant inequality degenerates to 0 >= 0 for
    // every gamma, so the zero-anisotropy case is decided by the H2 bound.
    const double h2_scaled =
        std::sqrt(h2_norm_sq_state_space(sys) /
                  (static_cast<double>(sys.m) * sys.steps()));
    v.holds = h2_scaled <= gamma;
    if (!v.holds) {
      v.witness_q.reset();
      v.margin.reset();
    }
    return v;
  }

  v.holds = v.margin_unbounded || (searched && *v.margin >= -tol);
  return v;
}

}  // namespace detail

/// Decides |||F|||_a <= gamma from the Riccati recursion alone.
inline AnbrlVerdict check_anbrl(const LdtvSystem& sys, double gamma, double a,
                                double tol = kDefaultDecisionTol) {
  if (!(gamma > 0.0)) throw RangeError("check_anbrl: gamma must be > 0");
  if (!(a >= 0.0)) throw RangeError("check_anbrl: a must be >= 0");
  validate(sys);
  return detail::check_anbrl_with(sys, gamma, a, tol,
                                  detail::q_feasible_sup(sys));
}

/// Strict H-infinity bound ||F||_inf < gamma: the recursion at q = gamma^-2
/// must stay positive definite.
inline bool brl_check(const LdtvSystem& sys, double gamma) {
  if (!(gamma > 0.0)) throw RangeError("brl_check: gamma must be > 0");
  return detail::riccati_feasible(sys, 1.0 / (gamma * gamma));
}

/// ||F||_inf as q_sup^{-1/2}, q_sup the edge of Riccati feasibility.
inline double hinf_norm_riccati(const LdtvSystem& sys,
                                double tol = kDefaultRootTol) {
  if (!(tol > 0.0)) throw RangeError("hinf_norm_riccati: tol must be > 0");
  validate(sys);
  // Bisected to machine precision, so the error is far below any sane tol.
  const double q_sup = detail::q_feasible_sup(sys);
  if (std::isinf(q_sup)) return 0.0;
  return 1.0 / std::sqrt(q_sup);
}

/// |||F|||_a by bisection on gamma with check_anbrl as the decision oracle.
inline double anisotropic_norm_riccati(const LdtvSystem& sys, double a,
                                       double tol = kDefaultRootTol,
                                       double decision_tol =
                                           kDefaultDecisionTol) {
  if (!(a >= 0.0)) throw RangeError("anisotropy level a must be >= 0");
  if (!(tol > 0.0)) throw RangeError("tolerance must be positive");
  validate(sys);
  const double q_pd_sup = detail::q_feasible_sup(sys);
  if (std::isinf(q_pd_sup)) return 0.0;
  const double ell = static_cast<double>(sys.m) * sys.steps();
  const double lower = std::sqrt(detail::h2_norm_sq_state_space(sys) / ell);
  if (a == 0.0) return lower;
  double lo = lower;
  double hi = 1.0 / std::sqrt(q_pd_sup);
  for (int it = 0; it < kMaxBisection && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const AnbrlVerdict v =
        detail::check_anbrl_with(sys, mid, a, decision_tol, q_pd_sup);
    (v.holds ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

/// State-space realization of the factor H in I - q F F^T = H H^T.
struct SpectralFactor {
  LdtvSystem h;  ///< (A_k, M_k sqrt(S_k), C_k, sqrt(S_k)), r inputs
  double q = 0.0;
  std::vector<MatrixXd> sqrt_S;
};

inline SpectralFactor spectral_factor(const LdtvSystem& sys, double q) {
  validate(sys);
  const RiccatiTrace tr = run_riccati(sys, q);
  if (!tr.all_pd) throw NonPdError(*tr.first_failure, q);
  SpectralFactor sf;
  sf.q = q;
  sf.h.n = sys.n;
  sf.h.m = sys.r;
  sf.h.r = sys.r;
  sf.h.horizon = sys.horizon;
  sf.h.A = sys.A;
  sf.h.C = sys.C;
  for (int k = 0; k <= sys.horizon; ++k) {
    MatrixXd root = symmetric_sqrt(tr.S[k]);
    sf.h.B.push_back(tr.M[k] * root);
    sf.h.D.push_back(root);
    sf.sqrt_S.push_back(std::move(root));
  }
  return sf;
}

/// max|I - q F F^T - H H^T| over the stacked operators on [0, N].
inline double verify_factorization(const LdtvSystem& sys, double q) {
  const SpectralFactor sf = spectral_factor(sys, q);
  const MatrixXd f = assemble_stacked(sys, 0, sys.horizon).matrix;
  const MatrixXd h = assemble_stacked(sf.h, 0, sys.horizon).matrix;
  const MatrixXd resid = MatrixXd::Identity(f.rows(), f.rows()) -
                         q * f * f.transpose() - h * h.transpose();
  return max_abs(resid);
}

/// Psi = [sqrt(q) F, H]: (m + r) inputs, r outputs, outer on [0, N].
inline LdtvSystem build_psi(const LdtvSystem& sys, double q) {
  const SpectralFactor sf = spectral_factor(sys, q);
  const double sq = std::sqrt(q);
  LdtvSystem psi;
  psi.n = sys.n;
  psi.m = sys.m + sys.r;
  psi.r = sys.r;
  psi.horizon = sys.horizon;
  psi.A = sys.A;
  psi.C = sys.C;
  for (int k = 0; k <= sys.horizon; ++k) {
    MatrixXd b(sys.n, psi.m);
    b << sq * sys.B[k], sf.h.B[k];
    MatrixXd d(sys.r, psi.m);
    d << sq * sys.D[k], sf.h.D[k];
    psi.B.push_back(std::move(b));
    psi.D.push_back(std::move(d));
  }
  return psi;
}

}  // namespace anisonorm
