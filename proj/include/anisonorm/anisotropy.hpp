#pragma once

// Anisotropy of zero-mean Gaussian random vectors in R^ell. For W ~ N(0, S):
//
//   h(W)        = 1/2 ln((2 pi e)^ell det S)
//   D(W || p_l) = ell/2 ln(2 pi l) + Tr S / (2 l) - h(W)
//   A(W)        = min_l D(W || p_l) = -1/2 ln det(ell S / Tr S)
//
// with the minimum reached at l = Tr S / ell.

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Dense>

#include "anisonorm/errors.hpp"
#include "anisonorm/linalg.hpp"

namespace anisonorm {

class GaussianLaw {
 public:
  explicit GaussianLaw(MatrixXd covariance) : cov_(std::move(covariance)) {
    if (cov_.rows() == 0 || cov_.rows() != cov_.cols()) {
      throw DimensionError("GaussianLaw: covariance must be square, nonempty");
    }
    if (!cov_.allFinite()) {
      throw NonFiniteError("GaussianLaw: covariance has non-finite entries");
    }
    if (max_abs(cov_ - cov_.transpose()) > 1e-12 * max_abs(cov_)) {
      throw RangeError("GaussianLaw: covariance is not symmetric");
    }
    cov_ = symmetrized(cov_);
    auto f = SymmetricFactor::of(cov_);
    if (!f) {
      throw RangeError("GaussianLaw: covariance is not positive definite");
    }
    log_det_ = f->log_det();
  }

  /// Only zero-mean laws are representable; a nonzero mean is rejected.
  GaussianLaw(MatrixXd covariance, const VectorXd& mean)
      : GaussianLaw(std::move(covariance)) {
    if (mean.size() != cov_.rows()) {
      throw DimensionError("GaussianLaw: mean has wrong length");
    }
    if (!mean.isZero(0.0)) {
      throw RangeError("GaussianLaw: only zero-mean laws are supported");
    }
  }

  int dim() const { return static_cast<int>(cov_.rows()); }
  const MatrixXd& covariance() const { return cov_; }
  double log_det() const { return log_det_; }
  double second_moment() const { return cov_.trace(); }  ///< E|W|^2

 private:
  MatrixXd cov_;
  double log_det_ = 0.0;
};

inline double gaussian_differential_entropy(const GaussianLaw& law) {
  const double two_pi_e = 2.0 * std::numbers::pi * std::numbers::e;
  return 0.5 * (law.dim() * std::log(two_pi_e) + law.log_det());
}

inline double relative_entropy_to_isotropic(const GaussianLaw& law,
                                            double lambda) {
  if (!(lambda > 0.0)) {
    throw RangeError("relative_entropy_to_isotropic: lambda must be > 0");
  }
  const double ell = law.dim();
  return 0.5 * ell * std::log(2.0 * std::numbers::pi * lambda) +
         law.second_moment() / (2.0 * lambda) -
         gaussian_differential_entropy(law);
}

inline double optimal_lambda(const GaussianLaw& law) {
  return law.second_moment() / law.dim();
}

inline double gaussian_anisotropy(const GaussianLaw& law) {
  const double ell = law.dim();
  return -0.5 * (ell * std::log(ell / law.second_moment()) + law.log_det());
}

/// Anisotropy from E|W|^2 and a caller-supplied differential entropy; the
/// law itself need not be Gaussian.
inline double anisotropy_from_moments(int ell, double second_moment_trace,
                                      double diff_entropy) {
  if (ell <= 0) throw DimensionError("anisotropy_from_moments: ell <= 0");
  if (!(second_moment_trace > 0.0)) {
    throw RangeError("anisotropy_from_moments: E|W|^2 must be > 0");
  }
  const double two_pi_e = 2.0 * std::numbers::pi * std::numbers::e;
  return 0.5 * ell * std::log(two_pi_e * second_moment_trace / ell) -
         diff_entropy;
}

/// The isotropic Gaussian with the same second moment.
inline GaussianLaw nearest_isotropic(const GaussianLaw& law) {
  return GaussianLaw(optimal_lambda(law) *
                     MatrixXd::Identity(law.dim(), law.dim()));
}

}  // namespace anisonorm
