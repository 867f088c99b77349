#pragma once

// Finite-horizon linear discrete time-varying (LDTV) systems
//
//   x_{k+1} = A_k x_k + B_k w_k,
//   z_k     = C_k x_k + D_k w_k,     k = 0, ..., N,   x_0 = 0,
//
// their state transition matrices and the stacked block lower triangular
// input-output operator F_{s:t}.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "anisonorm/errors.hpp"
#include "anisonorm/linalg.hpp"

namespace anisonorm {

struct LdtvSystem {
  int n = 0;  ///< state dimension
  int m = 0;  ///< input dimension
  int r = 0;  ///< output dimension
  int horizon = 0;  ///< final time index N; sequences hold N+1 entries
  std::vector<MatrixXd> A, B, C, D;

  std::size_t steps() const { return static_cast<std::size_t>(horizon) + 1; }

  /// Expands a single (A, B, C, D) quadruple to a constant sequence on [0, N].
  static LdtvSystem time_invariant(const MatrixXd& a, const MatrixXd& b,
                                   const MatrixXd& c, const MatrixXd& d,
                                   int horizon) {
    LdtvSystem sys;
    sys.n = static_cast<int>(a.rows());
    sys.m = static_cast<int>(b.cols());
    sys.r = static_cast<int>(c.rows());
    sys.horizon = horizon;
    const auto len = static_cast<std::size_t>(horizon) + 1;
    sys.A.assign(len, a);
    sys.B.assign(len, b);
    sys.C.assign(len, c);
    sys.D.assign(len, d);
    return sys;
  }

  friend bool operator==(const LdtvSystem& x, const LdtvSystem& y) {
    auto same = [](const std::vector<MatrixXd>& u,
                   const std::vector<MatrixXd>& v) {
      if (u.size() != v.size()) return false;
      for (std::size_t i = 0; i < u.size(); ++i) {
        if (u[i].rows() != v[i].rows() || u[i].cols() != v[i].cols() ||
            u[i] != v[i])
          return false;
      }
      return true;
    };
    return x.n == y.n && x.m == y.m && x.r == y.r && x.horizon == y.horizon &&
           same(x.A, y.A) && same(x.B, y.B) && same(x.C, y.C) &&
           same(x.D, y.D);
  }
};

namespace detail {

inline void check_sequence(const std::vector<MatrixXd>& seq, const char* name,
                           std::size_t expected_len, Eigen::Index rows,
                           Eigen::Index cols) {
  if (seq.size() != expected_len) {
    throw DimensionError(std::string(name) + " sequence has " +
                         std::to_string(seq.size()) + " entries, expected " +
                         std::to_string(expected_len) + " (first bad index " +
                         std::to_string(std::min(seq.size(), expected_len)) +
                         ")");
  }
  for (std::size_t k = 0; k < seq.size(); ++k) {
    const auto& mat = seq[k];
    if (mat.rows() != rows || mat.cols() != cols) {
      throw DimensionError(std::string(name) + "[" + std::to_string(k) +
                           "] is " + std::to_string(mat.rows()) + "x" +
                           std::to_string(mat.cols()) + ", expected " +
                           std::to_string(rows) + "x" + std::to_string(cols));
    }
    if (!mat.allFinite()) {
      throw NonFiniteError(std::string(name) + "[" + std::to_string(k) +
                           "] contains a non-finite entry");
    }
  }
}

}  // namespace detail

/// Throws DimensionError / NonFiniteError unless every invariant holds.
inline void validate(const LdtvSystem& sys) {
  if (sys.n <= 0 || sys.m <= 0 || sys.r <= 0) {
    throw DimensionError("dimensions n, m, r must be positive (got n=" +
                         std::to_string(sys.n) + ", m=" +
                         std::to_string(sys.m) + ", r=" +
                         std::to_string(sys.r) + ")");
  }
  if (sys.horizon < 0) {
    throw DimensionError("horizon N must be nonnegative");
  }
  const std::size_t len = sys.steps();
  detail::check_sequence(sys.A, "A", len, sys.n, sys.n);
  detail::check_sequence(sys.B, "B", len, sys.n, sys.m);
  detail::check_sequence(sys.C, "C", len, sys.r, sys.n);
  detail::check_sequence(sys.D, "D", len, sys.r, sys.m);
}

/// Phi_{jk} = A_{j-1} ... A_k, identity when j == k. Requires
/// 0 <= k <= j <= N+1.
inline MatrixXd state_transition(const LdtvSystem& sys, int j, int k) {
  if (k < 0 || j > sys.horizon + 1) {
    throw DimensionError("state_transition: indices must lie in [0, N+1]");
  }
  if (j < k) {
    throw IndexOrderError("state_transition: j=" + std::to_string(j) +
                          " precedes k=" + std::to_string(k));
  }
  MatrixXd phi = MatrixXd::Identity(sys.n, sys.n);
  for (int i = k; i < j; ++i) phi = sys.A[i] * phi;
  return phi;
}

/// Dense F_{s:t}: block (j,k) maps w_k to z_j.
struct StackedOperator {
  MatrixXd matrix;
  int block_rows = 0;  ///< r
  int block_cols = 0;  ///< m
  int start = 0;       ///< s
  int end = 0;         ///< t

  /// Block for output time j and input time k (absolute indices).
  auto block(int j, int k) const {
    return matrix.block((j - start) * block_rows, (k - start) * block_cols,
                        block_rows, block_cols);
  }
};

inline StackedOperator assemble_stacked(const LdtvSystem& sys, int s, int t) {
  if (s < 0 || t > sys.horizon) {
    throw DimensionError("assemble_stacked: interval must lie in [0, N]");
  }
  if (t < s) {
    throw IndexOrderError("assemble_stacked: t=" + std::to_string(t) +
                          " precedes s=" + std::to_string(s));
  }
  const int len = t - s + 1;
  StackedOperator op;
  op.block_rows = sys.r;
  op.block_cols = sys.m;
  op.start = s;
  op.end = t;
  op.matrix = MatrixXd::Zero(sys.r * len, sys.m * len);
  for (int j = s; j <= t; ++j) {
    const int row = (j - s) * sys.r;
    op.matrix.block(row, (j - s) * sys.m, sys.r, sys.m) = sys.D[j];
    // Running product C_j Phi_{j,k+1}, extended one factor per block.
    MatrixXd c_phi = sys.C[j];
    for (int k = j - 1; k >= s; --k) {
      op.matrix.block(row, (k - s) * sys.m, sys.r, sys.m) = c_phi * sys.B[k];
      c_phi = c_phi * sys.A[k];
    }
  }
  return op;
}

struct Trajectory {
  std::vector<VectorXd> inputs;   ///< w_0 .. w_N
  std::vector<VectorXd> states;   ///< x_0 .. x_{N+1}
  std::vector<VectorXd> outputs;  ///< z_0 .. z_N
};

inline Trajectory simulate(const LdtvSystem& sys,
                           std::span<const VectorXd> inputs) {
  if (inputs.size() != sys.steps()) {
    throw DimensionError("simulate: got " + std::to_string(inputs.size()) +
                         " input vectors, expected N+1 = " +
                         std::to_string(sys.steps()));
  }
  Trajectory traj;
  traj.inputs.assign(inputs.begin(), inputs.end());
  traj.states.reserve(sys.steps() + 1);
  traj.outputs.reserve(sys.steps());
  traj.states.push_back(VectorXd::Zero(sys.n));
  for (std::size_t k = 0; k < sys.steps(); ++k) {
    const VectorXd& w = inputs[k];
    if (w.size() != sys.m) {
      throw DimensionError("simulate: input " + std::to_string(k) +
                           " has length " + std::to_string(w.size()) +
                           ", expected m = " + std::to_string(sys.m));
    }
    const VectorXd& x = traj.states.back();
    traj.outputs.push_back(sys.C[k] * x + sys.D[k] * w);
    traj.states.push_back(sys.A[k] * x + sys.B[k] * w);
  }
  return traj;
}

/// Concatenates equally sized vectors into one stacked column.
inline VectorXd stack(std::span<const VectorXd> parts) {
  Eigen::Index total = 0;
  for (const auto& p : parts) total += p.size();
  VectorXd out(total);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.segment(at, p.size()) = p;
    at += p.size();
  }
  return out;
}

}  // namespace anisonorm
