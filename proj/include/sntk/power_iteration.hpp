#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace sntk {

/// y = A x for a symmetric positive semidefinite A.
using LinearOperator = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct PowerIterationOptions {
  int max_iters = 100;
  double tol = 1e-6;
  std::uint64_t seed = 0;
  /// Used as the starting vector when non-empty; otherwise a seeded Gaussian.
  Eigen::VectorXd warm_start;
  /// Orthonormal vectors projected out of every iterate (deflation).
  std::vector<Eigen::VectorXd> deflate;
};

struct EigenPair {
  double value = 0.0;
  Eigen::VectorXd vector;
  int iterations = 0;
  double residual = 0.0;  // ||A v - value v||
  bool converged = false;
  bool degenerate = false;  // operator annihilated the iterate
};

/// Power iteration.  Stops once ||A v - lambda v|| <= tol * lambda or after
/// max_iters products; `converged` records which.  The returned vector has
/// unit norm and its first non-negligible component positive.
EigenPair top_eigpair(const LinearOperator& op, Eigen::Index dim, const PowerIterationOptions& opts = {});
EigenPair top_eigpair(const Eigen::MatrixXd& A, const PowerIterationOptions& opts = {});

/// Flips v so that its first non-negligible component is positive.
void canonicalize_sign(Eigen::VectorXd& v);

}  // namespace sntk
