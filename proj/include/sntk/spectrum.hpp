#pragma once

#include <vector>

#include "sntk/jacobian.hpp"
#include "sntk/power_iteration.hpp"

namespace sntk {

/// Spectral summary of the sNTK, read off the Fisher (same nonzero spectrum).
struct SntkSummary {
  double frob_norm = 0.0;
  double spec_norm = 0.0;
  double stable_rank = 0.0;  // frob^2 / spec^2, 0 for the zero operator
  double top_eigval = 0.0;
  ParamVector top_eigvec;
  bool converged = true;
  double residual = 0.0;
  int iterations = 0;
};

enum class EigenMethod {
  Auto,   // dense for m <= kDenseEigenLimit, power iteration above
  Dense,  // self-adjoint eigensolver on the Fisher
  Power,
};

inline constexpr int kDenseEigenLimit = 1024;

struct SummaryOptions {
  EigenMethod method = EigenMethod::Auto;
  PowerIterationOptions power;
};

SntkSummary sntk_summary(const Matrix& fisher, const SummaryOptions& opts = {});
SntkSummary sntk_summary(const StateJacobian& jacobian, const SummaryOptions& opts = {});
SntkSummary sntk_summary(const RnnModel& model, const TrajectoryBatch& trajectory,
                         const SummaryOptions& opts = {});

/// Splitting of the sNTK along a unit parameter direction u:
///   sNTK_g = (J u)(J u)^T,  sNTK_R = J (I - u u^T) J^T.
struct DecompositionResult {
  ParamVector direction;
  double sntk_g_norm = 0.0;    // ||J u||^2
  double residual_frob = 0.0;  // ||sNTK_R||_F
  double spec_norm = 0.0;      // ||sNTK||_2
  double dominance_ratio = 0.0;
};

/// Works from the Fisher: ||J u||^2 = u^T F u and ||sNTK_R||_F = ||P F P||_F
/// with P = I - u u^T.  Throws std::invalid_argument for a non-unit direction.
DecompositionResult decompose(const Matrix& fisher, const ParamVector& direction);
DecompositionResult decompose(const StateJacobian& jacobian, const ParamVector& direction);

/// The three kernels, materialized (small instances only).
struct DecomposedKernels {
  Matrix full;
  Matrix bifurcation;
  Matrix residual;
};
DecomposedKernels materialize_decomposition(const StateJacobian& jacobian, const ParamVector& direction,
                                            double element_budget = kDefaultElementBudget);

struct LandscapePoint {
  double alpha = 0.0;
  double beta = 0.0;
  double spec_norm = 0.0;
  double stable_rank = 0.0;
  bool overflow = false;
};

/// sntk_summary at theta + alpha u for every alpha, re-simulating from h0_batch.
std::vector<LandscapePoint> landscape_sweep(const RnnModel& model, const Matrix& h0_batch, int T,
                                            const ParamVector& direction, const std::vector<double>& alpha_grid,
                                            const SummaryOptions& opts = {});

/// Two-direction variant over theta + alpha u + beta w, alpha-major order.
std::vector<LandscapePoint> landscape_sweep_2d(const RnnModel& model, const Matrix& h0_batch, int T,
                                               const ParamVector& u, const ParamVector& w,
                                               const std::vector<double>& alpha_grid,
                                               const std::vector<double>& beta_grid,
                                               const SummaryOptions& opts = {});

/// Top two Fisher eigenvectors (the second by deflation), for 2-D sweeps.
std::pair<ParamVector, ParamVector> top_two_directions(const Matrix& fisher, const SummaryOptions& opts = {});

}  // namespace sntk
