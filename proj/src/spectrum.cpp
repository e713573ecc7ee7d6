#include "sntk/spectrum.hpp"

#include <cmath>
#include <limits>

namespace sntk {

SntkSummary sntk_summary(const Matrix& fisher, const SummaryOptions& opts) {
  if (fisher.rows() != fisher.cols() || fisher.rows() < 1)
    throw std::invalid_argument("sntk_summary: Fisher must be square and non-empty");
  const Eigen::Index m = fisher.rows();
  SntkSummary s;
  s.frob_norm = fisher.norm();
  if (s.frob_norm == 0.0) {
    s.top_eigvec = ParamVector::Unit(m, 0);
    return s;
  }

  const bool dense = opts.method == EigenMethod::Dense ||
                     (opts.method == EigenMethod::Auto && m <= kDenseEigenLimit);
  if (dense) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(fisher);
    if (solver.info() != Eigen::Success) throw NumericalError("sntk_summary: eigensolver failed");
    s.top_eigval = solver.eigenvalues()[m - 1];
    s.top_eigvec = solver.eigenvectors().col(m - 1);
    canonicalize_sign(s.top_eigvec);
    s.residual = (fisher * s.top_eigvec - s.top_eigval * s.top_eigvec).norm();
  } else {
    const EigenPair p = top_eigpair(fisher, opts.power);
    s.top_eigval = p.value;
    s.top_eigvec = p.vector;
    s.converged = p.converged;
    s.residual = p.residual;
    s.iterations = p.iterations;
  }
  s.spec_norm = s.top_eigval;
  s.stable_rank = s.spec_norm > 0 ? (s.frob_norm * s.frob_norm) / (s.spec_norm * s.spec_norm) : 0.0;
  return s;
}

SntkSummary sntk_summary(const StateJacobian& jacobian, const SummaryOptions& opts) {
  return sntk_summary(fisher_matrix(jacobian), opts);
}

SntkSummary sntk_summary(const RnnModel& model, const TrajectoryBatch& trajectory, const SummaryOptions& opts) {
  return sntk_summary(fisher_matrix(model, trajectory), opts);
}

namespace {

void check_unit(const ParamVector& u, Eigen::Index m) {
  if (u.size() != m) throw std::invalid_argument("decompose: direction length mismatch");
  if (std::abs(u.norm() - 1.0) > 1e-10) throw std::invalid_argument("decompose: direction must have unit norm");
}

double top_eigenvalue(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

}  // namespace

DecompositionResult decompose(const Matrix& fisher, const ParamVector& direction) {
  check_unit(direction, fisher.rows());
  DecompositionResult r;
  r.direction = direction;
  const Vector Fu = fisher * direction;
  const double uFu = direction.dot(Fu);
  r.sntk_g_norm = uFu;
  // P F P = F - u (Fu)^T - (Fu) u^T + (u^T F u) u u^T
  Matrix projected = fisher;
  projected.noalias() -= direction * Fu.transpose();
  projected.noalias() -= Fu * direction.transpose();
  projected.noalias() += uFu * (direction * direction.transpose());
  r.residual_frob = projected.norm();
  r.spec_norm = fisher.norm() == 0.0 ? 0.0 : top_eigenvalue(fisher);
  r.dominance_ratio = r.spec_norm > 0 ? r.sntk_g_norm / r.spec_norm : 0.0;
  return r;
}

DecompositionResult decompose(const StateJacobian& jacobian, const ParamVector& direction) {
  check_unit(direction, jacobian.m);
  DecompositionResult r = decompose(fisher_matrix(jacobian), direction);
  r.sntk_g_norm = (jacobian.J * direction).squaredNorm();
  r.dominance_ratio = r.spec_norm > 0 ? r.sntk_g_norm / r.spec_norm : 0.0;
  return r;
}

DecomposedKernels materialize_decomposition(const StateJacobian& jacobian, const ParamVector& direction,
                                            double element_budget) {
  check_unit(direction, jacobian.m);
  DecomposedKernels k;
  k.full = materialize_sntk(jacobian, element_budget);
  const Vector Ju = jacobian.J * direction;
  k.bifurcation = Ju * Ju.transpose();
  const Matrix JP = jacobian.J - Ju * direction.transpose();
  k.residual = JP * JP.transpose();
  return k;
}

namespace {

LandscapePoint probe_point(const RnnModel& model, const Matrix& h0_batch, int T, const ParamVector& theta,
                           double alpha, double beta, const SummaryOptions& opts) {
  LandscapePoint p;
  p.alpha = alpha;
  p.beta = beta;
  const RnnModel shifted = RnnModel::from_params(theta, model.N(), model.readout);
  if (!theta.allFinite()) {
    p.overflow = true;
  } else {
    const TrajectoryBatch traj = simulate(shifted, h0_batch, T);
    if (!traj.all_finite()) {
      p.overflow = true;
    } else {
      const Matrix fisher = fisher_matrix(shifted, traj);
      if (!fisher.allFinite()) {
        p.overflow = true;
      } else {
        const SntkSummary s = sntk_summary(fisher, opts);
        p.spec_norm = s.spec_norm;
        p.stable_rank = s.stable_rank;
        p.overflow = !std::isfinite(s.spec_norm) || !std::isfinite(s.frob_norm);
      }
    }
  }
  if (p.overflow) {
    p.spec_norm = std::numeric_limits<double>::infinity();
    p.stable_rank = std::numeric_limits<double>::quiet_NaN();
  }
  return p;
}

}  // namespace

std::vector<LandscapePoint> landscape_sweep(const RnnModel& model, const Matrix& h0_batch, int T,
                                            const ParamVector& direction, const std::vector<double>& alpha_grid,
                                            const SummaryOptions& opts) {
  check_unit(direction, model.num_params());
  if (alpha_grid.empty()) throw std::invalid_argument("landscape_sweep: empty grid");
  const ParamVector theta = model.params();
  std::vector<LandscapePoint> out;
  out.reserve(alpha_grid.size());
  for (double a : alpha_grid) out.push_back(probe_point(model, h0_batch, T, theta + a * direction, a, 0.0, opts));
  return out;
}

std::vector<LandscapePoint> landscape_sweep_2d(const RnnModel& model, const Matrix& h0_batch, int T,
                                               const ParamVector& u, const ParamVector& w,
                                               const std::vector<double>& alpha_grid,
                                               const std::vector<double>& beta_grid,
                                               const SummaryOptions& opts) {
  check_unit(u, model.num_params());
  check_unit(w, model.num_params());
  if (alpha_grid.empty() || beta_grid.empty()) throw std::invalid_argument("landscape_sweep_2d: empty grid");
  const ParamVector theta = model.params();
  std::vector<LandscapePoint> out;
  out.reserve(alpha_grid.size() * beta_grid.size());
  for (double a : alpha_grid)
    for (double b : beta_grid) out.push_back(probe_point(model, h0_batch, T, theta + a * u + b * w, a, b, opts));
  return out;
}

std::pair<ParamVector, ParamVector> top_two_directions(const Matrix& fisher, const SummaryOptions& opts) {
  const Eigen::Index m = fisher.rows();
  if (m < 2) throw std::invalid_argument("top_two_directions: need at least two parameters");
  const bool dense = opts.method == EigenMethod::Dense ||
                     (opts.method == EigenMethod::Auto && m <= kDenseEigenLimit);
  ParamVector u, w;
  if (dense) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(fisher);
    u = solver.eigenvectors().col(m - 1);
    w = solver.eigenvectors().col(m - 2);
  } else {
    u = top_eigpair(fisher, opts.power).vector;
    PowerIterationOptions second = opts.power;
    second.deflate = {u};
    w = top_eigpair(fisher, second).vector;
  }
  canonicalize_sign(u);
  canonicalize_sign(w);
  return {u, w};
}

}  // namespace sntk
