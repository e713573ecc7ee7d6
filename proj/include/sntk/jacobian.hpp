#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "sntk/rnn.hpp"

namespace sntk {

/// Default cap on materialized matrices (elements).
inline constexpr double kDefaultElementBudget = 1e8;

class BudgetError : public std::runtime_error {
 public:
  explicit BudgetError(const std::string& what) : std::runtime_error(what) {}
};

/// d(states)/d(params) over a batch.  Row (b, t, n) sits at (b*T + t)*N + n,
/// column k is ParamVector entry k.  The sNTK is J J^T, the Fisher J^T J.
struct StateJacobian {
  Matrix J;
  int B = 0, T = 0, N = 0, m = 0;

  Eigen::Index row(int b, int t, int n) const {
    return (static_cast<Eigen::Index>(b) * T + t) * N + n;
  }
};

/// Forward sensitivities S_{t+1} = W diag(1 - tanh^2 h_t) S_t + d_theta f(h_t),
/// S_0 = 0.  Throws BudgetError when B*T*N*m exceeds the budget.
StateJacobian state_jacobian(const RnnModel& model, const Matrix& h0_batch, int T,
                             double element_budget = kDefaultElementBudget);

/// tanh(h_t) and 1 - tanh^2(h_t) along a trajectory, shared by repeated
/// jvp/vjp products (power iteration).
class Linearization {
 public:
  Linearization(const RnnModel& model, const TrajectoryBatch& trajectory);

  const RnnModel& model() const { return *model_; }
  int B() const { return B_; }
  int T() const { return static_cast<int>(act_.size()); }
  int N() const { return model_->N(); }
  const Matrix& activation(int t) const { return act_[t]; }
  const Matrix& gain(int t) const { return gain_[t]; }

 private:
  const RnnModel* model_;
  int B_ = 0;
  std::vector<Matrix> act_;
  std::vector<Matrix> gain_;
};

/// Matrix-free J v along the given trajectory.
TrajectoryBatch jvp(const RnnModel& model, const TrajectoryBatch& trajectory, const ParamVector& v);
TrajectoryBatch jvp(const Linearization& lin, const ParamVector& v);

/// Matrix-free J^T u by reverse accumulation.
ParamVector vjp(const RnnModel& model, const TrajectoryBatch& trajectory, const TrajectoryBatch& u);
ParamVector vjp(const Linearization& lin, const TrajectoryBatch& u);

/// J^T J from a materialized Jacobian.
Matrix fisher_matrix(const StateJacobian& jacobian);

/// J^T J accumulated one batch entry at a time (batch-index order), so the
/// full Jacobian is never held in memory.
Matrix fisher_matrix(const RnnModel& model, const TrajectoryBatch& trajectory);

/// J J^T, subject to the element budget.
Matrix materialize_sntk(const StateJacobian& jacobian, double element_budget = kDefaultElementBudget);

}  // namespace sntk
