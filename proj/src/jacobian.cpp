#include "sntk/jacobian.hpp"

namespace sntk {

namespace {

void check_trajectory(const RnnModel& model, const TrajectoryBatch& traj) {
  if (traj.N() != model.N()) throw std::invalid_argument("trajectory does not match model dimension");
}

// Sensitivities of one batch entry stacked as (T*N) x m.
Matrix entry_jacobian(const RnnModel& model, const TrajectoryBatch& traj, int b) {
  const int n = model.N();
  const int T = traj.T();
  const int m = model.num_params();
  Matrix Jb = Matrix::Zero(static_cast<Eigen::Index>(T) * n, m);
  Matrix S = Matrix::Zero(n, m);
  Matrix next(n, m);
  for (int t = 0; t + 1 < T; ++t) {
    const Vector h = traj.at_time(t).col(b);
    const Vector act = h.array().tanh();
    const Matrix A = model.W * (1.0 - act.array().square()).matrix().asDiagonal();
    next.noalias() = A * S;
    for (int i = 0; i < n; ++i) {
      next.row(i).segment(weight_index(n, i, 0), n) += act.transpose();
      next(i, bias_index(n, i)) += 1.0;
    }
    S.swap(next);
    Jb.middleRows(static_cast<Eigen::Index>(t + 1) * n, n) = S;
  }
  return Jb;
}

}  // namespace

StateJacobian state_jacobian(const RnnModel& model, const Matrix& h0_batch, int T, double element_budget) {
  const int n = model.N();
  const int m = model.num_params();
  const int B = static_cast<int>(h0_batch.rows());
  const double elements = static_cast<double>(B) * T * n * m;
  if (elements > element_budget)
    throw BudgetError("state_jacobian: " + std::to_string(elements) +
                      " elements exceed the budget; use the matrix-free jvp/vjp/fisher routines");
  const TrajectoryBatch traj = simulate(model, h0_batch, T);

  StateJacobian out;
  out.B = B;
  out.T = T;
  out.N = n;
  out.m = m;
  out.J.resize(static_cast<Eigen::Index>(B) * T * n, m);
  const Eigen::Index block = static_cast<Eigen::Index>(T) * n;
  for (int b = 0; b < B; ++b) out.J.middleRows(b * block, block) = entry_jacobian(model, traj, b);
  return out;
}

Linearization::Linearization(const RnnModel& model, const TrajectoryBatch& trajectory)
    : model_(&model), B_(trajectory.B()) {
  check_trajectory(model, trajectory);
  act_.reserve(trajectory.T());
  gain_.reserve(trajectory.T());
  for (int t = 0; t < trajectory.T(); ++t) {
    act_.push_back(trajectory.at_time(t).array().tanh().matrix());
    gain_.push_back((1.0 - act_.back().array().square()).matrix());
  }
}

TrajectoryBatch jvp(const RnnModel& model, const TrajectoryBatch& trajectory, const ParamVector& v) {
  return jvp(Linearization(model, trajectory), v);
}

TrajectoryBatch jvp(const Linearization& lin, const ParamVector& v) {
  const RnnModel& model = lin.model();
  const int n = model.N();
  if (v.size() != model.num_params()) throw std::invalid_argument("jvp: parameter vector length mismatch");

  Matrix dW(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) dW(i, j) = v[weight_index(n, i, j)];
  const Vector db = v.tail(n);

  TrajectoryBatch out(lin.B(), lin.T(), n);
  for (int t = 0; t + 1 < lin.T(); ++t) {
    Matrix& next = out.at_time(t + 1);
    next.noalias() = model.W * out.at_time(t).cwiseProduct(lin.gain(t));
    next.noalias() += dW * lin.activation(t);
    next.colwise() += db;
  }
  return out;
}

ParamVector vjp(const RnnModel& model, const TrajectoryBatch& trajectory, const TrajectoryBatch& u) {
  return vjp(Linearization(model, trajectory), u);
}

ParamVector vjp(const Linearization& lin, const TrajectoryBatch& u) {
  const RnnModel& model = lin.model();
  if (u.B() != lin.B() || u.T() != lin.T() || u.N() != lin.N())
    throw std::invalid_argument("vjp: cotangent shape mismatch");
  const int n = model.N();

  Matrix gW = Matrix::Zero(n, n);
  Vector gb = Vector::Zero(n);
  Matrix adjoint = Matrix::Zero(n, lin.B());
  Matrix back(n, lin.B());
  for (int t = lin.T() - 1; t >= 1; --t) {
    adjoint += u.at_time(t);
    gW.noalias() += adjoint * lin.activation(t - 1).transpose();
    gb += adjoint.rowwise().sum();
    back.noalias() = model.W.transpose() * adjoint;
    adjoint = back.cwiseProduct(lin.gain(t - 1));
  }

  ParamVector out(model.num_params());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out[weight_index(n, i, j)] = gW(i, j);
  out.tail(n) = gb;
  return out;
}

Matrix fisher_matrix(const StateJacobian& jacobian) {
  Matrix F = Matrix::Zero(jacobian.m, jacobian.m);
  F.selfadjointView<Eigen::Lower>().rankUpdate(jacobian.J.transpose());
  return F.selfadjointView<Eigen::Lower>();
}

Matrix fisher_matrix(const RnnModel& model, const TrajectoryBatch& trajectory) {
  check_trajectory(model, trajectory);
  const int m = model.num_params();
  Matrix F = Matrix::Zero(m, m);
  for (int b = 0; b < trajectory.B(); ++b) {
    const Matrix Jb = entry_jacobian(model, trajectory, b);
    F.selfadjointView<Eigen::Lower>().rankUpdate(Jb.transpose());
  }
  return F.selfadjointView<Eigen::Lower>();
}

Matrix materialize_sntk(const StateJacobian& jacobian, double element_budget) {
  const double rows = static_cast<double>(jacobian.J.rows());
  if (rows * rows > element_budget)
    throw BudgetError("materialize_sntk: sNTK exceeds the element budget");
  return jacobian.J * jacobian.J.transpose();
}

}  // namespace sntk
