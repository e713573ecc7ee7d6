#include "sntk/rnn.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

namespace sntk {

RnnModel::RnnModel(Matrix w, Vector bias, ReadoutIndices ro)
    : W(std::move(w)), b(std::move(bias)), readout(ro) {
  validate();
}

void RnnModel::validate() const {
  const int n = N();
  if (n < 1 || W.rows() != n || W.cols() != n)
    throw std::invalid_argument("RnnModel: W must be N x N with N = b.size() >= 1");
  for (int idx : readout) {
    if (idx < 0 || idx >= n) throw std::invalid_argument("RnnModel: readout index out of range");
  }
  if (readout[0] == readout[1]) throw std::invalid_argument("RnnModel: readout indices must differ");
}

ParamVector RnnModel::params() const {
  const int n = N();
  ParamVector theta(num_params());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) theta[weight_index(n, i, j)] = W(i, j);
  theta.tail(n) = b;
  return theta;
}

void RnnModel::set_params(const ParamVector& theta) {
  const int n = N();
  if (theta.size() != num_params()) throw std::invalid_argument("set_params: length mismatch");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) W(i, j) = theta[weight_index(n, i, j)];
  b = theta.tail(n);
}

RnnModel RnnModel::from_params(const ParamVector& theta, int N, ReadoutIndices ro) {
  RnnModel m(Matrix::Zero(N, N), Vector::Zero(N), ro);
  m.set_params(theta);
  return m;
}

TrajectoryBatch::TrajectoryBatch(int B, int T, int N)
    : B_(B), T_(T), N_(N), steps_(T, Matrix::Zero(N, B)) {
  if (B < 1 || T < 1 || N < 1) throw std::invalid_argument("TrajectoryBatch: empty shape");
}

Vector TrajectoryBatch::flatten() const {
  Vector flat(static_cast<Eigen::Index>(B_) * T_ * N_);
  Eigen::Index k = 0;
  for (int b = 0; b < B_; ++b)
    for (int t = 0; t < T_; ++t)
      for (int n = 0; n < N_; ++n) flat[k++] = steps_[t](n, b);
  return flat;
}

TrajectoryBatch TrajectoryBatch::unflatten(const Vector& flat, int B, int T, int N) {
  if (flat.size() != static_cast<Eigen::Index>(B) * T * N)
    throw std::invalid_argument("TrajectoryBatch::unflatten: length mismatch");
  TrajectoryBatch out(B, T, N);
  Eigen::Index k = 0;
  for (int b = 0; b < B; ++b)
    for (int t = 0; t < T; ++t)
      for (int n = 0; n < N; ++n) out.steps_[t](n, b) = flat[k++];
  return out;
}

bool TrajectoryBatch::all_finite() const {
  return std::all_of(steps_.begin(), steps_.end(), [](const Matrix& m) { return m.allFinite(); });
}

RnnModel init_xavier(int N, std::uint64_t seed) {
  if (N < 2) throw std::invalid_argument("init_xavier: N must be >= 2");
  const double bound = std::sqrt(6.0 / (N + N));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix W(N, N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) W(i, j) = dist(rng);
  Vector b(N);
  for (int i = 0; i < N; ++i) b[i] = dist(rng);
  return RnnModel(std::move(W), std::move(b));
}

RnnModel plant_fixed_points(const RnnModel& base, const FixedPointSpec& spec) {
  base.validate();
  const Matrix& X = spec.points;
  const int n = base.N();
  const auto k = X.cols();
  if (k < 1 || X.rows() != n) throw std::invalid_argument("plant_fixed_points: points must be N x k, k >= 1");
  if (!X.allFinite()) throw std::invalid_argument("plant_fixed_points: non-finite point");

  const double scale = std::max(1.0, X.cwiseAbs().maxCoeff());
  const double coincide_tol = 1e-12 * scale;
  for (Eigen::Index i = 0; i < k; ++i) {
    if (X.col(i).norm() <= coincide_tol)
      throw std::invalid_argument("plant_fixed_points: point coincides with its mirror");
    for (Eigen::Index j = i + 1; j < k; ++j) {
      if ((X.col(i) - X.col(j)).norm() <= coincide_tol || (X.col(i) + X.col(j)).norm() <= coincide_tol)
        throw std::invalid_argument("plant_fixed_points: points (or mirrors) coincide");
    }
  }

  const Matrix Th = X.array().tanh().matrix();
  for (Eigen::Index i = 0; i < k; ++i) {
    if (Th.col(i).squaredNorm() == 0.0)
      throw std::invalid_argument("plant_fixed_points: tanh(x) is zero");
  }
  Eigen::JacobiSVD<Matrix> svd(Th);
  const auto& sv = svd.singularValues();
  if (k > n || sv[k - 1] <= 1e-10 * sv[0])
    throw std::invalid_argument("plant_fixed_points: tanh images are linearly dependent");

  // Th^+ = R^{-1} Q^T from a thin QR.
  Eigen::HouseholderQR<Matrix> qr(Th);
  const Matrix Q = qr.householderQ() * Matrix::Identity(n, k);
  const Matrix R = qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  const Matrix pinv = R.triangularView<Eigen::Upper>().solve(Q.transpose());

  // W_base (I - Th Th^+) + X Th^+
  Matrix W = base.W + (X - base.W * Th) * pinv;
  return RnnModel(std::move(W), Vector::Zero(n), base.readout);
}

TrajectoryBatch simulate(const RnnModel& model, const Matrix& h0_batch, int T) {
  const int n = model.N();
  if (h0_batch.cols() != n || h0_batch.rows() < 1)
    throw std::invalid_argument("simulate: h0_batch must be B x N");
  if (T < 1) throw std::invalid_argument("simulate: T must be >= 1");
  if (!h0_batch.allFinite() || !model.W.allFinite() || !model.b.allFinite())
    throw std::invalid_argument("simulate: non-finite input");

  const int B = static_cast<int>(h0_batch.rows());
  TrajectoryBatch traj(B, T, n);
  traj.at_time(0) = h0_batch.transpose();
  for (int t = 0; t + 1 < T; ++t) {
    Matrix& next = traj.at_time(t + 1);
    next.noalias() = model.W * traj.at_time(t).array().tanh().matrix();
    next.colwise() += model.b;
  }
  return traj;
}

namespace {

void check_same_shape(const TrajectoryBatch& a, const TrajectoryBatch& b) {
  if (a.B() != b.B() || a.T() != b.T() || a.N() != b.N())
    throw std::invalid_argument("trajectory shape mismatch");
}

std::vector<int> loss_coordinates(int N, ReadoutIndices readout, LossMode mode) {
  if (mode == LossMode::FullState) {
    std::vector<int> all(N);
    for (int i = 0; i < N; ++i) all[i] = i;
    return all;
  }
  for (int idx : readout)
    if (idx < 0 || idx >= N) throw std::invalid_argument("readout index out of range");
  return {readout[0], readout[1]};
}

}  // namespace

double readout_loss(const TrajectoryBatch& student, const TrajectoryBatch& teacher,
                    ReadoutIndices readout, LossMode mode) {
  check_same_shape(student, teacher);
  const auto coords = loss_coordinates(student.N(), readout, mode);
  if (student.T() < 2) return 0.0;
  double sum = 0.0;
  for (int t = 1; t < student.T(); ++t) {
    const Matrix& s = student.at_time(t);
    const Matrix& r = teacher.at_time(t);
    for (int idx : coords) sum += (s.row(idx) - r.row(idx)).squaredNorm();
  }
  const double count = static_cast<double>(student.B()) * (student.T() - 1) * coords.size();
  return sum / count;
}

TrajectoryBatch loss_state_gradient(const TrajectoryBatch& student, const TrajectoryBatch& teacher,
                                    ReadoutIndices readout, LossMode mode) {
  check_same_shape(student, teacher);
  const auto coords = loss_coordinates(student.N(), readout, mode);
  TrajectoryBatch grad(student.B(), student.T(), student.N());
  if (student.T() < 2) return grad;
  const double scale = 2.0 / (static_cast<double>(student.B()) * (student.T() - 1) * coords.size());
  for (int t = 1; t < student.T(); ++t)
    for (int idx : coords)
      grad.at_time(t).row(idx) = scale * (student.at_time(t).row(idx) - teacher.at_time(t).row(idx));
  return grad;
}

ParamVector bptt_gradient(const RnnModel& student, const TrajectoryBatch& teacher_traj,
                          const Matrix& h0_batch, int T, LossMode mode) {
  return bptt_gradient(student, simulate(student, h0_batch, T), teacher_traj, mode);
}

ParamVector bptt_gradient(const RnnModel& student, const TrajectoryBatch& student_traj,
                          const TrajectoryBatch& teacher_traj, LossMode mode) {
  check_same_shape(student_traj, teacher_traj);
  const int n = student.N();
  const int T = student_traj.T();
  if (student_traj.N() != n) throw std::invalid_argument("bptt_gradient: state dimension mismatch");

  const auto coords = loss_coordinates(n, student.readout, mode);
  const double scale = T < 2 ? 0.0
                             : 2.0 / (static_cast<double>(student_traj.B()) * (T - 1) * coords.size());

  Matrix gW = Matrix::Zero(n, n);
  Vector gb = Vector::Zero(n);
  Matrix adjoint = Matrix::Zero(n, student_traj.B());
  for (int t = T - 1; t >= 1; --t) {
    // adjoint <- dL/dh_t + (dh_{t+1}/dh_t)^T adjoint
    for (int idx : coords)
      adjoint.row(idx) += scale * (student_traj.at_time(t).row(idx) - teacher_traj.at_time(t).row(idx));
    const Matrix act = student_traj.at_time(t - 1).array().tanh().matrix();
    gW.noalias() += adjoint * act.transpose();
    gb += adjoint.rowwise().sum();
    if (t > 1) {
      const Matrix back = student.W.transpose() * adjoint;
      adjoint = back.cwiseProduct((1.0 - act.array().square()).matrix());
    }
  }

  ParamVector grad(student.num_params());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) grad[weight_index(n, i, j)] = gW(i, j);
  grad.tail(n) = gb;
  if (!grad.allFinite()) throw NumericalError("bptt_gradient: non-finite gradient");
  return grad;
}

double spectral_radius(const RnnModel& model) {
  return eigen_moduli(model, 1).front();
}

std::vector<double> eigen_moduli(const RnnModel& model, int k) {
  const int n = model.N();
  if (k < 1 || k > n) throw std::invalid_argument("eigen_moduli: k must be in [1, N]");
  Eigen::EigenSolver<Matrix> solver(model.W, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) throw NumericalError("eigen_moduli: eigensolver failed");
  std::vector<double> moduli(n);
  for (int i = 0; i < n; ++i) moduli[i] = std::abs(solver.eigenvalues()[i]);
  std::sort(moduli.begin(), moduli.end(), std::greater<>());
  moduli.resize(k);
  return moduli;
}

}  // namespace sntk
