#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sntk {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Flat parameters: row-major W followed by b, length N^2 + N.
using ParamVector = Eigen::VectorXd;

/// Raised when a trajectory or gradient leaves the finite range.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

using ReadoutIndices = std::array<int, 2>;

/// Autonomous recurrent model h_{t+1} = W tanh(h_t) + b.
struct RnnModel {
  Matrix W;
  Vector b;
  ReadoutIndices readout{0, 1};

  RnnModel() = default;
  RnnModel(Matrix w, Vector bias, ReadoutIndices ro = {0, 1});

  int N() const { return static_cast<int>(b.size()); }
  int num_params() const { return N() * N() + N(); }

  ParamVector params() const;
  void set_params(const ParamVector& theta);
  static RnnModel from_params(const ParamVector& theta, int N, ReadoutIndices ro = {0, 1});

  /// Throws std::invalid_argument when shapes or readout indices are inconsistent.
  void validate() const;
};

inline int param_count(int N) { return N * N + N; }
inline int weight_index(int N, int row, int col) { return row * N + col; }
inline int bias_index(int N, int row) { return N * N + row; }

/// B trajectories of length T.  Stored per time step as N x B blocks so one
/// step of the whole batch is a single matrix product.
class TrajectoryBatch {
 public:
  TrajectoryBatch() = default;
  TrajectoryBatch(int B, int T, int N);

  int B() const { return B_; }
  int T() const { return T_; }
  int N() const { return N_; }

  Matrix& at_time(int t) { return steps_[t]; }
  const Matrix& at_time(int t) const { return steps_[t]; }

  double operator()(int b, int t, int n) const { return steps_[t](n, b); }
  double& operator()(int b, int t, int n) { return steps_[t](n, b); }

  /// Flattened in (b, t, n) lexicographic order.
  Vector flatten() const;
  static TrajectoryBatch unflatten(const Vector& flat, int B, int T, int N);

  bool all_finite() const;

 private:
  int B_ = 0, T_ = 0, N_ = 0;
  std::vector<Matrix> steps_;
};

/// Uniform Xavier initialisation of W and b on [-sqrt(6/(2N)), sqrt(6/(2N))].
RnnModel init_xavier(int N, std::uint64_t seed);

/// Desired fixed points, one column per point.  Each -x is implied.
struct FixedPointSpec {
  Matrix points;  // N x k
};

/// Returns a model with b = 0 and W tanh(x_i) = x_i for every column of the
/// spec, acting as the base W on the orthogonal complement of span{tanh(x_i)}.
RnnModel plant_fixed_points(const RnnModel& base, const FixedPointSpec& spec);

/// h0_batch is B x N, one initial condition per row.
TrajectoryBatch simulate(const RnnModel& model, const Matrix& h0_batch, int T);

enum class LossMode { Readout, FullState };

/// Mean squared error over batch, t = 1..T-1 and the selected coordinates.
double readout_loss(const TrajectoryBatch& student, const TrajectoryBatch& teacher,
                    ReadoutIndices readout, LossMode mode = LossMode::Readout);

/// dLoss/dstate for every (b, t, n), zero outside the loss support.
TrajectoryBatch loss_state_gradient(const TrajectoryBatch& student, const TrajectoryBatch& teacher,
                                    ReadoutIndices readout, LossMode mode = LossMode::Readout);

/// Exact gradient of readout_loss by backpropagation through time.
ParamVector bptt_gradient(const RnnModel& student, const TrajectoryBatch& teacher_traj,
                          const Matrix& h0_batch, int T, LossMode mode = LossMode::Readout);

/// Same as above with the student trajectory already simulated.
ParamVector bptt_gradient(const RnnModel& student, const TrajectoryBatch& student_traj,
                          const TrajectoryBatch& teacher_traj, LossMode mode = LossMode::Readout);

double spectral_radius(const RnnModel& model);

/// The k largest eigenvalue moduli of W, descending.
std::vector<double> eigen_moduli(const RnnModel& model, int k);

}  // namespace sntk
