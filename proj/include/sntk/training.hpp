#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "sntk/power_iteration.hpp"
#include "sntk/rnn.hpp"

namespace sntk {

enum class Optimizer { SGD, RankOneNaturalGrad };

Optimizer parse_optimizer(const std::string& name);
std::string optimizer_name(Optimizer opt);

struct TrainConfig {
  int N = 64;
  int B = 256;
  int T = 25;
  double learning_rate = 5e-3;
  int iterations = 35000;
  Optimizer optimizer = Optimizer::SGD;
  double natgrad_epsilon = 1e-4;
  int natgrad_power_iters = 10;
  // Relative residual at which the warm-started power iteration stops early.
  double natgrad_power_tol = 1e-3;
  int metrics_every = 50;
  std::uint64_t seed = 0;
  double ic_bounds = 1.0;
  LossMode loss_mode = LossMode::Readout;

  // Reuse one batch of initial conditions for every iteration.
  bool fixed_dataset = false;
  // Evaluate recorded loss and sNTK metrics on a fixed probe batch instead of
  // the current training batch.
  bool probe_batch = false;
  // Eigenvalue moduli of W recorded with every metrics row (0 = off).
  int track_eigs = 0;

  // Files are only written when out_dir is non-empty.
  std::filesystem::path out_dir;
  int checkpoint_every = 0;  // 0 = no periodic checkpoints
  bool checkpoint_on_crossing = true;

  double divergence_loss = 1e10;

  void validate() const;
};

struct MetricsRecord {
  int iteration = 0;
  double loss = 0.0;
  double stable_rank = 0.0;
  double spec_norm = 0.0;
  double spectral_radius = 0.0;
  double step_norm = 0.0;
  double optimizer_mode_eigval = 0.0;  // 0 under SGD
  std::vector<double> eig_moduli;      // filled when track_eigs > 0
};

/// theta <- theta - lr * gradient.
RnnModel sgd_step(const RnnModel& model, const ParamVector& gradient, double lr);

/// g + (1/(lambda + eps) - 1) (v^T g) v: plain gradient off the mode, rescaled
/// by the inverse curvature along it.
ParamVector natgrad_direction(const ParamVector& gradient, double eigval, const ParamVector& eigvec, double eps);

struct NatGradStep {
  RnnModel model;
  double eigval = 0.0;
  ParamVector eigvec;
  bool fallback = false;  // zero Fisher, plain SGD applied
};

/// Rank-one natural gradient step.  The top Fisher eigenpair along the
/// student trajectory comes from matrix-free power iteration (jvp then vjp).
NatGradStep natgrad_step(const RnnModel& model, const ParamVector& gradient, double lr,
                         const TrajectoryBatch& trajectory, double eps, const PowerIterationOptions& power);

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::vector<MetricsRecord> records)
      : std::runtime_error(what), records_(std::move(records)) {}
  const std::vector<MetricsRecord>& records() const { return records_; }

 private:
  std::vector<MetricsRecord> records_;
};

struct TrainResult {
  RnnModel model;
  std::vector<MetricsRecord> records;
  std::vector<std::filesystem::path> checkpoints;
  std::vector<int> crossing_checkpoints;  // iterations saved on a rho crossing
};

/// Fits the student to the teacher's trajectories.  Each iteration draws a
/// fresh batch of initial conditions unless fixed_dataset is set.  Throws
/// DivergenceError when the loss exceeds divergence_loss or turns non-finite.
TrainResult train(const TrainConfig& config, const RnnModel& student, const RnnModel& teacher);

/// Iterations where spectral_radius crosses 1 from below, located by linear
/// interpolation between consecutive records and rounded up.
std::vector<int> detect_bifurcation(const std::vector<MetricsRecord>& metrics);

/// Uniform initial conditions on [-bound, bound], B x N.
Matrix sample_initial_conditions(std::mt19937_64& rng, int B, int N, double bound);

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRecord>& records, int track_eigs = 0);
void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRecord>& records,
                       int track_eigs = 0);

}  // namespace sntk
