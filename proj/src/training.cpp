#include "sntk/training.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "sntk/checkpoint.hpp"
#include "sntk/jacobian.hpp"
#include "sntk/spectrum.hpp"

namespace sntk {

Optimizer parse_optimizer(const std::string& name) {
  if (name == "sgd") return Optimizer::SGD;
  if (name == "natgrad") return Optimizer::RankOneNaturalGrad;
  throw std::invalid_argument("unknown optimizer '" + name + "' (expected sgd or natgrad)");
}

std::string optimizer_name(Optimizer opt) { return opt == Optimizer::SGD ? "sgd" : "natgrad"; }

void TrainConfig::validate() const {
  if (N < 2) throw std::invalid_argument("N must be >= 2");
  if (B < 1 || T < 2) throw std::invalid_argument("B must be >= 1 and T >= 2");
  if (iterations < 0) throw std::invalid_argument("iterations must be >= 0");
  if (!(learning_rate >= 0) || !std::isfinite(learning_rate * iterations))
    throw std::invalid_argument("learning_rate must be finite and >= 0");
  if (!(natgrad_epsilon >= 0)) throw std::invalid_argument("natgrad_epsilon must be >= 0");
  if (natgrad_power_iters < 1) throw std::invalid_argument("natgrad_power_iters must be >= 1");
  if (!(natgrad_power_tol > 0)) throw std::invalid_argument("natgrad_power_tol must be > 0");
  if (metrics_every < 1) throw std::invalid_argument("metrics_every must be >= 1");
  if (!(ic_bounds > 0)) throw std::invalid_argument("ic_bounds must be > 0");
  if (track_eigs < 0 || track_eigs > N) throw std::invalid_argument("track_eigs must be in [0, N]");
  if (checkpoint_every < 0) throw std::invalid_argument("checkpoint_every must be >= 0");
}

RnnModel sgd_step(const RnnModel& model, const ParamVector& gradient, double lr) {
  if (!gradient.allFinite()) throw NumericalError("sgd_step: non-finite gradient");
  if (gradient.size() != model.num_params()) throw std::invalid_argument("sgd_step: gradient length mismatch");
  return RnnModel::from_params(model.params() - lr * gradient, model.N(), model.readout);
}

ParamVector natgrad_direction(const ParamVector& gradient, double eigval, const ParamVector& eigvec, double eps) {
  const double rescale = 1.0 / (eigval + eps) - 1.0;
  return gradient + (rescale * eigvec.dot(gradient)) * eigvec;
}

NatGradStep natgrad_step(const RnnModel& model, const ParamVector& gradient, double lr,
                         const TrajectoryBatch& trajectory, double eps, const PowerIterationOptions& power) {
  if (!gradient.allFinite()) throw NumericalError("natgrad_step: non-finite gradient");
  const Linearization lin(model, trajectory);
  const LinearOperator fisher = [&lin](const Vector& v) -> Vector { return vjp(lin, jvp(lin, v)); };
  const EigenPair pair = top_eigpair(fisher, model.num_params(), power);

  NatGradStep out;
  out.eigval = pair.value;
  out.eigvec = pair.vector;
  if (pair.degenerate || !(pair.value > 0) || !(pair.value + eps > 0)) {
    out.fallback = true;
    out.model = sgd_step(model, gradient, lr);
    return out;
  }
  const ParamVector dir = natgrad_direction(gradient, pair.value, pair.vector, eps);
  out.model = RnnModel::from_params(model.params() - lr * dir, model.N(), model.readout);
  return out;
}

Matrix sample_initial_conditions(std::mt19937_64& rng, int B, int N, double bound) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix h0(B, N);
  for (int b = 0; b < B; ++b)
    for (int n = 0; n < N; ++n) h0(b, n) = dist(rng);
  return h0;
}

namespace {

std::filesystem::path checkpoint_path(const std::filesystem::path& dir, int iteration) {
  return dir / ("ckpt_" + std::to_string(iteration) + ".rnn");
}

}  // namespace

TrainResult train(const TrainConfig& config, const RnnModel& student, const RnnModel& teacher) {
  config.validate();
  student.validate();
  teacher.validate();
  if (student.N() != config.N || teacher.N() != config.N)
    throw std::invalid_argument("train: student/teacher size differs from config N");
  if (student.readout != teacher.readout)
    throw std::invalid_argument("train: student and teacher readouts differ");

  const bool write_files = !config.out_dir.empty();
  if (write_files) std::filesystem::create_directories(config.out_dir);

  TrainResult result;
  result.model = student;
  RnnModel& model = result.model;

  std::mt19937_64 batch_rng(config.seed);
  Matrix h0 = sample_initial_conditions(batch_rng, config.B, config.N, config.ic_bounds);
  Matrix probe_h0;
  if (config.probe_batch) {
    std::mt19937_64 probe_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    probe_h0 = sample_initial_conditions(probe_rng, config.B, config.N, config.ic_bounds);
  }

  PowerIterationOptions power;
  power.max_iters = config.natgrad_power_iters;
  power.tol = config.natgrad_power_tol;
  power.seed = config.seed;
  ParamVector mode_vec;

  auto save = [&](int iteration, const RnnModel& m) {
    if (!write_files) return;
    const auto path = checkpoint_path(config.out_dir, iteration);
    save_checkpoint(path, m);
    result.checkpoints.push_back(path);
  };

  for (int it = 0; it < config.iterations; ++it) {
    if (it > 0 && !config.fixed_dataset)
      h0 = sample_initial_conditions(batch_rng, config.B, config.N, config.ic_bounds);

    const TrajectoryBatch teacher_traj = simulate(teacher, h0, config.T);
    const TrajectoryBatch student_traj = simulate(model, h0, config.T);
    const double loss = student_traj.all_finite()
                            ? readout_loss(student_traj, teacher_traj, model.readout, config.loss_mode)
                            : std::numeric_limits<double>::infinity();
    if (!std::isfinite(loss) || loss > config.divergence_loss) {
      std::ostringstream msg;
      msg << "training diverged at iteration " << it << " (loss " << loss << ")";
      save(it, model);
      throw DivergenceError(msg.str(), std::move(result.records));
    }
    ParamVector grad = bptt_gradient(model, student_traj, teacher_traj, config.loss_mode);

    const bool record = it % config.metrics_every == 0;
    MetricsRecord rec;
    if (record) {
      rec.iteration = it;
      rec.loss = loss;
      SntkSummary summary;
      if (config.probe_batch) {
        const TrajectoryBatch probe_student = simulate(model, probe_h0, config.T);
        rec.loss = readout_loss(probe_student, simulate(teacher, probe_h0, config.T), model.readout,
                                config.loss_mode);
        summary = sntk_summary(model, probe_student);
      } else {
        summary = sntk_summary(model, student_traj);
      }
      rec.stable_rank = summary.stable_rank;
      rec.spec_norm = summary.spec_norm;
      if (config.track_eigs > 0) {
        rec.eig_moduli = eigen_moduli(model, config.track_eigs);
        rec.spectral_radius = rec.eig_moduli.front();
      } else {
        rec.spectral_radius = spectral_radius(model);
      }
      if (config.checkpoint_every > 0 && it % config.checkpoint_every == 0) save(it, model);
      if (config.checkpoint_on_crossing && !result.records.empty() &&
          result.records.back().spectral_radius < 1.0 && rec.spectral_radius >= 1.0) {
        save(it, model);
        result.crossing_checkpoints.push_back(it);
      }
    }

    const ParamVector before = model.params();
    if (config.optimizer == Optimizer::SGD) {
      model = sgd_step(model, grad, config.learning_rate);
    } else {
      if (mode_vec.size() == model.num_params()) power.warm_start = mode_vec;
      NatGradStep step = natgrad_step(model, grad, config.learning_rate, student_traj, config.natgrad_epsilon, power);
      if (!step.fallback) {
        // Keep the mode's sign continuous across iterations.
        if (mode_vec.size() == step.eigvec.size() && mode_vec.dot(step.eigvec) < 0) step.eigvec = -step.eigvec;
        mode_vec = step.eigvec;
      }
      if (record) rec.optimizer_mode_eigval = step.fallback ? 0.0 : step.eigval;
      model = std::move(step.model);
    }
    if (record) {
      rec.step_norm = (model.params() - before).norm();
      result.records.push_back(std::move(rec));
    }
  }
  save(config.iterations, model);
  return result;
}

std::vector<int> detect_bifurcation(const std::vector<MetricsRecord>& metrics) {
  std::vector<int> out;
  for (std::size_t k = 1; k < metrics.size(); ++k) {
    const auto& a = metrics[k - 1];
    const auto& b = metrics[k];
    if (a.spectral_radius < 1.0 && b.spectral_radius >= 1.0) {
      const double frac = (1.0 - a.spectral_radius) / (b.spectral_radius - a.spectral_radius);
      const double at = a.iteration + frac * (b.iteration - a.iteration);
      int it = static_cast<int>(std::ceil(at));
      if (it <= a.iteration) it = a.iteration + 1;
      if (it > b.iteration) it = b.iteration;
      out.push_back(it);
    }
  }
  return out;
}

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRecord>& records, int track_eigs) {
  os << "iteration,loss,stable_rank,spec_norm,spectral_radius,step_norm,optimizer_mode_eigval";
  for (int k = 1; k <= track_eigs; ++k) os << ",student_eig" << k;
  os << "\n";
  for (const auto& r : records) {
    os << r.iteration << ',' << format_17g(r.loss) << ',' << format_17g(r.stable_rank) << ','
       << format_17g(r.spec_norm) << ',' << format_17g(r.spectral_radius) << ',' << format_17g(r.step_norm)
       << ',' << format_17g(r.optimizer_mode_eigval);
    for (int k = 0; k < track_eigs; ++k)
      os << ',' << format_17g(k < static_cast<int>(r.eig_moduli.size()) ? r.eig_moduli[k] : 0.0);
    os << "\n";
  }
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRecord>& records,
                       int track_eigs) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  write_metrics_csv(os, records, track_eigs);
}

}  // namespace sntk
