#include "sntk/experiments.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "sntk/checkpoint.hpp"

namespace sntk::experiments {

namespace {

// Offsets separating the random streams derived from one user seed.
constexpr std::uint64_t kTeacherSeedOffset = 1000;
constexpr std::uint64_t kPlantNoiseSeedOffset = 2000;
constexpr std::uint64_t kTeacherBasisSeedOffset = 3000;

std::vector<ParamSpec> training_keys() {
  return {
      {"N", "16", "hidden size"},
      {"B", "32", "batch size"},
      {"T", "15", "unrolled time steps"},
      {"iterations", "20000", "optimizer iterations"},
      {"learning-rate", "0.005", "step size"},
      {"optimizer", "sgd", "sgd | natgrad"},
      {"natgrad-epsilon", "1e-4", "damping added to the top Fisher eigenvalue"},
      {"natgrad-power-iters", "10", "power iterations per natgrad step"},
      {"natgrad-power-tol", "1e-3", "relative residual for early stopping of the power iteration"},
      {"metrics-every", "50", "iterations between metrics rows"},
      {"seed", "0", "seed for initialisation and batches"},
      {"ic-bounds", "1.0", "initial conditions are uniform on [-ic-bounds, ic-bounds]"},
      {"loss-mode", "readout", "readout | full-state"},
      {"fixed-dataset", "false", "reuse one batch of initial conditions"},
      {"probe-batch", "false", "record loss and sNTK metrics on a fixed probe batch"},
      {"checkpoint-every", "0", "periodic checkpoint interval (0 = off)"},
      {"init-gain", "1.0", "scale applied to the Xavier student initialisation"},
      {"out", "sntk_out", "output directory"},
  };
}

}  // namespace

const std::vector<ParamSpec>& normal_form_sweep_params() {
  static const std::vector<ParamSpec> specs = {
      {"kind", "pitchfork", "stability-flip | pitchfork | saddle-node | transcritical"},
      {"g-min", "0.5", "grid start"},
      {"g-max", "1.5", "grid end"},
      {"g-steps", "101", "number of grid points"},
      {"h0-low", "-0.05", "lower bound of initial conditions"},
      {"h0-high", "0.05", "upper bound of initial conditions"},
      {"count", "64", "initial conditions per grid point"},
      {"T", "30", "time steps"},
      {"seed", "0", "sampler seed"},
      {"out", "sntk_out", "output directory"},
  };
  return specs;
}

const std::vector<ParamSpec>& train_params() {
  static const std::vector<ParamSpec> specs = [] {
    auto s = training_keys();
    s.push_back({"teacher", "", "teacher checkpoint (overrides plant)"});
    s.push_back({"plant", "0.75,0.75;0.75,-0.75", "readout-plane fixed points 'x,y;x,y;...' (mirrors implied)"});
    s.push_back({"plant-noise", "0.1", "off-readout coordinates of planted points are uniform on [-noise, noise]"});
    return s;
  }();
  return specs;
}

const std::vector<ParamSpec>& two_modes_params() {
  static const std::vector<ParamSpec> specs = [] {
    auto s = training_keys();
    s.push_back({"teacher-eigs", "1.2 1.1", "two teacher eigenvalue moduli e1 > e2 > 1"});
    s.push_back({"contraction", "0.5", "spectral radius of the teacher's remaining block"});
    s.push_back({"teacher-basis", "random", "random | aligned: whether the unstable modes sit on the readout axes"});
    return s;
  }();
  return specs;
}

const std::vector<ParamSpec>& landscape_params() {
  static const std::vector<ParamSpec> specs = {
      {"checkpoint", "", "model checkpoint"},
      {"direction", "top-eig", "top-eig or a file with one direction entry per line"},
      {"alpha-min", "-0.5", "grid start along the direction"},
      {"alpha-max", "0.5", "grid end along the direction"},
      {"alpha-steps", "21", "grid points along the direction"},
      {"beta-min", "-0.5", "grid start along the second Fisher eigenvector"},
      {"beta-max", "0.5", "grid end along the second Fisher eigenvector"},
      {"beta-steps", "1", "grid points along the second eigenvector (1 = one-dimensional sweep)"},
      {"B", "32", "probe batch size"},
      {"T", "15", "time steps"},
      {"ic-bounds", "1.0", "initial condition bound"},
      {"seed", "0", "probe batch seed"},
      {"out", "sntk_out", "output directory"},
  };
  return specs;
}

const std::vector<ParamSpec>& probe_params() {
  static const std::vector<ParamSpec> specs = {
      {"checkpoint", "", "model checkpoint"},
      {"teacher", "", "optional teacher checkpoint; adds a loss column"},
      {"B", "32", "probe batch size"},
      {"T", "15", "time steps"},
      {"ic-bounds", "1.0", "initial condition bound"},
      {"seed", "0", "probe batch seed"},
      {"out", "", "output directory (empty = stdout only)"},
  };
  return specs;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"normal-form-sweep", "train", "landscape", "two-modes", "probe"};
  return names;
}

const std::vector<ParamSpec>& params_for(const std::string& command) {
  if (command == "normal-form-sweep") return normal_form_sweep_params();
  if (command == "train") return train_params();
  if (command == "landscape") return landscape_params();
  if (command == "two-modes") return two_modes_params();
  if (command == "probe") return probe_params();
  throw ConfigError("unknown command '" + command + "'");
}

RnnModel build_student(int N, std::uint64_t seed, double gain) {
  if (!(gain > 0)) throw ConfigError("init-gain must be > 0");
  RnnModel m = init_xavier(N, seed);
  m.W *= gain;
  m.b *= gain;
  return m;
}

Matrix parse_plant_points(const std::string& text) {
  std::vector<std::array<double, 2>> pts;
  std::istringstream groups(text);
  std::string group;
  while (std::getline(groups, group, ';')) {
    if (group.find_first_not_of(" \t") == std::string::npos) continue;
    std::istringstream gs(group);
    std::array<double, 2> p{};
    char comma = 0;
    if (!(gs >> p[0] >> comma >> p[1]) || comma != ',')
      throw ConfigError("plant: expected 'x,y' pairs separated by ';', got '" + group + "'");
    std::string rest;
    if (gs >> rest) throw ConfigError("plant: trailing text in '" + group + "'");
    pts.push_back(p);
  }
  if (pts.empty()) throw ConfigError("plant: no points given");
  Matrix out(static_cast<Eigen::Index>(pts.size()), 2);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out(static_cast<Eigen::Index>(i), 0) = pts[i][0];
    out(static_cast<Eigen::Index>(i), 1) = pts[i][1];
  }
  return out;
}

RnnModel build_planted_teacher(int N, const Matrix& readout_points, double noise, std::uint64_t seed,
                               ReadoutIndices readout) {
  RnnModel base = init_xavier(N, seed + kTeacherSeedOffset);
  base.readout = readout;
  base.validate();
  std::mt19937_64 rng(seed + kPlantNoiseSeedOffset);
  std::uniform_real_distribution<double> dist(-noise, noise);
  const auto k = readout_points.rows();
  Matrix X(N, k);
  for (int i = 0; i < N; ++i)
    for (Eigen::Index j = 0; j < k; ++j) X(i, j) = noise > 0 ? dist(rng) : 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    X(readout[0], j) = readout_points(j, 0);
    X(readout[1], j) = readout_points(j, 1);
  }
  try {
    return plant_fixed_points(base, {X});
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

TeacherBasis parse_teacher_basis(const std::string& name) {
  if (name == "aligned") return TeacherBasis::Aligned;
  if (name == "random") return TeacherBasis::Random;
  throw ConfigError("unknown teacher-basis: " + name);
}

RnnModel build_two_modes_teacher(int N, double e1, double e2, double contraction, std::uint64_t seed,
                                 TeacherBasis basis, ReadoutIndices readout) {
  if (!(e1 > e2) || !(e2 > 1.0)) throw ConfigError("teacher-eigs must satisfy e1 > e2 > 1");
  if (!(contraction >= 0) || !(contraction < 1.0)) throw ConfigError("contraction must be in [0, 1)");
  Matrix W = Matrix::Zero(N, N);
  W(readout[0], readout[0]) = e1;
  W(readout[1], readout[1]) = e2;

  std::vector<int> rest;
  for (int i = 0; i < N; ++i)
    if (i != readout[0] && i != readout[1]) rest.push_back(i);
  if (!rest.empty()) {
    const int r = static_cast<int>(rest.size());
    std::mt19937_64 rng(seed + kTeacherSeedOffset);
    std::normal_distribution<double> normal;
    Matrix C(r, r);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) C(i, j) = normal(rng);
    const double rho = Eigen::EigenSolver<Matrix>(C, false).eigenvalues().cwiseAbs().maxCoeff();
    if (rho > 0) C *= contraction / rho;
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) W(rest[i], rest[j]) = C(i, j);
  }
  if (basis == TeacherBasis::Random) {
    std::mt19937_64 rng(seed + kTeacherBasisSeedOffset);
    std::normal_distribution<double> normal;
    Matrix G(N, N);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) G(i, j) = normal(rng);
    const Matrix Q = Eigen::HouseholderQR<Matrix>(G).householderQ();
    W = Q * W * Q.transpose();
  }
  return RnnModel(std::move(W), Vector::Zero(N), readout);
}

TrainConfig train_config_from(const ExperimentConfig& cfg) {
  TrainConfig c;
  c.N = cfg.get_int("N");
  c.B = cfg.get_int("B");
  c.T = cfg.get_int("T");
  c.iterations = cfg.get_int("iterations");
  c.learning_rate = cfg.get_double("learning-rate");
  c.optimizer = parse_optimizer(cfg.get_string("optimizer"));
  c.natgrad_epsilon = cfg.get_double("natgrad-epsilon");
  c.natgrad_power_iters = cfg.get_int("natgrad-power-iters");
  c.natgrad_power_tol = cfg.get_double("natgrad-power-tol");
  c.metrics_every = cfg.get_int("metrics-every");
  c.seed = cfg.get_seed("seed");
  c.ic_bounds = cfg.get_double("ic-bounds");
  const std::string mode = cfg.get_string("loss-mode");
  if (mode == "readout") {
    c.loss_mode = LossMode::Readout;
  } else if (mode == "full-state") {
    c.loss_mode = LossMode::FullState;
  } else {
    throw ConfigError("loss-mode must be readout or full-state");
  }
  c.fixed_dataset = cfg.get_bool("fixed-dataset");
  c.probe_batch = cfg.get_bool("probe-batch");
  c.checkpoint_every = cfg.get_int("checkpoint-every");
  c.out_dir = cfg.get_string("out");
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

namespace {

RnnModel load_model(const std::string& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string(what) + " is required");
  if (!std::filesystem::exists(path)) throw ConfigError(std::string(what) + " file not found: " + path);
  try {
    return load_checkpoint(path);
  } catch (const std::exception& e) {
    throw ConfigError(std::string(what) + ": " + e.what());
  }
}

Matrix probe_initial_conditions(const ExperimentConfig& cfg, int N) {
  const int B = cfg.get_int("B");
  const int T = cfg.get_int("T");
  const double bound = cfg.get_double("ic-bounds");
  if (B < 1 || T < 2) throw ConfigError("B must be >= 1 and T >= 2");
  if (!(bound > 0)) throw ConfigError("ic-bounds must be > 0");
  std::mt19937_64 rng(cfg.get_seed("seed"));
  return sample_initial_conditions(rng, B, N, bound);
}

ParamVector read_direction(const std::string& path, int m) {
  std::ifstream is(path);
  if (!is) throw ConfigError("direction file not found: " + path);
  std::vector<double> values;
  std::string token;
  while (is >> token) {
    try {
      values.push_back(std::stod(token));
    } catch (const std::exception&) {
      throw ConfigError("direction file: malformed number '" + token + "'");
    }
  }
  if (static_cast<int>(values.size()) != m)
    throw ConfigError("direction file has " + std::to_string(values.size()) + " entries, expected " +
                      std::to_string(m));
  ParamVector u = Eigen::Map<const Vector>(values.data(), m);
  const double norm = u.norm();
  if (norm == 0.0) throw ConfigError("direction file holds the zero vector");
  return u / norm;
}

}  // namespace

RnnModel teacher_from(const ExperimentConfig& cfg) {
  const int N = cfg.get_int("N");
  const std::string path = cfg.get_string("teacher");
  if (!path.empty()) {
    RnnModel t = load_model(path, "teacher");
    if (t.N() != N) throw ConfigError("teacher checkpoint has N=" + std::to_string(t.N()));
    return t;
  }
  return build_planted_teacher(N, parse_plant_points(cfg.get_string("plant")), cfg.get_double("plant-noise"),
                               cfg.get_seed("seed"));
}

std::vector<normal_forms::SweepPoint> normal_form_sweep(const ExperimentConfig& cfg) {
  normal_forms::Kind kind;
  try {
    kind = normal_forms::parse_kind(cfg.get_string("kind"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const int steps = cfg.get_int("g-steps");
  const int count = cfg.get_int("count");
  const int T = cfg.get_int("T");
  const double lo = cfg.get_double("h0-low");
  const double hi = cfg.get_double("h0-high");
  if (steps < 1) throw ConfigError("g-steps must be >= 1");
  if (count < 1) throw ConfigError("count must be >= 1");
  if (T < 1) throw ConfigError("T must be >= 1");
  if (lo > hi) throw ConfigError("h0-low must not exceed h0-high");
  const auto grid = normal_forms::linspace(cfg.get_double("g-min"), cfg.get_double("g-max"), steps);
  return normal_forms::landscape_sweep(kind, grid, {lo, hi, count, cfg.get_seed("seed")}, T);
}

ProbeResult probe(const ExperimentConfig& cfg) {
  const RnnModel model = load_model(cfg.get_string("checkpoint"), "checkpoint");
  const Matrix h0 = probe_initial_conditions(cfg, model.N());
  const int T = cfg.get_int("T");
  const TrajectoryBatch traj = simulate(model, h0, T);
  if (!traj.all_finite()) throw NumericalError("probe: trajectory diverged");

  ProbeResult r;
  const Matrix F = fisher_matrix(model, traj);
  r.summary = sntk_summary(F);
  r.decomposition = decompose(F, r.summary.top_eigvec);

  const std::string teacher_path = cfg.get_string("teacher");
  if (!teacher_path.empty()) {
    const RnnModel teacher = load_model(teacher_path, "teacher");
    if (teacher.N() != model.N()) throw ConfigError("teacher and checkpoint sizes differ");
    r.has_loss = true;
    r.loss = readout_loss(traj, simulate(teacher, h0, T), model.readout);
  }
  return r;
}

std::vector<LandscapePoint> landscape(const ExperimentConfig& cfg) {
  const RnnModel model = load_model(cfg.get_string("checkpoint"), "checkpoint");
  const Matrix h0 = probe_initial_conditions(cfg, model.N());
  const int T = cfg.get_int("T");
  const int alpha_steps = cfg.get_int("alpha-steps");
  const int beta_steps = cfg.get_int("beta-steps");
  if (alpha_steps < 1 || beta_steps < 1) throw ConfigError("alpha-steps and beta-steps must be >= 1");
  const auto alphas = normal_forms::linspace(cfg.get_double("alpha-min"), cfg.get_double("alpha-max"), alpha_steps);

  const TrajectoryBatch traj = simulate(model, h0, T);
  if (!traj.all_finite()) throw NumericalError("landscape: trajectory diverged at the checkpoint");
  const Matrix F = fisher_matrix(model, traj);
  const std::string dir = cfg.get_string("direction");

  if (beta_steps == 1) {
    const ParamVector u = dir == "top-eig" ? sntk_summary(F).top_eigvec : read_direction(dir, model.num_params());
    return landscape_sweep(model, h0, T, u, alphas);
  }
  const auto betas = normal_forms::linspace(cfg.get_double("beta-min"), cfg.get_double("beta-max"), beta_steps);
  auto [u, w] = top_two_directions(F);
  if (dir != "top-eig") {
    u = read_direction(dir, model.num_params());
    w -= u.dot(w) * u;
    if (w.norm() < 1e-12) throw ConfigError("direction is parallel to the second Fisher eigenvector");
    w.normalize();
  }
  return landscape_sweep_2d(model, h0, T, u, w, alphas, betas);
}

int iterations_to_target(const std::vector<MetricsRecord>& records, int k, double target, double rel_tol) {
  for (const auto& r : records) {
    if (k < static_cast<int>(r.eig_moduli.size()) && std::abs(r.eig_moduli[k] - target) <= rel_tol * target)
      return r.iteration;
  }
  return -1;
}

int first_unstable(const std::vector<MetricsRecord>& records, int k) {
  for (const auto& r : records) {
    if (k < static_cast<int>(r.eig_moduli.size()) && r.eig_moduli[k] >= 1.0) return r.iteration;
  }
  return -1;
}

namespace {

std::filesystem::path prepare_out(const ExperimentConfig& cfg) {
  const std::filesystem::path out = cfg.get_string("out");
  std::filesystem::create_directories(out);
  cfg.save(out / "config.resolved");
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
}

void write_bifurcations(const std::filesystem::path& path, const std::vector<MetricsRecord>& records) {
  std::ostringstream os;
  os << "iteration\n";
  for (int it : detect_bifurcation(records)) os << it << "\n";
  write_text(path, os.str());
}

void run_training(const std::filesystem::path& out, const TrainConfig& tc, const RnnModel& student,
                  const RnnModel& teacher) {
  save_checkpoint(out / "teacher.rnn", teacher);
  try {
    const TrainResult result = train(tc, student, teacher);
    write_metrics_csv(out / "metrics.csv", result.records, tc.track_eigs);
    write_bifurcations(out / "bifurcations.csv", result.records);
  } catch (const DivergenceError& e) {
    write_metrics_csv(out / "metrics.csv", e.records(), tc.track_eigs);
    write_bifurcations(out / "bifurcations.csv", e.records());
    throw;
  }
}

void cmd_normal_form_sweep(const ExperimentConfig& cfg) {
  const auto points = normal_form_sweep(cfg);
  const auto out = prepare_out(cfg);
  std::ostringstream os;
  os << "g,mean_norm\n";
  for (const auto& p : points) os << format_17g(p.g) << ',' << format_17g(p.mean_norm) << "\n";
  write_text(out / "normal_form_sweep.csv", os.str());
}

void cmd_train(const ExperimentConfig& cfg) {
  const TrainConfig tc = train_config_from(cfg);
  const RnnModel teacher = teacher_from(cfg);
  const RnnModel student = build_student(tc.N, tc.seed, cfg.get_double("init-gain"));
  run_training(prepare_out(cfg), tc, student, teacher);
}

void cmd_two_modes(const ExperimentConfig& cfg) {
  TrainConfig tc = train_config_from(cfg);
  tc.track_eigs = 2;
  const auto eigs = cfg.get_doubles("teacher-eigs");
  if (eigs.size() != 2) throw ConfigError("teacher-eigs expects exactly two values");
  const RnnModel teacher = build_two_modes_teacher(tc.N, eigs[0], eigs[1], cfg.get_double("contraction"), tc.seed,
                                                   parse_teacher_basis(cfg.get_string("teacher-basis")));
  const RnnModel student = build_student(tc.N, tc.seed, cfg.get_double("init-gain"));
  if (spectral_radius(student) >= 1.0)
    throw ConfigError("student initialisation is not stable (spectral radius >= 1); lower init-gain");
  run_training(prepare_out(cfg), tc, student, teacher);
}

void cmd_landscape(const ExperimentConfig& cfg) {
  const auto points = landscape(cfg);
  const bool two_d = cfg.get_int("beta-steps") > 1;
  const auto out = prepare_out(cfg);
  std::ostringstream os;
  os << (two_d ? "alpha,beta,spec_norm,stable_rank\n" : "alpha,spec_norm,stable_rank\n");
  for (const auto& p : points) {
    os << format_17g(p.alpha) << ',';
    if (two_d) os << format_17g(p.beta) << ',';
    os << format_17g(p.spec_norm) << ',' << format_17g(p.stable_rank) << "\n";
  }
  write_text(out / "landscape.csv", os.str());
}

void cmd_probe(const ExperimentConfig& cfg) {
  const ProbeResult r = probe(cfg);
  std::ostringstream os;
  os << "spec_norm,frob_norm,stable_rank,dominance_ratio" << (r.has_loss ? ",loss" : "") << "\n";
  os << format_17g(r.summary.spec_norm) << ',' << format_17g(r.summary.frob_norm) << ','
     << format_17g(r.summary.stable_rank) << ',' << format_17g(r.decomposition.dominance_ratio);
  if (r.has_loss) os << ',' << format_17g(r.loss);
  os << "\n";
  std::cout << os.str();
  if (!cfg.get_string("out").empty()) write_text(prepare_out(cfg) / "probe.csv", os.str());
}

}  // namespace

void execute(const std::string& command, const ExperimentConfig& overrides) {
  const ExperimentConfig cfg = ExperimentConfig::resolve(params_for(command), overrides);
  if (command == "normal-form-sweep") return cmd_normal_form_sweep(cfg);
  if (command == "train") return cmd_train(cfg);
  if (command == "landscape") return cmd_landscape(cfg);
  if (command == "two-modes") return cmd_two_modes(cfg);
  if (command == "probe") return cmd_probe(cfg);
  throw ConfigError("unknown command '" + command + "'");
}

int run_command(const std::string& command, const ExperimentConfig& overrides) {
  try {
    execute(command, overrides);
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "sntk " << command << ": " << e.what() << "\n";
    return kExitConfig;
  } catch (const DivergenceError& e) {
    std::cerr << "sntk " << command << ": " << e.what() << "\n";
    return kExitDivergence;
  } catch (const NumericalError& e) {
    std::cerr << "sntk " << command << ": " << e.what() << "\n";
    return kExitDivergence;
  } catch (const std::invalid_argument& e) {
    std::cerr << "sntk " << command << ": " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "sntk " << command << ": " << e.what() << "\n";
    return 1;
  }
}

}  // namespace sntk::experiments
