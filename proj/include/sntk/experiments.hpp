#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "sntk/config.hpp"
#include "sntk/normal_forms.hpp"
#include "sntk/rnn.hpp"
#include "sntk/spectrum.hpp"
#include "sntk/training.hpp"

namespace sntk::experiments {

/// Process exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDivergence = 3;

/// Recognised keys (flag spelling) and defaults for each subcommand.
const std::vector<ParamSpec>& normal_form_sweep_params();
const std::vector<ParamSpec>& train_params();
const std::vector<ParamSpec>& landscape_params();
const std::vector<ParamSpec>& two_modes_params();
const std::vector<ParamSpec>& probe_params();
const std::vector<ParamSpec>& params_for(const std::string& command);
const std::vector<std::string>& command_names();

// Building blocks, exposed for tests.

/// Xavier initialisation scaled by `gain` (gain 1 is plain Xavier).
RnnModel build_student(int N, std::uint64_t seed, double gain);

/// Parses "x0,y0;x1,y1;..." into one readout-plane point per row.
Matrix parse_plant_points(const std::string& text);

/// Xavier base model with the given readout-plane points planted as fixed
/// points (mirrors implied).  Coordinates outside the readout plane are drawn
/// uniformly from [-noise, noise].
RnnModel build_planted_teacher(int N, const Matrix& readout_points, double noise, std::uint64_t seed,
                               ReadoutIndices readout = {0, 1});

enum class TeacherBasis { Aligned, Random };
TeacherBasis parse_teacher_basis(const std::string& name);

/// b = 0 and W = diag(e1, e2) on the readout plane, embedded next to a random
/// block rescaled to spectral radius `contraction` on the remaining coordinates.
/// With TeacherBasis::Random the whole matrix is then conjugated by a seeded
/// random orthogonal matrix, so the unstable modes no longer sit on the
/// readout axes. Eigenvalue moduli are the same either way.
RnnModel build_two_modes_teacher(int N, double e1, double e2, double contraction, std::uint64_t seed,
                                 TeacherBasis basis = TeacherBasis::Random, ReadoutIndices readout = {0, 1});

TrainConfig train_config_from(const ExperimentConfig& cfg);

/// Teacher for `train`: loaded from `teacher` when set, otherwise planted.
RnnModel teacher_from(const ExperimentConfig& cfg);

std::vector<normal_forms::SweepPoint> normal_form_sweep(const ExperimentConfig& cfg);

struct ProbeResult {
  SntkSummary summary;
  DecompositionResult decomposition;
  bool has_loss = false;
  double loss = 0.0;
};
ProbeResult probe(const ExperimentConfig& cfg);

std::vector<LandscapePoint> landscape(const ExperimentConfig& cfg);

/// First record iteration with |eig_moduli[k] - target| <= rel_tol * target,
/// or -1 if none.
int iterations_to_target(const std::vector<MetricsRecord>& records, int k, double target, double rel_tol);

/// First record iteration where eig_moduli[k] reaches 1, or -1.
int first_unstable(const std::vector<MetricsRecord>& records, int k);

/// Resolves `overrides` against the command's defaults, runs it and writes
/// its outputs (CSV, checkpoints, `config.resolved`) under the `out` key.
/// Errors propagate as exceptions.
void execute(const std::string& command, const ExperimentConfig& overrides);

/// execute() with errors reported on stderr and mapped to exit codes.
int run_command(const std::string& command, const ExperimentConfig& overrides);

}  // namespace sntk::experiments
