#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sntk::normal_forms {

/// Scalar maps h -> f(h, g) with a codimension-one bifurcation at g = 1.
///
/// StabilityFlip and Pitchfork are the two forms analysed in the text;
/// SaddleNode and Transcritical are textbook forms shifted so that their
/// bifurcation also sits at g = 1.
enum class Kind { StabilityFlip, Pitchfork, SaddleNode, Transcritical };

inline constexpr double kCriticalG = 1.0;

/// |h| above this is treated as divergence.
inline constexpr double kOverflowBound = 1e100;

Kind parse_kind(std::string_view name);
std::string kind_name(Kind kind);

struct ScalarNormalForm {
  Kind kind = Kind::Pitchfork;
  double g = 1.0;
};

double step(const ScalarNormalForm& form, double h);
double d_dh(const ScalarNormalForm& form, double h);
double d_dg(const ScalarNormalForm& form, double h);

struct ScalarTrajectory {
  std::vector<double> states;         // h_0 .. h_{T-1}
  std::vector<double> sensitivities;  // D_g h_t, sensitivities[0] == 0
};

class OverflowError : public std::runtime_error {
 public:
  explicit OverflowError(const std::string& what) : std::runtime_error(what) {}
};

/// Iterates the map T-1 times from h0 while propagating the exact derivative
/// s_{t+1} = f_h(h_t) s_t + f_g(h_t).  Throws std::invalid_argument for a
/// non-finite h0 or T < 1, OverflowError when |h_t| exceeds kOverflowBound.
ScalarTrajectory simulate(const ScalarNormalForm& form, double h0, int T);

/// ||v v^T||_2 / B where v stacks D_g h_1 .. D_g h_T (T steps of evolution)
/// over every batch entry.
double sntk_norm(const ScalarNormalForm& form, const std::vector<double>& h0_batch, int T);

/// h0^2 * sum_{t<T} (t+1)^2 g^(2t), summed term by term.
double closed_form_flip_norm(double g, double h0, int T);

struct UniformSampler {
  double low = -0.05;
  double high = 0.05;
  int count = 64;
  std::uint64_t seed = 0;
};

struct SweepPoint {
  double g = 0.0;
  double mean_norm = 0.0;
  bool overflow = false;  // mean_norm is +inf when set
};

/// Evaluates sntk_norm on every grid value with one shared set of initial
/// conditions.  Overflowing points are flagged instead of aborting.
std::vector<SweepPoint> landscape_sweep(Kind kind, const std::vector<double>& g_grid,
                                        const UniformSampler& sampler, int T);

/// n evenly spaced values covering [lo, hi] inclusive.
std::vector<double> linspace(double lo, double hi, int n);

}  // namespace sntk::normal_forms
