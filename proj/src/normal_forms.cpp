#include "sntk/normal_forms.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace sntk::normal_forms {

Kind parse_kind(std::string_view name) {
  if (name == "stability-flip" || name == "flip") return Kind::StabilityFlip;
  if (name == "pitchfork") return Kind::Pitchfork;
  if (name == "saddle-node") return Kind::SaddleNode;
  if (name == "transcritical") return Kind::Transcritical;
  throw std::invalid_argument("unknown normal form kind: " + std::string(name));
}

std::string kind_name(Kind kind) {
  switch (kind) {
    case Kind::StabilityFlip: return "stability-flip";
    case Kind::Pitchfork: return "pitchfork";
    case Kind::SaddleNode: return "saddle-node";
    case Kind::Transcritical: return "transcritical";
  }
  return "unknown";
}

double step(const ScalarNormalForm& form, double h) {
  const double g = form.g;
  switch (form.kind) {
    case Kind::StabilityFlip: return g * h;
    case Kind::Pitchfork: return g * h - h * h * h;
    case Kind::SaddleNode: return h + (g - kCriticalG) - h * h;
    case Kind::Transcritical: return g * h - h * h;
  }
  return h;
}

double d_dh(const ScalarNormalForm& form, double h) {
  const double g = form.g;
  switch (form.kind) {
    case Kind::StabilityFlip: return g;
    case Kind::Pitchfork: return g - 3.0 * h * h;
    case Kind::SaddleNode: return 1.0 - 2.0 * h;
    case Kind::Transcritical: return g - 2.0 * h;
  }
  return 0.0;
}

double d_dg(const ScalarNormalForm& form, double h) {
  switch (form.kind) {
    case Kind::StabilityFlip:
    case Kind::Pitchfork:
    case Kind::Transcritical: return h;
    case Kind::SaddleNode: return 1.0;
  }
  return 0.0;
}

ScalarTrajectory simulate(const ScalarNormalForm& form, double h0, int T) {
  if (T < 1) throw std::invalid_argument("simulate: T must be >= 1");
  if (!std::isfinite(h0)) throw std::invalid_argument("simulate: non-finite initial condition");

  ScalarTrajectory traj;
  traj.states.resize(T);
  traj.sensitivities.resize(T);
  double h = h0;
  double s = 0.0;
  traj.states[0] = h;
  traj.sensitivities[0] = s;
  for (int t = 1; t < T; ++t) {
    // Both updates read the previous state.
    const double s_next = d_dh(form, h) * s + d_dg(form, h);
    h = step(form, h);
    s = s_next;
    if (!std::isfinite(h) || std::abs(h) > kOverflowBound || !std::isfinite(s)) {
      throw OverflowError("simulate: state diverged at t=" + std::to_string(t) +
                          " (g=" + std::to_string(form.g) + ")");
    }
    traj.states[t] = h;
    traj.sensitivities[t] = s;
  }
  return traj;
}

double sntk_norm(const ScalarNormalForm& form, const std::vector<double>& h0_batch, int T) {
  if (h0_batch.empty()) throw std::invalid_argument("sntk_norm: empty batch");
  if (T < 1) throw std::invalid_argument("sntk_norm: T must be >= 1");
  double total = 0.0;
  for (double h0 : h0_batch) {
    // T steps of evolution: h_0 .. h_T, of which h_0 carries no sensitivity.
    const auto traj = simulate(form, h0, T + 1);
    for (double s : traj.sensitivities) total += s * s;
  }
  if (!std::isfinite(total)) throw OverflowError("sntk_norm: norm overflowed");
  return total / static_cast<double>(h0_batch.size());
}

double closed_form_flip_norm(double g, double h0, int T) {
  if (T < 1) throw std::invalid_argument("closed_form_flip_norm: T must be >= 1");
  double sum = 0.0;
  double g_pow = 1.0;  // g^(2t)
  for (int t = 0; t < T; ++t) {
    const double k = t + 1.0;
    sum += k * k * g_pow;
    g_pow *= g * g;
  }
  return h0 * h0 * sum;
}

std::vector<SweepPoint> landscape_sweep(Kind kind, const std::vector<double>& g_grid,
                                        const UniformSampler& sampler, int T) {
  if (g_grid.empty()) throw std::invalid_argument("landscape_sweep: empty grid");
  if (sampler.count < 1) throw std::invalid_argument("landscape_sweep: count must be >= 1");
  if (!(sampler.low <= sampler.high)) throw std::invalid_argument("landscape_sweep: low > high");

  std::mt19937_64 rng(sampler.seed);
  std::uniform_real_distribution<double> dist(sampler.low, sampler.high);
  std::vector<double> h0(sampler.count);
  for (auto& h : h0) h = sampler.low == sampler.high ? sampler.low : dist(rng);

  std::vector<SweepPoint> out;
  out.reserve(g_grid.size());
  for (double g : g_grid) {
    SweepPoint p{g, 0.0, false};
    try {
      p.mean_norm = sntk_norm({kind, g}, h0, T);
    } catch (const OverflowError&) {
      p.mean_norm = std::numeric_limits<double>::infinity();
      p.overflow = true;
    }
    out.push_back(p);
  }
  return out;
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 1) throw std::invalid_argument("linspace: n must be >= 1");
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = lo;
    return v;
  }
  for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
  v[n - 1] = hi;
  return v;
}

}  // namespace sntk::normal_forms
