#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "sntk/rnn.hpp"

namespace sntk::test {

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

inline double rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

inline Matrix random_matrix(std::mt19937_64& rng, int rows, int cols, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = normal(rng);
  return m;
}

inline RnnModel random_model(std::mt19937_64& rng, int N, double scale = 0.6) {
  return RnnModel(random_matrix(rng, N, N, scale / std::sqrt(N)), random_matrix(rng, N, 1, 0.3).col(0));
}

/// Central difference of a vector-valued function of the parameters, one
/// column per parameter.
inline Matrix central_difference(const std::function<Vector(const ParamVector&)>& f, const ParamVector& theta,
                                 double eps) {
  const Vector f0 = f(theta);
  Matrix out(f0.size(), theta.size());
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    ParamVector plus = theta, minus = theta;
    plus[k] += eps;
    minus[k] -= eps;
    out.col(k) = (f(plus) - f(minus)) / (2 * eps);
  }
  return out;
}

}  // namespace sntk::test
