#include "sntk/power_iteration.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace sntk {

void canonicalize_sign(Eigen::VectorXd& v) {
  const double cutoff = 1e-8 * v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > cutoff) {
      if (v[i] < 0) v = -v;
      return;
    }
  }
}

namespace {

void project_out(Eigen::VectorXd& v, const std::vector<Eigen::VectorXd>& basis) {
  for (const auto& q : basis) v -= q.dot(v) * q;
}

}  // namespace

EigenPair top_eigpair(const LinearOperator& op, Eigen::Index dim, const PowerIterationOptions& opts) {
  if (dim < 1) throw std::invalid_argument("top_eigpair: empty operator");
  if (opts.max_iters < 1) throw std::invalid_argument("top_eigpair: max_iters must be >= 1");

  Eigen::VectorXd v;
  if (opts.warm_start.size() == dim && opts.warm_start.norm() > 0) {
    v = opts.warm_start;
  } else {
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> normal;
    v.resize(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v[i] = normal(rng);
  }
  project_out(v, opts.deflate);
  if (v.norm() == 0) throw std::invalid_argument("top_eigpair: start vector lies in the deflated space");
  v.normalize();

  EigenPair out;
  for (int k = 1; k <= opts.max_iters; ++k) {
    Eigen::VectorXd w = op(v);
    if (w.size() != dim) throw std::invalid_argument("top_eigpair: operator changed dimension");
    project_out(w, opts.deflate);
    out.iterations = k;
    const double wn = w.norm();
    if (wn == 0.0) {
      out.value = 0.0;
      out.vector = v;
      out.residual = 0.0;
      out.degenerate = true;
      out.converged = true;
      canonicalize_sign(out.vector);
      return out;
    }
    const double lambda = v.dot(w);
    out.value = lambda;
    out.residual = (w - lambda * v).norm();
    out.vector = v;
    if (out.residual <= opts.tol * lambda) {
      out.converged = true;
      break;
    }
    v = w / wn;
  }
  canonicalize_sign(out.vector);
  return out;
}

EigenPair top_eigpair(const Eigen::MatrixXd& A, const PowerIterationOptions& opts) {
  if (A.rows() != A.cols()) throw std::invalid_argument("top_eigpair: matrix must be square");
  return top_eigpair([&A](const Eigen::VectorXd& x) -> Eigen::VectorXd { return A * x; }, A.rows(), opts);
}

}  // namespace sntk
