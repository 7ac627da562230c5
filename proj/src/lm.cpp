#include "pdmr/lm.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pdmr {

Eigen::MatrixXd numeric_jacobian(const ResidualFn& residual, const Eigen::VectorXd& x) {
  const Eigen::VectorXd r0 = residual(x);
  Eigen::MatrixXd j(r0.size(), x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index c = 0; c < x.size(); ++c) {
    const double h = 1e-7 * std::max(1.0, std::abs(x(c)));
    xp(c) = x(c) + h;
    j.col(c) = (residual(xp) - r0) / h;
    xp(c) = x(c);
  }
  return j;
}

LmResult levenberg_marquardt(const ResidualFn& residual, const JacobianFn& jacobian,
                             Eigen::VectorXd x0, const LmOptions& options) {
  auto jac = [&](const Eigen::VectorXd& x) {
    return jacobian ? jacobian(x) : numeric_jacobian(residual, x);
  };
  LmResult out;
  Eigen::VectorXd x = std::move(x0);
  Eigen::VectorXd r = residual(x);
  if (!r.allFinite()) throw std::invalid_argument("levenberg_marquardt: non-finite start");
  double rss = r.squaredNorm();
  double lambda = options.initial_damping;
  Eigen::MatrixXd j = jac(x);

  int it = 0;
  while (it < options.max_iterations) {
    ++it;
    if (rss == 0.0) {
      out.converged = true;
      break;
    }
    const Eigen::MatrixXd jtj = j.transpose() * j;
    const Eigen::VectorXd g = j.transpose() * r;
    Eigen::MatrixXd a = jtj;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      a(i, i) += lambda * std::max(jtj(i, i), 1e-300);
    }
    const Eigen::VectorXd step = a.ldlt().solve(-g);
    if (!step.allFinite()) {
      lambda *= options.damping_up;
      continue;
    }
    const Eigen::VectorXd x_new = x + step;
    const Eigen::VectorXd r_new = residual(x_new);
    const double rss_new = r_new.allFinite() ? r_new.squaredNorm()
                                             : std::numeric_limits<double>::infinity();
    const bool small = step.norm() <= options.rel_step_tol * (x.norm() + options.rel_step_tol);
    if (rss_new < rss) {
      x = x_new;
      r = r_new;
      rss = rss_new;
      j = jac(x);
      lambda = std::max(lambda * options.damping_down, 1e-15);
    } else {
      lambda *= options.damping_up;
    }
    if (small || lambda > 1e16) {
      out.converged = true;
      break;
    }
  }

  out.params = x;
  out.rss = rss;
  out.iterations = it;
  const Eigen::Index n = r.size();
  const Eigen::Index k = x.size();
  if (n > k) {
    const Eigen::MatrixXd jtj = j.transpose() * j;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(jtj);
    if (lu.isInvertible()) {
      out.covariance = lu.inverse() * (rss / static_cast<double>(n - k));
    }
  }
  return out;
}

Eigen::VectorXd standard_errors(const LmResult& result) {
  Eigen::VectorXd e =
      Eigen::VectorXd::Constant(result.params.size(), std::numeric_limits<double>::infinity());
  if (result.covariance.size() == 0) return e;
  for (Eigen::Index i = 0; i < e.size(); ++i) e(i) = std::sqrt(std::max(0.0, result.covariance(i, i)));
  return e;
}

}  // namespace pdmr
