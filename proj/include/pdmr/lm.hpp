#pragma once

// Damped least squares (Levenberg-Marquardt) on dense Eigen types.

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pdmr {

struct LmOptions {
  int max_iterations = 200;
  /// Converged when ||step|| <= rel_step_tol * (||x|| + rel_step_tol).
  double rel_step_tol = 1e-10;
  double initial_damping = 1e-3;
  double damping_up = 10.0;
  double damping_down = 0.1;
};

struct LmResult {
  Eigen::VectorXd params;
  double rss = 0.0;
  int iterations = 0;
  bool converged = false;
  /// sigma^2 (J^T J)^-1 at the solution, sigma^2 = rss / (n - k). Empty when
  /// the normal matrix is singular or n <= k.
  Eigen::MatrixXd covariance;
};

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using JacobianFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

/// Minimizes ||r(x)||^2. A null jacobian falls back to forward differences.
LmResult levenberg_marquardt(const ResidualFn& residual, const JacobianFn& jacobian,
                             Eigen::VectorXd x0, const LmOptions& options = {});

Eigen::MatrixXd numeric_jacobian(const ResidualFn& residual, const Eigen::VectorXd& x);

/// Non-convergence of a model fit, carrying the best parameters reached.
class FitError : public std::runtime_error {
 public:
  FitError(const std::string& what, std::vector<double> best_params, double residual_rms)
      : std::runtime_error(what), best_params_(std::move(best_params)), residual_rms_(residual_rms) {}
  const std::vector<double>& best_params() const { return best_params_; }
  double residual_rms() const { return residual_rms_; }

 private:
  std::vector<double> best_params_;
  double residual_rms_;
};

/// Standard errors (sqrt of the covariance diagonal), infinite if the normal matrix is singular.
Eigen::VectorXd standard_errors(const LmResult& result);

}  // namespace pdmr
