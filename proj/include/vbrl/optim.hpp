#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace vbrl {

struct FitReport {
  int iterations = 0;
  double final_objective = 0.0;
  double grad_norm = 0.0;
  bool converged = false;
  /// Objective after each accepted iterate, starting with the initial point.
  std::vector<double> objective_trace;
};

/// Objective callback: returns f(x) and writes the gradient into grad
/// (already sized like x).
using SmoothObjective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct LbfgsOptions {
  int memory = 10;
  double tolerance = 1e-6;  // on the Euclidean gradient norm
  int max_iterations = 500;
  double c1 = 1e-4;  // sufficient decrease
  double c2 = 0.9;   // strong curvature
  int max_line_search = 60;
  /// Relative objective change treated as rounding noise. Within it the line
  /// search falls back to the approximate Wolfe test (Hager and Zhang), which
  /// only uses directional derivatives.
  double noise_tolerance = 1e-12;
};

struct LbfgsResult {
  Eigen::VectorXd x;
  FitReport report;
};

class LineSearchError : public std::runtime_error {
 public:
  LineSearchError(const std::string& what, Eigen::VectorXd last_iterate, int iteration)
      : std::runtime_error(what), last_iterate_(std::move(last_iterate)), iteration_(iteration) {}

  const Eigen::VectorXd& last_iterate() const noexcept { return last_iterate_; }
  int iteration() const noexcept { return iteration_; }

 private:
  Eigen::VectorXd last_iterate_;
  int iteration_;
};

/// Limited-memory BFGS with a strong-Wolfe line search (bracketing plus
/// safeguarded cubic zoom). Throws LineSearchError when no acceptable step
/// is found and std::domain_error when f(x0) is not finite.
LbfgsResult minimize_lbfgs(const SmoothObjective& objective, Eigen::VectorXd x0,
                           const LbfgsOptions& options = {});

}  // namespace vbrl
