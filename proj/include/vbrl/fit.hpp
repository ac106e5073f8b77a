#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "vbrl/losses.hpp"
#include "vbrl/optim.hpp"

namespace vbrl {

enum class LossKind { sq, log, cat };

std::string_view to_string(LossKind kind) noexcept;

/// Accepts "sq", "log", "cat" (and the fqi-* spellings). Throws
/// std::invalid_argument otherwise.
LossKind parse_loss_kind(std::string_view name);

/// A regression problem: n feature rows, n targets in [0,1], ridge strength.
struct Design {
  Eigen::MatrixXd features;
  Eigen::VectorXd targets;
  double l2 = 0.0;

  /// Throws std::invalid_argument on shape mismatch, targets outside [0,1],
  /// negative l2 or non-finite features.
  void validate() const;
};

class RankDeficientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative solver failure, tagged with the iteration it happened at.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, int iteration)
      : std::runtime_error(what), iteration_(iteration) {}
  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

/// argmin_w sum (phi_i^T w - y_i)^2 + l2 |w|^2 by a direct solve of the
/// normal equations. Throws RankDeficientError when l2 = 0 and the features
/// are column-rank deficient.
Eigen::VectorXd fit_sq(const Design& design);

struct NewtonOptions {
  double tolerance = 1e-8;
  int max_iterations = 100;
  int max_halvings = 50;
  double noise_tolerance = 1e-12;
};

struct LogFit {
  Eigen::VectorXd weights;
  FitReport report;
};

/// Logistic-link GLM under the log-loss with (l2/2)|w|^2, minimized by
/// damped Newton. Requires l2 > 0. Throws SolverError when the objective
/// stops being finite.
LogFit fit_log(const Design& design, const NewtonOptions& options = {},
               const Eigen::VectorXd* warm_start = nullptr);

struct CatFit {
  Eigen::MatrixXd weights;  // K x d
  FitReport report;
};

/// Cat-loss regression over W in R^{K x d} with (l2/2)|W|_F^2, minimized by
/// L-BFGS. Requires l2 > 0. Line-search failure propagates as
/// LineSearchError (carrying the flattened last iterate).
CatFit fit_cat(const Design& design, const BinSpec& bins, const LbfgsOptions& options = {},
               const Eigen::MatrixXd* warm_start = nullptr);

/// Regularized empirical objectives minimized by the solvers above. Each
/// writes its analytic gradient (and Hessian where offered) when asked.
namespace objectives {

double squared(const Design& design, const Eigen::VectorXd& w, Eigen::VectorXd* grad = nullptr);

double logistic(const Design& design, const Eigen::VectorXd& w, Eigen::VectorXd* grad = nullptr,
                Eigen::MatrixXd* hessian = nullptr);

double categorical(const Design& design, const BinSpec& bins, const Eigen::MatrixXd& w,
                   Eigen::MatrixXd* grad = nullptr);

}  // namespace objectives

/// Linear action-value model with one parameter block per action: a 1 x d
/// row for the squared and log losses, a K x d matrix for the cat-loss.
/// Predictions always land in [0,1].
class LinearQModel {
 public:
  /// All-zero parameters.
  LinearQModel(LossKind kind, int num_actions, int feature_dim, BinSpec bins = {});

  LossKind kind() const noexcept { return kind_; }
  int num_actions() const noexcept { return static_cast<int>(blocks_.size()); }
  int feature_dim() const noexcept { return feature_dim_; }
  const BinSpec& bins() const noexcept { return bins_; }

  const Eigen::MatrixXd& block(int action) const;
  void set_block(int action, Eigen::MatrixXd params);

  Probability predict(const Eigen::Ref<const Eigen::VectorXd>& features, int action) const;

  /// Predictions for every row of `features` under one action.
  Eigen::VectorXd predict_rows(const Eigen::MatrixXd& features, int action) const;

 private:
  LossKind kind_;
  int feature_dim_;
  BinSpec bins_;
  std::vector<Eigen::MatrixXd> blocks_;
};

inline Probability predict(const LinearQModel& model,
                           const Eigen::Ref<const Eigen::VectorXd>& features, int action) {
  return model.predict(features, action);
}

}  // namespace vbrl
