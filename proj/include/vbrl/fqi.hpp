#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "vbrl/fit.hpp"
#include "vbrl/fourier.hpp"
#include "vbrl/pendulum.hpp"

namespace vbrl {

/// Transitions from whole episodes of the behaviour policy.
struct BatchDataset {
  std::vector<pendulum::Transition> transitions;
  std::vector<std::size_t> episode_starts;  // index of each episode's first transition
  std::uint64_t seed = 0;

  /// `episodes` uniform-random episodes; episode e uses derive_seed(seed, {e}).
  static BatchDataset collect(int episodes, std::uint64_t seed,
                              pendulum::Integrator integrator = pendulum::Integrator::semi_implicit);

  /// Splits at terminal transitions. Throws std::invalid_argument if the
  /// last episode is unterminated or a reward is inconsistent.
  static BatchDataset from_transitions(std::vector<pendulum::Transition> transitions,
                                       std::uint64_t seed = 0);

  std::size_t episodes() const noexcept { return episode_starts.size(); }
};

/// Featurized batch: row i holds phi(s_i), a_i, r_i, phi(s'_i), done_i. Rows
/// of `next_features` for terminal transitions are zero and never read.
struct FqiProblem {
  Eigen::MatrixXd features;
  Eigen::MatrixXd next_features;
  std::vector<int> actions;
  Eigen::VectorXd rewards;
  std::vector<char> terminal;
  int num_actions = 0;

  Eigen::Index size() const noexcept { return features.rows(); }
  int feature_dim() const noexcept { return static_cast<int>(features.cols()); }
  void validate() const;
};

FqiProblem make_problem(const BatchDataset& data, const FourierBasis& basis);

/// Ridge defaults: 1e-6 for the squared and log losses, 1e-4 for the cat-loss.
double default_l2(LossKind kind) noexcept;

struct FqiConfig {
  LossKind loss = LossKind::sq;
  int iterations = 50;
  double gamma = 0.99;
  double l2 = 1e-6;
  BinSpec bins = BinSpec::nonuniform5();
  bool warm_start = false;
  NewtonOptions newton;
  LbfgsOptions lbfgs;

  void validate() const;
};

class GreedyPolicy {
 public:
  explicit GreedyPolicy(LinearQModel model) : model_(std::move(model)) {}

  /// argmax_a predict(features, a); ties go to the lowest index.
  int greedy_action(const Eigen::Ref<const Eigen::VectorXd>& features) const;

  const LinearQModel& model() const noexcept { return model_; }

 private:
  LinearQModel model_;
};

inline int greedy_action(const GreedyPolicy& policy,
                         const Eigen::Ref<const Eigen::VectorXd>& features) {
  return policy.greedy_action(features);
}

struct FqiFitRecord {
  int iteration = 0;  // 1-based
  int action = 0;
  int samples = 0;
  FitReport report;
};

struct FqiResult {
  GreedyPolicy policy;
  std::vector<FqiFitRecord> fits;
};

class FqiError : public std::runtime_error {
 public:
  FqiError(const std::string& what, int iteration, int action)
      : std::runtime_error(what), iteration_(iteration), action_(action) {}
  int iteration() const noexcept { return iteration_; }
  int action() const noexcept { return action_; }

 private:
  int iteration_;
  int action_;
};

/// Bellman targets on the transformed scale g = 1 + v. With no model the
/// continuation is dropped and targets are the transformed rewards 1 + r.
/// Otherwise g = 1 + r + gamma (max_a predict(s', a) - 1) for non-terminal
/// rows. Every target is clipped to [0,1].
Eigen::VectorXd bellman_targets(const LinearQModel* model, const FqiProblem& problem, double gamma);

/// Fitted Q-iteration from the all-zero model. Solver exceptions are
/// rethrown as FqiError naming the iteration and action.
FqiResult run_fqi(const FqiProblem& problem, const FqiConfig& config);

/// Columns: iteration,action,objective,grad_norm,solver_iterations
void write_diagnostics_csv(std::ostream& os, const std::vector<FqiFitRecord>& fits);

/// Pendulum controller acting greedily on Fourier features.
pendulum::Policy make_controller(const GreedyPolicy& policy, const FourierBasis& basis);

}  // namespace vbrl
