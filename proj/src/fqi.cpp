#include "vbrl/fqi.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

#include "vbrl/rng.hpp"

namespace vbrl {

BatchDataset BatchDataset::collect(int episodes, std::uint64_t seed,
                                   pendulum::Integrator integrator) {
  if (episodes < 1) throw std::invalid_argument("BatchDataset::collect: episodes must be >= 1");
  BatchDataset data;
  data.seed = seed;
  for (int e = 0; e < episodes; ++e) {
    data.episode_starts.push_back(data.transitions.size());
    auto episode = pendulum::collect_episode(derive_seed(seed, {static_cast<std::uint64_t>(e)}),
                                             integrator);
    data.transitions.insert(data.transitions.end(), episode.begin(), episode.end());
  }
  return data;
}

BatchDataset BatchDataset::from_transitions(std::vector<pendulum::Transition> transitions,
                                            std::uint64_t seed) {
  BatchDataset data;
  data.seed = seed;
  bool episode_open = false;
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    const auto& t = transitions[i];
    if (!episode_open) data.episode_starts.push_back(i);
    episode_open = !t.terminal;
    if ((t.reward == -1.0) != t.terminal || (t.reward != 0.0 && t.reward != -1.0)) {
      throw std::invalid_argument("transition " + std::to_string(i) +
                                  ": reward must be -1 exactly on terminal steps and 0 otherwise");
    }
  }
  if (episode_open) throw std::invalid_argument("dataset ends inside an unterminated episode");
  data.transitions = std::move(transitions);
  return data;
}

void FqiProblem::validate() const {
  const auto n = static_cast<std::size_t>(features.rows());
  if (next_features.rows() != features.rows() || next_features.cols() != features.cols() ||
      actions.size() != n || static_cast<std::size_t>(rewards.size()) != n || terminal.size() != n) {
    throw std::invalid_argument("FqiProblem: inconsistent row counts");
  }
  if (num_actions < 1) throw std::invalid_argument("FqiProblem: need at least one action");
  for (int a : actions) {
    if (a < 0 || a >= num_actions) throw std::invalid_argument("FqiProblem: action out of range");
  }
}

FqiProblem make_problem(const BatchDataset& data, const FourierBasis& basis) {
  const auto n = static_cast<Eigen::Index>(data.transitions.size());
  FqiProblem p;
  p.num_actions = pendulum::kNumActions;
  p.features.resize(n, basis.size());
  p.next_features = Eigen::MatrixXd::Zero(n, basis.size());
  p.rewards.resize(n);
  p.actions.reserve(static_cast<std::size_t>(n));
  p.terminal.reserve(static_cast<std::size_t>(n));
  Eigen::VectorXd phi(basis.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& t = data.transitions[static_cast<std::size_t>(i)];
    basis.featurize(t.state, phi);
    p.features.row(i) = phi.transpose();
    if (!t.terminal) {
      basis.featurize(t.next_state, phi);
      p.next_features.row(i) = phi.transpose();
    }
    p.actions.push_back(static_cast<int>(t.action));
    p.rewards[i] = t.reward;
    p.terminal.push_back(t.terminal ? 1 : 0);
  }
  return p;
}

double default_l2(LossKind kind) noexcept { return kind == LossKind::cat ? 1e-4 : 1e-6; }

void FqiConfig::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0,1)");
  if (iterations < 1) throw std::invalid_argument("FQI needs at least one iteration");
  if (!(l2 >= 0.0)) throw std::invalid_argument("l2 must be >= 0");
}

int GreedyPolicy::greedy_action(const Eigen::Ref<const Eigen::VectorXd>& features) const {
  int best = 0;
  double best_value = model_.predict(features, 0).value();
  for (int a = 1; a < model_.num_actions(); ++a) {
    const double v = model_.predict(features, a).value();
    if (v > best_value) {
      best = a;
      best_value = v;
    }
  }
  return best;
}

Eigen::VectorXd bellman_targets(const LinearQModel* model, const FqiProblem& problem, double gamma) {
  const Eigen::Index n = problem.size();
  Eigen::VectorXd next_best = Eigen::VectorXd::Constant(n, 1.0);  // g' = 1 <=> v' = 0
  if (model) {
    next_best.setConstant(0.0);
    for (int a = 0; a < model->num_actions(); ++a) {
      next_best = next_best.cwiseMax(model->predict_rows(problem.next_features, a));
    }
  }
  Eigen::VectorXd targets(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double g = 1.0 + problem.rewards[i];
    if (model && !problem.terminal[static_cast<std::size_t>(i)]) g += gamma * (next_best[i] - 1.0);
    targets[i] = std::clamp(g, 0.0, 1.0);
  }
  return targets;
}

namespace {

// Near the optimum the objective (a sum over hundreds of rows) stops
// resolving changes in the last digits and the line search can give up with
// the gradient only a little above tolerance. Such an iterate is kept and
// reported as not converged; anything further out is a real failure.
constexpr double kStallFactor = 10.0;

CatFit stalled_cat_fit(const Design& design, const FqiConfig& config, const LineSearchError& e) {
  const Eigen::Index k = static_cast<Eigen::Index>(config.bins.categories());
  const Eigen::Index d = design.features.cols();
  CatFit fit;
  fit.weights = Eigen::Map<const Eigen::MatrixXd>(e.last_iterate().data(), k, d);
  Eigen::MatrixXd grad;
  fit.report.final_objective = objectives::categorical(design, config.bins, fit.weights, &grad);
  fit.report.grad_norm = grad.norm();
  fit.report.iterations = e.iteration();
  fit.report.converged = false;
  fit.report.objective_trace = {fit.report.final_objective};
  if (!(fit.report.grad_norm <= kStallFactor * config.lbfgs.tolerance)) throw;
  return fit;
}

FitReport closed_form_report(const Design& design, const Eigen::VectorXd& w) {
  Eigen::VectorXd grad;
  FitReport r;
  r.iterations = 1;
  r.final_objective = objectives::squared(design, w, &grad);
  r.grad_norm = grad.norm();
  r.converged = true;
  r.objective_trace = {r.final_objective};
  return r;
}

}  // namespace

FqiResult run_fqi(const FqiProblem& problem, const FqiConfig& config) {
  problem.validate();
  config.validate();
  const int d = problem.feature_dim();
  LinearQModel model(config.loss, problem.num_actions, d, config.bins);

  std::vector<std::vector<Eigen::Index>> rows(static_cast<std::size_t>(problem.num_actions));
  for (Eigen::Index i = 0; i < problem.size(); ++i) {
    rows[static_cast<std::size_t>(problem.actions[static_cast<std::size_t>(i)])].push_back(i);
  }
  std::vector<Design> designs(rows.size());
  for (std::size_t a = 0; a < rows.size(); ++a) {
    designs[a].features = problem.features(rows[a], Eigen::all);
    designs[a].targets.resize(static_cast<Eigen::Index>(rows[a].size()));
    designs[a].l2 = config.l2;
  }

  std::vector<FqiFitRecord> fits;
  for (int it = 1; it <= config.iterations; ++it) {
    const Eigen::VectorXd targets = bellman_targets(&model, problem, config.gamma);
    LinearQModel next = model;
    for (int a = 0; a < problem.num_actions; ++a) {
      const auto& idx = rows[static_cast<std::size_t>(a)];
      if (idx.empty()) continue;  // unseen action keeps the zero prior
      Design& design = designs[static_cast<std::size_t>(a)];
      design.targets = targets(idx);
      FqiFitRecord rec{it, a, static_cast<int>(idx.size()), {}};
      try {
        switch (config.loss) {
          case LossKind::sq: {
            Eigen::VectorXd w = fit_sq(design);
            rec.report = closed_form_report(design, w);
            next.set_block(a, w.transpose());
            break;
          }
          case LossKind::log: {
            Eigen::VectorXd init;
            if (config.warm_start) init = model.block(a).row(0).transpose();
            LogFit fit = fit_log(design, config.newton, config.warm_start ? &init : nullptr);
            rec.report = std::move(fit.report);
            next.set_block(a, fit.weights.transpose());
            break;
          }
          case LossKind::cat: {
            CatFit fit;
            try {
              fit = fit_cat(design, config.bins, config.lbfgs, config.warm_start ? &model.block(a) : nullptr);
            } catch (const LineSearchError& e) {
              fit = stalled_cat_fit(design, config, e);
            }
            rec.report = std::move(fit.report);
            next.set_block(a, std::move(fit.weights));
            break;
          }
        }
      } catch (const std::exception& e) {
        std::ostringstream msg;
        msg << "fqi-" << to_string(config.loss) << " iteration " << it << " action " << a << " ("
            << idx.size() << " samples): " << e.what();
        throw FqiError(msg.str(), it, a);
      }
      fits.push_back(std::move(rec));
    }
    model = std::move(next);
  }
  return {GreedyPolicy(std::move(model)), std::move(fits)};
}

void write_diagnostics_csv(std::ostream& os, const std::vector<FqiFitRecord>& fits) {
  os << "iteration,action,objective,grad_norm,solver_iterations\n";
  std::ostringstream line;
  line.precision(17);
  for (const auto& f : fits) {
    line.str("");
    line << f.iteration << ',' << f.action << ',' << f.report.final_objective << ','
         << f.report.grad_norm << ',' << f.report.iterations << '\n';
    os << line.str();
  }
}

pendulum::Policy make_controller(const GreedyPolicy& policy, const FourierBasis& basis) {
  return [&policy, &basis, phi = Eigen::VectorXd(basis.size())](const pendulum::State& s) mutable {
    basis.featurize(s, phi);
    return static_cast<pendulum::Action>(policy.greedy_action(phi));
  };
}

}  // namespace vbrl
