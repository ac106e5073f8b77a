#include <doctest.h>

#include <algorithm>
#include <array>
#include <sstream>

#include "vbrl/fqi.hpp"

using namespace vbrl;
using doctest::Approx;

namespace {

// Four-state chain. Action 0 moves left, 1 moves right. Stepping off either
// end is terminal with reward 0; every move inside the chain costs 0.1.
constexpr int kStates = 4;

struct ChainStep {
  int next;  // -1 when the move leaves the chain
  double reward;
};

ChainStep chain_step(int s, int a) {
  const int n = s + (a == 0 ? -1 : 1);
  if (n < 0 || n >= kStates) return {-1, 0.0};
  return {n, -0.1};
}

// Plain value iteration on the untransformed values.
std::array<std::array<double, 2>, kStates> chain_q(double gamma) {
  std::array<double, kStates> v{};
  std::array<std::array<double, 2>, kStates> q{};
  for (int sweep = 0; sweep < 1000; ++sweep) {
    for (int s = 0; s < kStates; ++s) {
      for (int a = 0; a < 2; ++a) {
        const ChainStep t = chain_step(s, a);
        q[s][a] = t.reward + (t.next < 0 ? 0.0 : gamma * v[t.next]);
      }
    }
    for (int s = 0; s < kStates; ++s) v[s] = std::max(q[s][0], q[s][1]);
  }
  return q;
}

FqiProblem chain_problem(int copies) {
  FqiProblem p;
  p.num_actions = 2;
  const int n = kStates * 2 * copies;
  p.features = Eigen::MatrixXd::Zero(n, kStates);
  p.next_features = Eigen::MatrixXd::Zero(n, kStates);
  p.rewards.resize(n);
  int row = 0;
  for (int c = 0; c < copies; ++c) {
    for (int s = 0; s < kStates; ++s) {
      for (int a = 0; a < 2; ++a, ++row) {
        const ChainStep t = chain_step(s, a);
        p.features(row, s) = 1.0;
        if (t.next >= 0) p.next_features(row, t.next) = 1.0;
        p.actions.push_back(a);
        p.rewards[row] = t.reward;
        p.terminal.push_back(t.next < 0 ? 1 : 0);
      }
    }
  }
  return p;
}

}  // namespace

TEST_CASE("value iteration oracle") {
  const auto q = chain_q(0.9);
  CHECK(q[0][0] == 0.0);
  CHECK(q[1][0] == Approx(-0.1));
  CHECK(q[1][1] == Approx(-0.1 - 0.9 * 0.1));
  CHECK(q[3][1] == 0.0);
}

TEST_CASE("all three losses recover the chain policy") {
  const double gamma = 0.9;
  const auto q = chain_q(gamma);
  const FqiProblem p = chain_problem(3);
  for (LossKind loss : {LossKind::sq, LossKind::log, LossKind::cat}) {
    CAPTURE(to_string(loss));
    FqiConfig cfg;
    cfg.loss = loss;
    cfg.gamma = gamma;
    cfg.iterations = 50;
    cfg.l2 = loss == LossKind::sq ? 1e-8 : 1e-6;
    const FqiResult r = run_fqi(p, cfg);
    CHECK(r.fits.size() == 100);
    for (int s = 0; s < kStates; ++s) {
      const Eigen::VectorXd phi = Eigen::VectorXd::Unit(kStates, s);
      const int want = q[s][0] >= q[s][1] ? 0 : 1;
      CHECK(greedy_action(r.policy, phi) == want);
      for (int a = 0; a < 2; ++a) {
        // g = 1 + v on the transformed scale
        const double tol = loss == LossKind::sq ? 1e-6 : 2e-3;
        CHECK(std::abs(predict(r.policy.model(), phi, a).value() - (1.0 + q[s][a])) < tol);
      }
    }
  }
}

TEST_CASE("bellman targets") {
  const FqiProblem p = chain_problem(1);
  const Eigen::VectorXd first = bellman_targets(nullptr, p, 0.9);
  for (Eigen::Index i = 0; i < p.size(); ++i) CHECK(first[i] == Approx(1.0 + p.rewards[i]));

  // zero squared model predicts g = 0 everywhere
  LinearQModel zero(LossKind::sq, 2, kStates);
  const Eigen::VectorXd t = bellman_targets(&zero, p, 0.9);
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double want = p.terminal[static_cast<std::size_t>(i)] ? 1.0 : 1.0 - 0.1 - 0.9;
    CHECK(t[i] == Approx(want).epsilon(1e-15));
  }

  // clipping to [0,1]
  FqiProblem big = p;
  big.rewards.setConstant(-3.0);
  CHECK(bellman_targets(nullptr, big, 0.9).maxCoeff() == 0.0);
}

TEST_CASE("myopic squared fqi averages the transformed rewards") {
  // intercept-only features, gamma = 0: each action's value is its mean of 1 + r
  FqiProblem p;
  p.num_actions = 2;
  const double r[] = {0.0, -1.0, 0.0, -0.5, -0.25, 0.0};
  p.features = Eigen::MatrixXd::Ones(6, 1);
  p.next_features = Eigen::MatrixXd::Ones(6, 1);
  p.rewards = Eigen::Map<const Eigen::VectorXd>(r, 6);
  p.actions = {0, 0, 0, 1, 1, 1};
  p.terminal = {0, 1, 0, 0, 0, 0};
  FqiConfig cfg;
  cfg.gamma = 0.0;
  cfg.l2 = 0.0;
  cfg.iterations = 3;
  const FqiResult res = run_fqi(p, cfg);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(1);
  CHECK(predict(res.policy.model(), one, 0).value() == Approx(2.0 / 3).epsilon(1e-14));
  CHECK(predict(res.policy.model(), one, 1).value() == Approx(0.75).epsilon(1e-14));
}

TEST_CASE("greedy ties go to the lowest action") {
  GreedyPolicy pol(LinearQModel(LossKind::log, 3, 2));
  CHECK(pol.greedy_action(Eigen::Vector2d(1, 0)) == 0);
}

TEST_CASE("pendulum batch") {
  const BatchDataset d = BatchDataset::collect(20, 123);
  CHECK(d.episodes() == 20);
  CHECK(d.episode_starts.front() == 0);
  std::size_t terminals = 0;
  for (const auto& t : d.transitions) terminals += t.terminal ? 1 : 0;
  CHECK(terminals == 20);
  const BatchDataset again = BatchDataset::collect(20, 123);
  CHECK(again.transitions.size() == d.transitions.size());
  CHECK(again.transitions.back().next_state == d.transitions.back().next_state);

  const BatchDataset split = BatchDataset::from_transitions(d.transitions);
  CHECK(split.episode_starts == d.episode_starts);

  auto open = d.transitions;
  open.pop_back();
  CHECK_THROWS_AS(BatchDataset::from_transitions(open), std::invalid_argument);
  auto wrong = d.transitions;
  wrong.front().reward = -1.0;
  CHECK_THROWS_AS(BatchDataset::from_transitions(wrong), std::invalid_argument);
  CHECK_THROWS_AS(BatchDataset::collect(0, 1), std::invalid_argument);

  const FourierBasis basis(2);
  const FqiProblem p = make_problem(d, basis);
  CHECK(p.size() == static_cast<Eigen::Index>(d.transitions.size()));
  CHECK(p.feature_dim() == 9);
  CHECK(p.num_actions == 3);
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p.terminal[static_cast<std::size_t>(i)]) {
      CHECK(p.next_features.row(i).isZero());
      CHECK(p.rewards[i] == -1.0);
    } else {
      CHECK(p.next_features(i, 0) == 1.0);
    }
  }
}

TEST_CASE("config defaults and validation") {
  CHECK(default_l2(LossKind::sq) == 1e-6);
  CHECK(default_l2(LossKind::log) == 1e-6);
  CHECK(default_l2(LossKind::cat) == 1e-4);
  FqiConfig c;
  CHECK(c.bins == BinSpec::nonuniform5());
  c.gamma = 1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.gamma = 0.99;
  c.iterations = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("solver failure names the iteration") {
  FqiProblem p = chain_problem(1);
  p.features.col(3) = p.features.col(2);  // duplicate column, no ridge
  FqiConfig cfg;
  cfg.l2 = 0.0;
  try {
    run_fqi(p, cfg);
    FAIL("expected FqiError");
  } catch (const FqiError& e) {
    CHECK(e.iteration() == 1);
    CHECK(e.action() == 0);
    CHECK(std::string(e.what()).find("fqi-sq iteration 1") != std::string::npos);
  }
}

TEST_CASE("diagnostics and controller") {
  const BatchDataset d = BatchDataset::collect(30, 8);
  const FourierBasis basis(2);
  FqiConfig cfg;
  cfg.loss = LossKind::log;
  cfg.l2 = 10.0;
  cfg.iterations = 3;
  const FqiResult r = run_fqi(make_problem(d, basis), cfg);
  std::ostringstream os;
  write_diagnostics_csv(os, r.fits);
  const std::string csv = os.str();
  CHECK(csv.rfind("iteration,action,objective,grad_norm,solver_iterations\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 9);

  const auto ctrl = make_controller(r.policy, basis);
  const pendulum::State s{0.2, -0.4};
  CHECK(static_cast<int>(ctrl(s)) == greedy_action(r.policy, basis.featurize(s)));
}
