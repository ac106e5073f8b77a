#include <doctest.h>

#include <cmath>
#include <sstream>

#include "vbrl/pendulum.hpp"

using namespace vbrl;
using namespace vbrl::pendulum;
using doctest::Approx;

TEST_CASE("constants and forces") {
  CHECK(kAlpha == Approx(0.1));
  CHECK(force(Action::left) == -50.0);
  CHECK(force(Action::right) == 50.0);
  CHECK(force(Action::none) == 0.0);
  CHECK_FALSE(is_terminal({kMaxAngle, 0.0}));
  CHECK(is_terminal({std::nextafter(kMaxAngle, 2.0), 0.0}));
  CHECK(is_terminal({-1.6, 0.0}));
}

TEST_CASE("angular acceleration against hand-derived values") {
  CHECK(angular_acceleration({0, 0}, 0) == 0.0);
  CHECK(angular_acceleration({0, 0}, 50) == Approx(-8.823529411764706).epsilon(1e-14));
  CHECK(angular_acceleration({0.3, 1.2}, -50) == Approx(13.264038453198704).epsilon(1e-14));
  CHECK(angular_acceleration({-1.0, -3.0}, 7.5) == Approx(-12.929873890731665).epsilon(1e-14));
  // odd symmetry
  CHECK(angular_acceleration({-0.3, -1.2}, 50) == Approx(-13.264038453198704).epsilon(1e-14));
}

TEST_CASE("upright rest is a fixed point") {
  const Transition t = step({0, 0}, Action::none, 0.0);
  CHECK(t.next_state == State{0, 0});
  CHECK_FALSE(t.terminal);
  CHECK(t.reward == 0.0);
}

TEST_CASE("integrators") {
  const State s{0.1, 0.4};
  const double acc = angular_acceleration(s, 50 + 2.5);
  const Transition semi = step(s, Action::right, 2.5);
  CHECK(semi.next_state.velocity == Approx(0.4 + 0.1 * acc).epsilon(1e-15));
  CHECK(semi.next_state.angle == Approx(0.1 + 0.1 * semi.next_state.velocity).epsilon(1e-15));
  const Transition eul = step(s, Action::right, 2.5, Integrator::explicit_euler);
  CHECK(eul.next_state.velocity == semi.next_state.velocity);
  CHECK(eul.next_state.angle == Approx(0.14).epsilon(1e-15));
}

TEST_CASE("velocity is clipped before it moves the angle") {
  const Transition t = step({0.5, 4.9}, Action::left, -10.0);
  CHECK(t.next_state.velocity == 5.0);
  CHECK(t.next_state.angle == Approx(1.0).epsilon(1e-15));
  const Transition u = step({-0.5, -4.9}, Action::right, 10.0);
  CHECK(u.next_state.velocity == -5.0);
}

TEST_CASE("falling over ends the episode with reward -1") {
  const Transition t = step({1.5, 1.0}, Action::none, 0.0);
  CHECK(t.terminal);
  CHECK(t.reward == -1.0);
  CHECK(t.next_state.angle > kMaxAngle);
  CHECK_THROWS_AS(step(t.next_state, Action::none, 0.0), ContractViolation);
  CHECK_THROWS_AS(step({-1.6, 0.0}, Action::left, 0.0), ContractViolation);
}

TEST_CASE("random episodes") {
  double total = 0;
  const int episodes = 2000;
  for (int e = 0; e < episodes; ++e) {
    const auto ep = collect_episode(derive_seed(42, {static_cast<std::uint64_t>(e)}));
    REQUIRE_FALSE(ep.empty());
    CHECK(ep.back().terminal);
    for (std::size_t i = 0; i + 1 < ep.size(); ++i) {
      CHECK_FALSE(ep[i].terminal);
      CHECK(ep[i].next_state == ep[i + 1].state);
    }
    CHECK(std::abs(ep.front().state.angle) <= kInitSpread);
    CHECK(std::abs(ep.front().state.velocity) <= kInitSpread);
    total += static_cast<double>(ep.size());
  }
  const double mean = total / episodes;
  CHECK(mean >= 4.0);
  CHECK(mean <= 10.0);

  const auto a = collect_episode(77), b = collect_episode(77);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].next_state == b[i].next_state);
}

TEST_CASE("policy evaluation") {
  const Policy push_left = [](const State&) { return Action::left; };
  CHECK(evaluate_policy(push_left, 3000, 10, 1) == 1.0);
  // lean-against controller keeps the pole up under the action noise
  const Policy balance = [](const State& s) {
    return s.angle + 0.3 * s.velocity > 0 ? Action::right : Action::left;
  };
  CHECK(evaluate_policy(balance, 3000, 10, 1) == 0.0);
  CHECK(evaluate_policy(push_left, 1, 5, 9) == evaluate_policy(push_left, 1, 5, 9));
  CHECK_THROWS_AS(evaluate_policy(balance, 0, 5, 1), std::invalid_argument);
  CHECK_THROWS_AS(evaluate_policy(balance, 10, 0, 1), std::invalid_argument);
}

TEST_CASE("transition csv round trip") {
  const auto ep = collect_episode(5);
  std::stringstream ss;
  write_transitions_csv(ss, ep);
  const auto back = read_transitions_csv(ss);
  REQUIRE(back.size() == ep.size());
  for (std::size_t i = 0; i < ep.size(); ++i) {
    CHECK(back[i].state == ep[i].state);
    CHECK(back[i].next_state == ep[i].next_state);
    CHECK(back[i].action == ep[i].action);
    CHECK(back[i].terminal == ep[i].terminal);
    CHECK(back[i].reward == ep[i].reward);
  }
  std::istringstream bad_header("a,b\n");
  CHECK_THROWS_AS(read_transitions_csv(bad_header), std::runtime_error);
  std::istringstream bad_action(
      "angle,velocity,action,reward,next_angle,next_velocity,terminal\n0,0,7,0,0,0,0\n");
  CHECK_THROWS_AS(read_transitions_csv(bad_action), std::runtime_error);
}
