#include "vbrl/pendulum.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace vbrl::pendulum {

double force(Action a) noexcept {
  switch (a) {
    case Action::left: return -kForce;
    case Action::right: return kForce;
    case Action::none: return 0.0;
  }
  return 0.0;
}

double angular_acceleration(const State& s, double u) noexcept {
  const double sin_t = std::sin(s.angle);
  const double cos_t = std::cos(s.angle);
  const double num = kGravity * sin_t -
                     kAlpha * kPoleMass * kLength * s.velocity * s.velocity * std::sin(2.0 * s.angle) / 2.0 -
                     kAlpha * cos_t * u;
  const double den = 4.0 * kLength / 3.0 - kAlpha * kPoleMass * kLength * cos_t * cos_t;
  return num / den;
}

Transition step(const State& s, Action action, double noise, Integrator integrator) {
  if (is_terminal(s)) {
    throw ContractViolation("pendulum::step called on a terminal state (angle " +
                            std::to_string(s.angle) + ")");
  }
  const double accel = angular_acceleration(s, force(action) + noise);
  State next;
  next.velocity = std::clamp(s.velocity + kDt * accel, -kMaxVelocity, kMaxVelocity);
  next.angle = s.angle + kDt * (integrator == Integrator::explicit_euler ? s.velocity : next.velocity);

  Transition t;
  t.state = s;
  t.action = action;
  t.next_state = next;
  t.terminal = is_terminal(next);
  t.reward = t.terminal ? -1.0 : 0.0;
  return t;
}

State initial_state(Rng& rng) {
  std::uniform_real_distribution<double> jitter(-kInitSpread, kInitSpread);
  State s;
  s.angle = jitter(rng);
  s.velocity = jitter(rng);
  return s;
}

std::vector<Transition> collect_episode(std::uint64_t seed, Integrator integrator) {
  Rng rng(seed);
  std::uniform_int_distribution<int> pick(0, kNumActions - 1);
  std::uniform_real_distribution<double> noise(-kNoise, kNoise);

  std::vector<Transition> episode;
  State s = initial_state(rng);
  while (true) {
    const auto a = static_cast<Action>(pick(rng));
    Transition t = step(s, a, noise(rng), integrator);
    s = t.next_state;
    episode.push_back(t);
    if (t.terminal) break;
  }
  return episode;
}

double evaluate_policy(const Policy& policy, int horizon, int rollouts, std::uint64_t seed,
                       Integrator integrator) {
  if (horizon < 1) throw std::invalid_argument("evaluate_policy: horizon must be >= 1");
  if (rollouts < 1) throw std::invalid_argument("evaluate_policy: need at least one rollout");
  std::uniform_real_distribution<double> noise(-kNoise, kNoise);
  int failures = 0;
  for (int r = 0; r < rollouts; ++r) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(r)}));
    State s = initial_state(rng);
    for (int t = 0; t < horizon; ++t) {
      const Transition tr = step(s, policy(s), noise(rng), integrator);
      if (tr.terminal) {
        ++failures;
        break;
      }
      s = tr.next_state;
    }
  }
  return static_cast<double>(failures) / rollouts;
}

void write_transitions_csv(std::ostream& os, const std::vector<Transition>& transitions) {
  os << "angle,velocity,action,reward,next_angle,next_velocity,terminal\n";
  std::ostringstream line;
  line.precision(17);
  for (const Transition& t : transitions) {
    line.str("");
    line << t.state.angle << ',' << t.state.velocity << ',' << static_cast<int>(t.action) << ','
         << t.reward << ',' << t.next_state.angle << ',' << t.next_state.velocity << ','
         << (t.terminal ? 1 : 0) << '\n';
    os << line.str();
  }
}

std::vector<Transition> read_transitions_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) ||
      line.rfind("angle,velocity,action,reward,next_angle,next_velocity,terminal", 0) != 0) {
    throw std::runtime_error("transition CSV: missing or unexpected header");
  }
  std::vector<Transition> out;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::istringstream fields(line);
    std::string cell;
    double v[7];
    for (double& x : v) {
      if (!std::getline(fields, cell, ',')) {
        throw std::runtime_error("transition CSV: too few columns on line " + std::to_string(lineno));
      }
      try {
        x = std::stod(cell);
      } catch (const std::exception&) {
        throw std::runtime_error("transition CSV: bad number '" + cell + "' on line " +
                                 std::to_string(lineno));
      }
    }
    const int action = static_cast<int>(v[2]);
    if (action < 0 || action >= kNumActions || v[2] != action) {
      throw std::runtime_error("transition CSV: bad action on line " + std::to_string(lineno));
    }
    Transition t;
    t.state = {v[0], v[1]};
    t.action = static_cast<Action>(action);
    t.reward = v[3];
    t.next_state = {v[4], v[5]};
    t.terminal = v[6] != 0.0;
    out.push_back(t);
  }
  return out;
}

}  // namespace vbrl::pendulum
