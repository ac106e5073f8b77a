#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "vbrl/rng.hpp"

namespace vbrl::pendulum {

// Inverted pendulum on a cart (Lagoudakis and Parr, 2003) with termination
// below horizontal and angular velocity clipped to [-5, 5].

inline constexpr double kGravity = 9.8;
inline constexpr double kPoleMass = 2.0;
inline constexpr double kCartMass = 8.0;
inline constexpr double kLength = 0.5;
inline constexpr double kAlpha = 1.0 / (kPoleMass + kCartMass);
inline constexpr double kForce = 50.0;
inline constexpr double kNoise = 10.0;  // action noise ~ Uniform[-kNoise, kNoise]
inline constexpr double kDt = 0.1;
inline constexpr double kMaxVelocity = 5.0;
inline constexpr double kMaxAngle = std::numbers::pi / 2.0;
inline constexpr double kInitSpread = 0.05;
inline constexpr double kGamma = 0.99;

struct State {
  double angle = 0.0;     // radians, 0 = upright
  double velocity = 0.0;  // radians / second

  friend bool operator==(const State&, const State&) = default;
};

/// |angle| > pi/2; equality is still upright.
inline bool is_terminal(const State& s) noexcept { return std::abs(s.angle) > kMaxAngle; }

enum class Action : int { left = 0, right = 1, none = 2 };
inline constexpr int kNumActions = 3;

/// Applied force in newtons before noise: left -50, right +50, none 0.
double force(Action a) noexcept;

struct Transition {
  State state;
  Action action = Action::none;
  double reward = 0.0;  // -1 on the terminal step, 0 otherwise
  State next_state;
  bool terminal = false;
};

enum class Integrator {
  semi_implicit,   // angle advanced with the updated, clipped velocity (default)
  explicit_euler,  // angle advanced with the pre-update velocity
};

class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Angular acceleration under total force u.
double angular_acceleration(const State& s, double u) noexcept;

/// One Euler step of dt under force(action) + noise. Throws
/// ContractViolation when `s` is already terminal.
Transition step(const State& s, Action action, double noise,
                Integrator integrator = Integrator::semi_implicit);

/// Uniform-random behaviour from a perturbed upright start until the
/// pendulum falls. Deterministic in `seed`.
std::vector<Transition> collect_episode(std::uint64_t seed,
                                        Integrator integrator = Integrator::semi_implicit);

using Policy = std::function<Action(const State&)>;

/// Fraction of `rollouts` seeded rollouts that fall before `horizon` steps.
double evaluate_policy(const Policy& policy, int horizon, int rollouts, std::uint64_t seed,
                       Integrator integrator = Integrator::semi_implicit);

/// Start state drawn uniformly from [-0.05, 0.05]^2.
State initial_state(Rng& rng);

// CSV columns: angle,velocity,action,reward,next_angle,next_velocity,terminal
void write_transitions_csv(std::ostream& os, const std::vector<Transition>& transitions);
std::vector<Transition> read_transitions_csv(std::istream& is);

}  // namespace vbrl::pendulum
