#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "vbrl/fit.hpp"
#include "vbrl/losses.hpp"
#include "vbrl/rng.hpp"

namespace vbrl::counterexample {

// Two-context regression problems on which squared-loss ERM has MAE of order
// 1/sqrt(n) while log-loss ERM keeps MAE of order 1/n.
//
// Contexts x (probability 1 - 1/n) and x' (probability 1/n). Labels are
// 1 - 1/(2n) at x and Bernoulli(1/2) at x', so f*(x) = 1 - 1/(2n) and
// f*(x') = 1/2. Each class holds f* and one alternative that predicts 0 at x':
//   squared variant: psi(x) = f*(x) - 1/(3 sqrt n)
//   log variant:     phi(x) = f*(x)

enum class Variant { squared, log };
enum class Context { x = 0, x_prime = 1 };
enum class Candidate { fstar, alternative };

std::string_view to_string(Variant v) noexcept;

struct Sample {
  Context context = Context::x;
  double label = 0.0;
};

class TwoPointInstance {
 public:
  /// Throws std::invalid_argument for n < 1.
  TwoPointInstance(int n, Variant variant);

  int n() const noexcept { return n_; }
  Variant variant() const noexcept { return variant_; }

  double context_prob(Context c) const noexcept;
  double fstar(Context c) const noexcept;
  double alternative(Context c) const noexcept;
  double value(Candidate f, Context c) const noexcept {
    return f == Candidate::fstar ? fstar(c) : alternative(c);
  }

  /// 1 - v* = 1 - E[f*(X)].
  double suboptimality_of_max() const noexcept;

  /// VE_1 / VE_2 / rMSE of a class member against f*.
  ErrorReport errors(Candidate f) const;

 private:
  int n_;
  Variant variant_;
};

/// n i.i.d. draws from the instance. Reproducible per seed.
std::vector<Sample> sample_instance(const TwoPointInstance& inst, std::uint64_t seed);
void sample_instance(const TwoPointInstance& inst, Rng& rng, std::vector<Sample>& out);

struct DatasetSummary {
  int size = 0;
  int x_prime_count = 0;  // N2
  int x_prime_ones = 0;   // labels equal to 1 among the x' draws
};

struct ErmOutcome {
  Candidate chosen = Candidate::fstar;
  double loss_fstar = 0.0;        // may be +inf under the log-loss
  double loss_alternative = 0.0;  // may be +inf under the log-loss
  DatasetSummary summary;
};

/// Exact empirical risk minimization over {f*, alternative} under the sq or
/// log loss, with extended-real comparison and ties resolved to f*.
ErmOutcome erm(std::span<const Sample> data, const TwoPointInstance& inst, LossKind loss);

/// Loss paired with a variant: sq for the squared variant, log for the log variant.
LossKind natural_loss(Variant v) noexcept;

struct McRow {
  Variant variant = Variant::squared;
  int n = 0;
  int trials = 0;
  double p_bad = 0.0;  // P[ERM picks the alternative]
  double p_bad_se = 0.0;
  double mae_mean = 0.0;
  double mae_se = 0.0;
  double rmse_mean = 0.0;
  double rmse_se = 0.0;
  double conditional_mae = 0.0;   // MAE on trials where the alternative was picked
  double conditional_rmse = 0.0;  // rMSE on the same trials
  bool conditional_constant = true;  // every bad trial had the same MAE/rMSE
  double p_event = 0.0;        // P[N2 = 1 and that label is 0]
  int event_misses = 0;        // event trials where ERM still chose f*
  int jensen_violations = 0;   // trials with ve1 > rmse
};

/// Monte Carlo over `trials` datasets per n; trial t at size n uses
/// derive_seed(seed, {n, t}). Results do not depend on `jobs`.
/// Throws std::invalid_argument when trials < 1.
std::vector<McRow> mc_verify(Variant variant, std::span<const int> ns, int trials,
                             std::uint64_t seed, int jobs = 1);

/// Least-squares slope of log(values) against log(ns).
double loglog_slope(std::span<const int> ns, std::span<const double> values);

/// Columns: variant,n,trials,p_bad,p_bad_se,mae_mean,mae_se,rmse_mean,
/// rmse_se,conditional_mae,conditional_rmse
void write_mc_csv(std::ostream& os, std::span<const McRow> rows);

}  // namespace vbrl::counterexample
