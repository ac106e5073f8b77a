#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "vbrl/losses.hpp"
#include "vbrl/rng.hpp"

namespace vbrl::propcheck {

struct CheckResult {
  std::string name;
  bool passed = true;
  double worst = 0.0;      // largest violation or error seen
  double tolerance = 0.0;
  long cases = 0;
  std::string counterexample;  // inputs of the worst case when the check fails
};

struct Options {
  std::uint64_t seed = 1;
  /// Added to the first component of every analytic grad A. Non-zero values
  /// exist to show that the gradient checks catch a broken gradient.
  double grad_perturbation = 0.0;
};

/// Finite discrete law of Y on [0,1].
struct Distribution {
  std::vector<double> support;
  std::vector<double> weights;
  double mean() const;
};

/// Random law with 1..8 atoms; atoms sometimes land on 0, 1 or a bin boundary.
Distribution random_distribution(Rng& rng, const BinSpec* snap_to = nullptr);
/// Random BinSpec with K categories.
BinSpec random_bins(Rng& rng, int categories);

/// E[loss_log(x,Y)] - E[loss_log(mu,Y)] against binary_kl(mu,x).
CheckResult check_kl_identity(Rng& rng, int distributions, int points, double tol = 1e-10);

/// Minimizes E[loss_cat(theta,Y)] and compares (grad A)^T 1 with E[Y].
/// K cycles through 1..10.
CheckResult check_mean_recovery(Rng& rng, int distributions, double tol = 1e-6);

/// Numerical minimizer of E[loss_cat(theta,Y)] (gradient norm <= 1e-11).
Eigen::VectorXd minimize_expected_cat(const Distribution& dist, const BinSpec& bins);

/// loss_cat with K = 1 against loss_log(sigmoid(theta), y) on a grid.
CheckResult check_k1_reduction(double tol = 1e-12);

/// 1/4 Delta <= 1/2 (sqrt p - sqrt q)^2 <= h^2 on a grid.
CheckResult check_metric_chain(int grid = 201);

/// Smallest Hessian eigenvalue of A on random theta.
CheckResult check_hessian_psd(Rng& rng, int instances, double tol = 1e-10);

/// max_i |a_i - fd_i| / max(1, max_i |fd_i|), central differences.
double gradient_error(std::span<const double> analytic, std::span<const double> numeric);

CheckResult check_log_partition_gradient(Rng& rng, int instances, double perturbation = 0.0,
                                         double tol = 1e-6);
CheckResult check_cat_loss_gradient(Rng& rng, int instances, double perturbation = 0.0,
                                    double tol = 1e-6);
CheckResult check_glm_gradient(Rng& rng, int instances, double tol = 1e-6);

/// Every suite above with default sizes.
std::vector<CheckResult> run_all(const Options& options);

/// check,passed,worst,tolerance,cases,counterexample
void write_table(std::ostream& os, std::span<const CheckResult> results);

}  // namespace vbrl::propcheck
