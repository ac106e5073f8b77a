#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace vbrl {

/// A number in [0,1] together with its complement 1 - p.
///
/// The complement is stored rather than recomputed so that probabilities
/// produced by the logistic function keep full relative precision near 1;
/// `loss_log(Probability::logistic(30), y)` is exact to a few ulps where
/// `1 - sigmoid(30)` in double arithmetic would lose three digits.
class Probability {
 public:
  constexpr Probability() noexcept = default;

  /// Throws std::domain_error unless 0 <= p <= 1.
  explicit Probability(double p);

  /// sigmoid(score) with an accurately computed complement sigmoid(-score).
  static Probability logistic(double score) noexcept;

  /// Clamp an arbitrary real (NaN maps to 0) into [0,1].
  static Probability clamped(double p) noexcept;

  constexpr double value() const noexcept { return p_; }
  constexpr double complement() const noexcept { return q_; }

 private:
  constexpr Probability(double p, double q) noexcept : p_(p), q_(q) {}

  double p_ = 0.0;
  double q_ = 1.0;
};

double sigmoid(double score) noexcept;

/// log(1 + exp(x)) without overflow or underflow to zero.
double softplus(double x) noexcept;

/// Bin boundaries 0 < nu_1 < ... < nu_{K-1} < 1 partitioning [0,1] into K
/// cells [0,nu_1], (nu_1,nu_2], ..., (nu_{K-1},1]. An empty list gives K = 1.
class BinSpec {
 public:
  BinSpec() = default;

  /// Throws std::invalid_argument unless boundaries are strictly increasing
  /// and inside (0,1).
  explicit BinSpec(std::vector<double> boundaries);

  static BinSpec uniform5();     // (0.2, 0.4, 0.6, 0.8)
  static BinSpec nonuniform5();  // (0.5, 0.8, 0.95, 0.99)

  std::size_t categories() const noexcept { return boundaries_.size() + 1; }
  const std::vector<double>& boundaries() const noexcept { return boundaries_; }

  /// Zero-based cell of y using closed-right intervals.
  std::size_t bin_index(double y) const noexcept;

  /// Coefficient multiplying theta_i inside the partition sum: nu_{i+1} for
  /// the lower cells, 1 for the top cell.
  double scale(std::size_t cell) const noexcept {
    return cell < boundaries_.size() ? boundaries_[cell] : 1.0;
  }

  friend bool operator==(const BinSpec&, const BinSpec&) = default;

 private:
  std::vector<double> boundaries_;
};

struct ErrorReport {
  double ve1 = 0.0;   // mean absolute error
  double ve2 = 0.0;   // mean squared error
  double rmse = 0.0;  // sqrt(ve2)
};

// Scalar losses on [0,1].

double loss_sq(Probability x, Probability y) noexcept;

/// y log(1/x) + (1-y) log(1/(1-x)) with 0 log(inf) = 0. Returns +inf when the
/// prediction puts zero mass on a label side that y requires.
double loss_log(Probability x, Probability y) noexcept;

/// Binary KL divergence kl(p, q) with 0 log 0 = 0; +inf when q is at a
/// boundary that p does not share.
double binary_kl(Probability p, Probability q) noexcept;

/// (p-q)^2 / (p+q), with the continuous extension 0 at p = q = 0.
double triangular_deviation(Probability p, Probability q) noexcept;

/// Squared binary Hellinger distance
/// 1/2 (sqrt p - sqrt q)^2 + 1/2 (sqrt(1-p) - sqrt(1-q))^2.
double hellinger(Probability p, Probability q) noexcept;

// Reparameterized categorical family. theta has one entry per BinSpec
// category; the partition sum carries an extra reference term 1 whose
// natural parameter is pinned at zero.

using ThetaRef = Eigen::Ref<const Eigen::VectorXd>;

/// log(1 + sum_{i<K} exp(nu_i theta_i) + exp(theta_K)), max-shifted.
double log_partition(const ThetaRef& theta, const BinSpec& bins);

/// y T(y): the one-hot bin indicator of y scaled by y.
Eigen::VectorXd sufficient_stat(Probability y, const BinSpec& bins);

/// A(theta) - y T(y)^T theta.
double loss_cat(const ThetaRef& theta, Probability y, const BinSpec& bins);

/// Gradient of A.
Eigen::VectorXd cat_grad(const ThetaRef& theta, const BinSpec& bins);

/// Hessian of A: c_i c_j (p_i delta_ij - p_i p_j) with p the cell
/// probabilities and c the per-cell scales.
Eigen::MatrixXd cat_hessian(const ThetaRef& theta, const BinSpec& bins);

/// (grad A(theta))^T 1 clamped to [0,1].
Probability predicted_mean(const ThetaRef& theta, const BinSpec& bins);

/// Exact VE_1, VE_2 and rMSE of f against fstar over a finite weighted
/// context list. Throws std::invalid_argument on mismatched lengths,
/// negative weights or weights that do not sum to 1 (tolerance 1e-9).
ErrorReport ve_errors(std::span<const double> f, std::span<const double> fstar,
                      std::span<const double> weights);

namespace detail {

/// Cell probabilities p_1..p_K of the categorical family (the reference
/// cell gets 1 - sum p) and log Z. No argument validation.
struct CatCells {
  double log_partition = 0.0;
  Eigen::VectorXd probs;
};

void cat_cells(const ThetaRef& theta, const BinSpec& bins, CatCells& out);

void check_theta(const ThetaRef& theta, const BinSpec& bins);

}  // namespace detail

}  // namespace vbrl
