#include "vbrl/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace vbrl {

Probability::Probability(double p) : p_(p), q_(1.0 - p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::domain_error("probability outside [0,1]: " + std::to_string(p));
  }
}

Probability Probability::logistic(double score) noexcept {
  if (score >= 0.0) {
    const double e = std::exp(-score);
    return {1.0 / (1.0 + e), e / (1.0 + e)};
  }
  const double e = std::exp(score);
  return {e / (1.0 + e), 1.0 / (1.0 + e)};
}

Probability Probability::clamped(double p) noexcept {
  if (!(p > 0.0)) return {0.0, 1.0};
  if (p >= 1.0) return {1.0, 0.0};
  return {p, 1.0 - p};
}

double sigmoid(double score) noexcept { return Probability::logistic(score).value(); }

double softplus(double x) noexcept {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

BinSpec::BinSpec(std::vector<double> boundaries) : boundaries_(std::move(boundaries)) {
  for (std::size_t i = 0; i < boundaries_.size(); ++i) {
    const double b = boundaries_[i];
    if (!(b > 0.0 && b < 1.0)) {
      throw std::invalid_argument("bin boundary outside (0,1): " + std::to_string(b));
    }
    if (i > 0 && !(b > boundaries_[i - 1])) {
      throw std::invalid_argument("bin boundaries must be strictly increasing");
    }
  }
}

BinSpec BinSpec::uniform5() { return BinSpec({0.2, 0.4, 0.6, 0.8}); }

BinSpec BinSpec::nonuniform5() { return BinSpec({0.5, 0.8, 0.95, 0.99}); }

std::size_t BinSpec::bin_index(double y) const noexcept {
  // Number of boundaries strictly below y; y == nu_i stays in cell i-1.
  return static_cast<std::size_t>(
      std::lower_bound(boundaries_.begin(), boundaries_.end(), y) - boundaries_.begin());
}

double loss_sq(Probability x, Probability y) noexcept {
  const double d = x.value() - y.value();
  return d * d;
}

double loss_log(Probability x, Probability y) noexcept {
  double loss = 0.0;
  if (y.value() > 0.0) loss += y.value() * -std::log(x.value());
  if (y.complement() > 0.0) loss += y.complement() * -std::log(x.complement());
  return loss;
}

double binary_kl(Probability p, Probability q) noexcept {
  double kl = 0.0;
  if (p.value() > 0.0) kl += p.value() * (std::log(p.value()) - std::log(q.value()));
  if (p.complement() > 0.0) {
    kl += p.complement() * (std::log(p.complement()) - std::log(q.complement()));
  }
  return kl;
}

double triangular_deviation(Probability p, Probability q) noexcept {
  const double s = p.value() + q.value();
  if (s == 0.0) return 0.0;
  const double d = p.value() - q.value();
  return d * d / s;
}

double hellinger(Probability p, Probability q) noexcept {
  const double a = std::sqrt(p.value()) - std::sqrt(q.value());
  const double b = std::sqrt(p.complement()) - std::sqrt(q.complement());
  return 0.5 * a * a + 0.5 * b * b;
}

namespace detail {

void check_theta(const ThetaRef& theta, const BinSpec& bins) {
  if (static_cast<std::size_t>(theta.size()) != bins.categories()) {
    throw std::invalid_argument("natural parameter length " + std::to_string(theta.size()) +
                                " does not match K = " + std::to_string(bins.categories()));
  }
  if (!theta.allFinite()) throw std::invalid_argument("natural parameters must be finite");
}

void cat_cells(const ThetaRef& theta, const BinSpec& bins, CatCells& out) {
  const Eigen::Index k = theta.size();
  out.probs.resize(k);
  // Exponents z_i = c_i theta_i; the reference cell has z = 0.
  double zmax = 0.0;
  Eigen::Index imax = -1;
  for (Eigen::Index i = 0; i < k; ++i) {
    const double z = bins.scale(static_cast<std::size_t>(i)) * theta[i];
    out.probs[i] = z;
    if (z > zmax) {
      zmax = z;
      imax = i;
    }
  }
  // Sum of the shifted terms other than the largest, so that log1p keeps
  // tails such as log(1 + e^-40) away from zero.
  double rest = imax >= 0 ? std::exp(-zmax) : 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    out.probs[i] = std::exp(out.probs[i] - zmax);
    if (i != imax) rest += out.probs[i];
  }
  out.log_partition = zmax + std::log1p(rest);
  out.probs /= (1.0 + rest);
}

}  // namespace detail

double log_partition(const ThetaRef& theta, const BinSpec& bins) {
  detail::check_theta(theta, bins);
  detail::CatCells cells;
  detail::cat_cells(theta, bins, cells);
  return cells.log_partition;
}

Eigen::VectorXd sufficient_stat(Probability y, const BinSpec& bins) {
  Eigen::VectorXd stat = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(bins.categories()));
  stat[static_cast<Eigen::Index>(bins.bin_index(y.value()))] = y.value();
  return stat;
}

double loss_cat(const ThetaRef& theta, Probability y, const BinSpec& bins) {
  const double a = log_partition(theta, bins);
  return a - y.value() * theta[static_cast<Eigen::Index>(bins.bin_index(y.value()))];
}

Eigen::VectorXd cat_grad(const ThetaRef& theta, const BinSpec& bins) {
  detail::check_theta(theta, bins);
  detail::CatCells cells;
  detail::cat_cells(theta, bins, cells);
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    cells.probs[i] *= bins.scale(static_cast<std::size_t>(i));
  }
  return cells.probs;
}

Eigen::MatrixXd cat_hessian(const ThetaRef& theta, const BinSpec& bins) {
  detail::check_theta(theta, bins);
  detail::CatCells cells;
  detail::cat_cells(theta, bins, cells);
  const Eigen::Index k = theta.size();
  Eigen::VectorXd cp(k);
  for (Eigen::Index i = 0; i < k; ++i) cp[i] = bins.scale(static_cast<std::size_t>(i)) * cells.probs[i];
  Eigen::MatrixXd h = -cp * cp.transpose();
  for (Eigen::Index i = 0; i < k; ++i) {
    const double c = bins.scale(static_cast<std::size_t>(i));
    h(i, i) += c * cp[i];
  }
  return h;
}

Probability predicted_mean(const ThetaRef& theta, const BinSpec& bins) {
  return Probability::clamped(cat_grad(theta, bins).sum());
}

ErrorReport ve_errors(std::span<const double> f, std::span<const double> fstar,
                      std::span<const double> weights) {
  if (f.size() != fstar.size() || f.size() != weights.size()) {
    throw std::invalid_argument("ve_errors: length mismatch");
  }
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("ve_errors: negative or NaN weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("ve_errors: weights sum to " + std::to_string(total) + ", not 1");
  }
  ErrorReport r;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double gap = std::abs(f[i] - fstar[i]);
    r.ve1 += weights[i] * gap;
    r.ve2 += weights[i] * gap * gap;
  }
  r.rmse = std::sqrt(r.ve2);
  return r;
}

}  // namespace vbrl
