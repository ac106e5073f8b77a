#include "vbrl/propcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "vbrl/fit.hpp"
#include "vbrl/optim.hpp"

namespace vbrl::propcheck {
namespace {

// Record `error` for one case; keeps the description of the worst one.
struct Tracker {
  CheckResult result;

  Tracker(std::string name, double tol) {
    result.name = std::move(name);
    result.tolerance = tol;
  }

  template <class Describe>
  void add(double error, Describe&& describe) {
    ++result.cases;
    if (!(error <= result.worst)) {  // NaN counts as worst
      result.worst = std::isnan(error) ? std::numeric_limits<double>::infinity() : error;
      if (!(error <= result.tolerance)) result.counterexample = describe();
    }
  }

  CheckResult finish() {
    result.passed = result.worst <= result.tolerance;
    if (result.passed) result.counterexample.clear();
    return std::move(result);
  }
};

std::string describe_vector(const Eigen::VectorXd& v) {
  std::ostringstream os;
  os.precision(17);
  os << '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i];
  os << ']';
  return os.str();
}

std::string describe(const Distribution& d) {
  std::ostringstream os;
  os.precision(17);
  os << "Y~{";
  for (std::size_t i = 0; i < d.support.size(); ++i) {
    os << (i ? " " : "") << d.support[i] << ':' << d.weights[i];
  }
  os << '}';
  return os.str();
}

std::string describe(const BinSpec& bins) {
  return "bins=" + describe_vector(Eigen::Map<const Eigen::VectorXd>(
                       bins.boundaries().data(), static_cast<Eigen::Index>(bins.boundaries().size())));
}

Eigen::VectorXd random_theta(Rng& rng, Eigen::Index k, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::VectorXd theta(k);
  for (auto& t : theta) t = normal(rng);
  return theta;
}

constexpr int kGradientSizes[] = {1, 2, 5, 10};

}  // namespace

double Distribution::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) m += weights[i] * support[i];
  return m;
}

Distribution random_distribution(Rng& rng, const BinSpec* snap_to) {
  std::uniform_int_distribution<int> atoms(1, 8);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Distribution d;
  const int m = atoms(rng);
  for (int i = 0; i < m; ++i) {
    const double u = unit(rng);
    double y = unit(rng);
    if (u < 0.1) {
      y = 0.0;
    } else if (u < 0.2) {
      y = 1.0;
    } else if (u < 0.35 && snap_to && !snap_to->boundaries().empty()) {
      const auto& b = snap_to->boundaries();
      y = b[std::uniform_int_distribution<std::size_t>(0, b.size() - 1)(rng)];
    }
    d.support.push_back(y);
    d.weights.push_back(unit(rng) + 1e-3);
  }
  const double total = std::accumulate(d.weights.begin(), d.weights.end(), 0.0);
  for (double& w : d.weights) w /= total;
  return d;
}

BinSpec random_bins(Rng& rng, int categories) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> b;
  while (static_cast<int>(b.size()) < categories - 1) {
    const double v = unit(rng);
    if (v > 0.0 && std::find(b.begin(), b.end(), v) == b.end()) b.push_back(v);
  }
  std::sort(b.begin(), b.end());
  return BinSpec(std::move(b));
}

CheckResult check_kl_identity(Rng& rng, int distributions, int points, double tol) {
  Tracker t("kl_identity", tol);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < distributions; ++i) {
    const Distribution d = random_distribution(rng);
    const Probability mu = Probability::clamped(d.mean());
    double at_mean = 0.0;
    for (std::size_t j = 0; j < d.support.size(); ++j) {
      at_mean += d.weights[j] * loss_log(mu, Probability(d.support[j]));
    }
    for (int k = 0; k < points; ++k) {
      double xv = unit(rng);
      while (xv == 0.0) xv = unit(rng);
      const Probability x(xv);
      double at_x = 0.0;
      for (std::size_t j = 0; j < d.support.size(); ++j) {
        at_x += d.weights[j] * loss_log(x, Probability(d.support[j]));
      }
      const double err = std::abs((at_x - at_mean) - binary_kl(mu, x));
      t.add(err, [&] {
        std::ostringstream os;
        os.precision(17);
        os << describe(d) << " x=" << xv;
        return os.str();
      });
    }
  }
  return t.finish();
}

Eigen::VectorXd minimize_expected_cat(const Distribution& dist, const BinSpec& bins) {
  const auto k = static_cast<Eigen::Index>(bins.categories());
  Eigen::VectorXd stat = Eigen::VectorXd::Zero(k);  // E[y T(y)]
  for (std::size_t j = 0; j < dist.support.size(); ++j) {
    stat += dist.weights[j] * sufficient_stat(Probability(dist.support[j]), bins);
  }
  const SmoothObjective objective = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& grad) {
    grad = cat_grad(theta, bins) - stat;
    return log_partition(theta, bins) - stat.dot(theta);
  };
  LbfgsOptions opt;
  opt.tolerance = 1e-11;
  opt.max_iterations = 20000;
  try {
    return minimize_lbfgs(objective, Eigen::VectorXd::Zero(k), opt).x;
  } catch (const LineSearchError& e) {
    // Stalled at rounding level; the caller judges the iterate.
    return e.last_iterate();
  }
}

CheckResult check_mean_recovery(Rng& rng, int distributions, double tol) {
  Tracker t("mean_recovery", tol);
  for (int i = 0; i < distributions; ++i) {
    const BinSpec bins = random_bins(rng, 1 + i % 10);
    const Distribution d = random_distribution(rng, &bins);
    const Eigen::VectorXd theta = minimize_expected_cat(d, bins);
    const double err = std::abs(predicted_mean(theta, bins).value() - d.mean());
    t.add(err, [&] { return describe(d) + " " + describe(bins) + " theta=" + describe_vector(theta); });
  }
  return t.finish();
}

CheckResult check_k1_reduction(double tol) {
  Tracker t("k1_reduction", tol);
  const BinSpec one;
  Eigen::VectorXd theta(1);
  for (int i = 0; i <= 600; ++i) {
    theta[0] = -30.0 + 0.1 * i;
    const Probability x = Probability::logistic(theta[0]);
    for (int j = 0; j <= 100; ++j) {
      const Probability y(j / 100.0);
      const double err = std::abs(loss_cat(theta, y, one) - loss_log(x, y));
      t.add(err, [&] {
        std::ostringstream os;
        os.precision(17);
        os << "theta=" << theta[0] << " y=" << y.value();
        return os.str();
      });
    }
  }
  return t.finish();
}

CheckResult check_metric_chain(int grid) {
  Tracker t("metric_chain", 1e-15);
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      const Probability p(static_cast<double>(i) / (grid - 1));
      const Probability q(static_cast<double>(j) / (grid - 1));
      const double quarter_delta = 0.25 * triangular_deviation(p, q);
      const double d = std::sqrt(p.value()) - std::sqrt(q.value());
      const double middle = 0.5 * d * d;
      const double h2 = hellinger(p, q);
      const double violation = std::max({quarter_delta - middle, middle - h2, 0.0});
      t.add(violation, [&] {
        std::ostringstream os;
        os.precision(17);
        os << "p=" << p.value() << " q=" << q.value() << " Delta/4=" << quarter_delta
           << " h2=" << h2;
        return os.str();
      });
    }
  }
  return t.finish();
}

CheckResult check_hessian_psd(Rng& rng, int instances, double tol) {
  Tracker t("hessian_psd", tol);
  for (int i = 0; i < instances; ++i) {
    const int k = kGradientSizes[i % 4];
    const BinSpec bins = random_bins(rng, k);
    const Eigen::VectorXd theta = random_theta(rng, k, 5.0);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cat_hessian(theta, bins),
                                                            Eigen::EigenvaluesOnly);
    const double violation = std::max(0.0, -eig.eigenvalues().minCoeff());
    t.add(violation, [&] { return describe(bins) + " theta=" + describe_vector(theta); });
  }
  return t.finish();
}

double gradient_error(std::span<const double> analytic, std::span<const double> numeric) {
  double diff = 0.0, scale = 1.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    diff = std::max(diff, std::abs(analytic[i] - numeric[i]));
    scale = std::max(scale, std::abs(numeric[i]));
  }
  return diff / scale;
}

namespace {

template <class F>
Eigen::VectorXd central_difference(F&& f, const Eigen::VectorXd& x) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = 1e-5 * std::max(1.0, std::abs(x[i]));
    xp[i] = x[i] + h;
    const double up = f(xp);
    xp[i] = x[i] - h;
    const double down = f(xp);
    xp[i] = x[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

double error_of(const Eigen::VectorXd& a, const Eigen::VectorXd& n) {
  return gradient_error({a.data(), static_cast<std::size_t>(a.size())},
                        {n.data(), static_cast<std::size_t>(n.size())});
}

}  // namespace

CheckResult check_log_partition_gradient(Rng& rng, int instances, double perturbation, double tol) {
  Tracker t("grad_log_partition", tol);
  for (int i = 0; i < instances; ++i) {
    const int k = kGradientSizes[i % 4];
    const BinSpec bins = random_bins(rng, k);
    const Eigen::VectorXd theta = random_theta(rng, k, 3.0);
    Eigen::VectorXd analytic = cat_grad(theta, bins);
    analytic[0] += perturbation;
    const Eigen::VectorXd numeric =
        central_difference([&](const Eigen::VectorXd& th) { return log_partition(th, bins); }, theta);
    t.add(error_of(analytic, numeric),
          [&] { return describe(bins) + " theta=" + describe_vector(theta); });
  }
  return t.finish();
}

CheckResult check_cat_loss_gradient(Rng& rng, int instances, double perturbation, double tol) {
  Tracker t("grad_cat_loss", tol);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < instances; ++i) {
    const int k = kGradientSizes[i % 4];
    const BinSpec bins = random_bins(rng, k);
    const Eigen::VectorXd theta = random_theta(rng, k, 3.0);
    const Probability y(unit(rng));
    Eigen::VectorXd analytic = cat_grad(theta, bins) - sufficient_stat(y, bins);
    analytic[0] += perturbation;
    const Eigen::VectorXd numeric =
        central_difference([&](const Eigen::VectorXd& th) { return loss_cat(th, y, bins); }, theta);
    t.add(error_of(analytic, numeric), [&] {
      std::ostringstream os;
      os.precision(17);
      os << describe(bins) << " theta=" << describe_vector(theta) << " y=" << y.value();
      return os.str();
    });
  }
  return t.finish();
}

CheckResult check_glm_gradient(Rng& rng, int instances, double tol) {
  Tracker t("grad_glm", tol);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> rows(5, 40), cols(1, 8);
  for (int i = 0; i < instances; ++i) {
    Design design;
    const int n = rows(rng), d = cols(rng);
    design.features = Eigen::MatrixXd(n, d);
    for (auto& v : design.features.reshaped()) v = 2.0 * unit(rng) - 1.0;
    design.targets = Eigen::VectorXd(n);
    for (auto& v : design.targets) v = unit(rng);
    design.l2 = unit(rng);
    const Eigen::VectorXd w = random_theta(rng, d, 1.0);
    Eigen::VectorXd analytic;
    objectives::logistic(design, w, &analytic);
    const Eigen::VectorXd numeric = central_difference(
        [&](const Eigen::VectorXd& x) { return objectives::logistic(design, x); }, w);
    t.add(error_of(analytic, numeric), [&] {
      std::ostringstream os;
      os << n << "x" << d << " design, w=" << describe_vector(w);
      return os.str();
    });
  }
  return t.finish();
}

std::vector<CheckResult> run_all(const Options& options) {
  Rng rng(options.seed);
  std::vector<CheckResult> out;
  out.push_back(check_kl_identity(rng, 500, 50));
  out.push_back(check_mean_recovery(rng, 200));
  out.push_back(check_k1_reduction());
  out.push_back(check_metric_chain());
  out.push_back(check_hessian_psd(rng, 100));
  out.push_back(check_log_partition_gradient(rng, 100, options.grad_perturbation));
  out.push_back(check_cat_loss_gradient(rng, 100, options.grad_perturbation));
  out.push_back(check_glm_gradient(rng, 100));
  return out;
}

void write_table(std::ostream& os, std::span<const CheckResult> results) {
  os << "check,passed,worst,tolerance,cases,counterexample\n";
  std::ostringstream line;
  line.precision(6);
  for (const auto& r : results) {
    line.str("");
    line << r.name << ',' << (r.passed ? "pass" : "FAIL") << ',' << r.worst << ',' << r.tolerance
         << ',' << r.cases << ",\"" << r.counterexample << "\"\n";
    os << line.str();
  }
}

}  // namespace vbrl::propcheck
