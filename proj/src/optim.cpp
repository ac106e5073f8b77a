#include "vbrl/optim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

namespace vbrl {
namespace {

struct TrialPoint {
  double step = 0.0;
  double f = 0.0;
  double slope = 0.0;  // directional derivative g(x + step d)^T d
  Eigen::VectorXd grad;
};

// Minimizer of the cubic through (a, fa, da) and (b, fb, db), or NaN.
double cubic_minimizer(double a, double fa, double da, double b, double fb, double db) {
  const double d1 = da + db - 3.0 * (fa - fb) / (a - b);
  const double disc = d1 * d1 - da * db;
  if (!(disc >= 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const double d2 = std::copysign(std::sqrt(disc), b - a);
  return b - (b - a) * (db + d2 - d1) / (db - da + 2.0 * d2);
}

class WolfeSearch {
 public:
  WolfeSearch(const SmoothObjective& objective, const LbfgsOptions& opt, const Eigen::VectorXd& x,
              const Eigen::VectorXd& dir, double f0, double slope0)
      : objective_(objective), opt_(opt), x_(x), dir_(dir), f0_(f0), slope0_(slope0),
        noise_(opt.noise_tolerance * (1.0 + std::abs(f0))) {}

  // Returns false when no step satisfying the conditions was found.
  bool search(double initial_step, TrialPoint& out) {
    TrialPoint prev{0.0, f0_, slope0_, {}};
    double step = initial_step;
    for (int i = 0; i < opt_.max_line_search; ++i) {
      TrialPoint cur = evaluate(step);
      if (!decreases(cur) || (i > 0 && cur.f >= prev.f && !approx_wolfe(cur))) {
        return zoom(prev, cur, out);
      }
      if (curvature(cur)) {
        out = std::move(cur);
        return true;
      }
      if (cur.slope >= 0.0) return zoom(cur, prev, out);
      prev = std::move(cur);
      step *= 2.0;
    }
    return false;
  }

 private:
  TrialPoint evaluate(double step) {
    TrialPoint p;
    p.step = step;
    p.grad.resize(x_.size());
    p.f = objective_(x_ + step * dir_, p.grad);
    p.slope = p.grad.dot(dir_);
    ++evaluations_;
    return p;
  }

  bool armijo(const TrialPoint& p) const {
    return std::isfinite(p.f) && p.f <= f0_ + opt_.c1 * p.step * slope0_;
  }

  // Approximate Wolfe: objective flat to rounding, slope decreased enough.
  bool approx_wolfe(const TrialPoint& p) const {
    return std::isfinite(p.f) && p.f <= f0_ + noise_ &&
           p.slope <= (2.0 * opt_.c1 - 1.0) * slope0_ && p.slope >= opt_.c2 * slope0_;
  }

  bool decreases(const TrialPoint& p) const { return armijo(p) || approx_wolfe(p); }

  bool curvature(const TrialPoint& p) const {
    return std::abs(p.slope) <= -opt_.c2 * slope0_ || approx_wolfe(p);
  }

  bool zoom(TrialPoint lo, TrialPoint hi, TrialPoint& out) {
    while (evaluations_ < opt_.max_line_search) {
      const double a = lo.step, b = hi.step;
      const double width = std::abs(b - a);
      if (width <= std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b))) {
        return false;
      }
      double step = std::isfinite(hi.f)
                        ? cubic_minimizer(a, lo.f, lo.slope, b, hi.f, hi.slope)
                        : std::numeric_limits<double>::quiet_NaN();
      const double left = std::min(a, b) + 0.1 * width;
      const double right = std::max(a, b) - 0.1 * width;
      if (!(step >= left && step <= right)) step = 0.5 * (a + b);

      TrialPoint cur = evaluate(step);
      if (!decreases(cur) || (cur.f >= lo.f && !approx_wolfe(cur))) {
        hi = std::move(cur);
        continue;
      }
      if (curvature(cur)) {
        out = std::move(cur);
        return true;
      }
      if (cur.slope * (hi.step - lo.step) >= 0.0) hi = lo;
      lo = std::move(cur);
    }
    return false;
  }

  const SmoothObjective& objective_;
  const LbfgsOptions& opt_;
  const Eigen::VectorXd& x_;
  const Eigen::VectorXd& dir_;
  double f0_;
  double slope0_;
  double noise_;
  int evaluations_ = 0;
};

}  // namespace

LbfgsResult minimize_lbfgs(const SmoothObjective& objective, Eigen::VectorXd x0,
                           const LbfgsOptions& opt) {
  LbfgsResult result;
  Eigen::VectorXd& x = result.x;
  FitReport& report = result.report;
  x = std::move(x0);

  Eigen::VectorXd g(x.size());
  double f = objective(x, g);
  if (!std::isfinite(f) || !g.allFinite()) {
    throw std::domain_error("L-BFGS: objective is not finite at the initial point");
  }
  report.objective_trace.push_back(f);

  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;
  Eigen::VectorXd dir(x.size());
  std::vector<double> alpha(static_cast<std::size_t>(opt.memory));

  double gnorm = g.norm();
  while (gnorm > opt.tolerance && report.iterations < opt.max_iterations) {
    // Two-loop recursion for dir = -H g.
    dir = -g;
    const std::size_t m = s_hist.size();
    for (std::size_t i = m; i-- > 0;) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(dir);
      dir -= alpha[i] * y_hist[i];
    }
    if (m > 0) dir *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (std::size_t i = 0; i < m; ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(dir);
      dir += (alpha[i] - beta) * s_hist[i];
    }

    double slope = g.dot(dir);
    if (!(slope < 0.0)) {
      // Curvature pairs lost positive definiteness numerically; restart.
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      dir = -g;
      slope = -gnorm * gnorm;
    }
    const double initial_step = s_hist.empty() ? std::min(1.0, 1.0 / gnorm) : 1.0;

    TrialPoint next;
    bool found = WolfeSearch(objective, opt, x, dir, f, slope).search(initial_step, next);
    if (!found && !s_hist.empty()) {
      // Stale curvature pairs can give a direction the search cannot use;
      // retry once along the negative gradient.
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      dir = -g;
      found = WolfeSearch(objective, opt, x, dir, f, -gnorm * gnorm)
                  .search(std::min(1.0, 1.0 / gnorm), next);
    }
    if (!found) {
      std::ostringstream msg;
      msg << "L-BFGS line search failed at iteration " << report.iterations << " (grad norm " << gnorm << ")";
      throw LineSearchError(msg.str(), x, report.iterations);
    }

    Eigen::VectorXd s = next.step * dir;
    Eigen::VectorXd y = next.grad - g;
    const double sy = s.dot(y);
    x += s;
    f = next.f;
    g = std::move(next.grad);
    gnorm = g.norm();
    ++report.iterations;
    report.objective_trace.push_back(f);

    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (static_cast<int>(s_hist.size()) == opt.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
    }
  }

  report.final_objective = f;
  report.grad_norm = gnorm;
  report.converged = gnorm <= opt.tolerance;
  return result;
}

}  // namespace vbrl
