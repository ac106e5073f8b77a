#include "vbrl/fit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/QR>

namespace vbrl {

std::string_view to_string(LossKind kind) noexcept {
  switch (kind) {
    case LossKind::sq: return "sq";
    case LossKind::log: return "log";
    case LossKind::cat: return "cat";
  }
  return "?";
}

LossKind parse_loss_kind(std::string_view name) {
  if (name.starts_with("fqi-") || name.starts_with("fqi_")) name.remove_prefix(4);
  if (name == "sq") return LossKind::sq;
  if (name == "log") return LossKind::log;
  if (name == "cat") return LossKind::cat;
  throw std::invalid_argument("unknown loss '" + std::string(name) + "' (expected sq, log or cat)");
}

void Design::validate() const {
  if (features.rows() != targets.size()) {
    throw std::invalid_argument("design has " + std::to_string(features.rows()) + " rows but " +
                                std::to_string(targets.size()) + " targets");
  }
  if (!(l2 >= 0.0) || !std::isfinite(l2)) throw std::invalid_argument("l2 must be finite and >= 0");
  if (!features.allFinite()) throw std::invalid_argument("design features must be finite");
  for (Eigen::Index i = 0; i < targets.size(); ++i) {
    if (!(targets[i] >= 0.0 && targets[i] <= 1.0)) {
      throw std::invalid_argument("target " + std::to_string(i) + " outside [0,1]: " +
                                  std::to_string(targets[i]));
    }
  }
}

namespace {

void require_positive_l2(const Design& design, const char* solver) {
  if (!(design.l2 > 0.0)) {
    throw std::invalid_argument(std::string(solver) + " requires l2 > 0");
  }
}

}  // namespace

// Squared loss ------------------------------------------------------------

Eigen::VectorXd fit_sq(const Design& design) {
  design.validate();
  const Eigen::Index d = design.features.cols();
  const Eigen::MatrixXd& phi = design.features;
  Eigen::MatrixXd gram = phi.transpose() * phi;
  gram.diagonal().array() += design.l2;
  const Eigen::VectorXd rhs = phi.transpose() * design.targets;

  Eigen::VectorXd w;
  if (design.l2 > 0.0) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    w = ldlt.solve(rhs);
    // One refinement step pushes the normal-equation residual to rounding.
    w += ldlt.solve(rhs - gram * w);
  } else {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(gram);
    if (qr.rank() < d) {
      throw RankDeficientError("fit_sq: features have column rank " + std::to_string(qr.rank()) +
                               " < " + std::to_string(d) + " and l2 = 0");
    }
    w = qr.solve(rhs);
    w += qr.solve(rhs - gram * w);
  }
  return w;
}

// Log loss ------------------------------------------------------------------

namespace objectives {

double squared(const Design& design, const Eigen::VectorXd& w, Eigen::VectorXd* grad) {
  const Eigen::VectorXd resid = design.features * w - design.targets;
  if (grad) *grad = 2.0 * (design.features.transpose() * resid) + 2.0 * design.l2 * w;
  return resid.squaredNorm() + design.l2 * w.squaredNorm();
}

double logistic(const Design& design, const Eigen::VectorXd& w, Eigen::VectorXd* grad,
                Eigen::MatrixXd* hessian) {
  const Eigen::VectorXd score = design.features * w;
  const Eigen::Index n = score.size();
  double f = 0.5 * design.l2 * w.squaredNorm();
  Eigen::VectorXd resid(n);
  Eigen::VectorXd curv(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    // loss_log(sigmoid(s), y) = softplus(s) - y s.
    f += softplus(score[i]) - design.targets[i] * score[i];
    const Probability p = Probability::logistic(score[i]);
    resid[i] = p.value() - design.targets[i];
    curv[i] = p.value() * p.complement();
  }
  if (grad) *grad = design.features.transpose() * resid + design.l2 * w;
  if (hessian) {
    *hessian = design.features.transpose() * curv.asDiagonal() * design.features;
    hessian->diagonal().array() += design.l2;
  }
  return f;
}

double categorical(const Design& design, const BinSpec& bins, const Eigen::MatrixXd& w,
                   Eigen::MatrixXd* grad) {
  const Eigen::Index n = design.features.rows();
  const Eigen::Index k = static_cast<Eigen::Index>(bins.categories());
  Eigen::ArrayXd scale(k);
  for (Eigen::Index j = 0; j < k; ++j) scale[j] = bins.scale(static_cast<std::size_t>(j));

  // K x n: column i holds sample i's natural parameters.
  const Eigen::MatrixXd theta = w * design.features.transpose();
  Eigen::ArrayXXd z = theta.array().colwise() * scale;
  // Shift by max(0, max_j z_j); the reference cell contributes exp(-shift).
  const Eigen::ArrayXd shift = z.colwise().maxCoeff().transpose().max(0.0);
  z.rowwise() -= shift.transpose();
  z = z.exp();
  const Eigen::ArrayXd total = z.colwise().sum().transpose() + (-shift).exp();

  double f = 0.5 * design.l2 * w.squaredNorm() + (shift + total.log()).sum();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double y = design.targets[i];
    f -= y * theta(static_cast<Eigen::Index>(bins.bin_index(y)), i);
  }
  if (grad) {
    z.rowwise() /= total.transpose();
    z.colwise() *= scale;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double y = design.targets[i];
      z(static_cast<Eigen::Index>(bins.bin_index(y)), i) -= y;
    }
    *grad = z.matrix() * design.features + design.l2 * w;
  }
  return f;
}

}  // namespace objectives

LogFit fit_log(const Design& design, const NewtonOptions& options,
               const Eigen::VectorXd* warm_start) {
  design.validate();
  require_positive_l2(design, "fit_log");
  const Eigen::Index d = design.features.cols();

  LogFit out;
  Eigen::VectorXd& w = out.weights;
  FitReport& report = out.report;
  w = warm_start ? *warm_start : Eigen::VectorXd::Zero(d);
  if (w.size() != d) throw std::invalid_argument("fit_log: warm start has wrong length");

  Eigen::VectorXd grad(d), trial_grad(d);
  Eigen::MatrixXd hess(d, d);
  double f = objectives::logistic(design, w, &grad, &hess);
  if (!std::isfinite(f)) throw SolverError("fit_log: non-finite objective at iteration 0", 0);
  report.objective_trace.push_back(f);
  double gnorm = grad.norm();

  while (gnorm > options.tolerance && report.iterations < options.max_iterations) {
    const int iter = report.iterations + 1;
    const double noise = options.noise_tolerance * (1.0 + std::abs(f));
    const Eigen::VectorXd newton_dir = -hess.ldlt().solve(grad);

    // Halve the Newton step until the objective decreases (or stays flat to
    // rounding while the gradient shrinks); then try a gradient step.
    bool accepted = false;
    Eigen::VectorXd trial;
    double trial_f = 0.0;
    for (const Eigen::VectorXd& dir : {newton_dir, Eigen::VectorXd(-grad)}) {
      double t = 1.0;
      for (int h = 0; h <= options.max_halvings && !accepted; ++h, t *= 0.5) {
        trial = w + t * dir;
        trial_f = objectives::logistic(design, trial, &trial_grad);
        if (!std::isfinite(trial_f)) {
          if (!trial.allFinite()) {
            throw SolverError("fit_log: non-finite objective at iteration " + std::to_string(iter),
                              iter);
          }
          continue;
        }
        accepted = trial_f < f || (trial_f <= f + noise && trial_grad.norm() < gnorm);
      }
      if (accepted) break;
    }
    if (!accepted) break;  // stalled at rounding level

    w = std::move(trial);
    f = objectives::logistic(design, w, &grad, &hess);
    if (!std::isfinite(f)) {
      throw SolverError("fit_log: non-finite objective at iteration " + std::to_string(iter), iter);
    }
    gnorm = grad.norm();
    report.iterations = iter;
    report.objective_trace.push_back(f);
  }
  report.final_objective = f;
  report.grad_norm = gnorm;
  report.converged = gnorm <= options.tolerance;
  return out;
}

// Cat loss --------------------------------------------------------------------

CatFit fit_cat(const Design& design, const BinSpec& bins, const LbfgsOptions& options,
               const Eigen::MatrixXd* warm_start) {
  design.validate();
  require_positive_l2(design, "fit_cat");
  const Eigen::Index k = static_cast<Eigen::Index>(bins.categories());
  const Eigen::Index d = design.features.cols();

  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(k * d);
  if (warm_start) {
    if (warm_start->rows() != k || warm_start->cols() != d) {
      throw std::invalid_argument("fit_cat: warm start has wrong shape");
    }
    x0 = Eigen::Map<const Eigen::VectorXd>(warm_start->data(), k * d);
  }

  Eigen::MatrixXd w(k, d), g(k, d);
  const SmoothObjective objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    w = Eigen::Map<const Eigen::MatrixXd>(x.data(), k, d);
    const double f = objectives::categorical(design, bins, w, &g);
    grad = Eigen::Map<const Eigen::VectorXd>(g.data(), k * d);
    return f;
  };

  LbfgsResult res = minimize_lbfgs(objective, std::move(x0), options);
  return {Eigen::Map<const Eigen::MatrixXd>(res.x.data(), k, d), std::move(res.report)};
}

// Model ---------------------------------------------------------------------

LinearQModel::LinearQModel(LossKind kind, int num_actions, int feature_dim, BinSpec bins)
    : kind_(kind), feature_dim_(feature_dim), bins_(std::move(bins)) {
  if (num_actions < 1 || feature_dim < 1) {
    throw std::invalid_argument("LinearQModel needs at least one action and one feature");
  }
  if (kind_ != LossKind::cat) bins_ = BinSpec{};
  const Eigen::Index rows = kind_ == LossKind::cat ? static_cast<Eigen::Index>(bins_.categories()) : 1;
  blocks_.assign(static_cast<std::size_t>(num_actions), Eigen::MatrixXd::Zero(rows, feature_dim));
}

const Eigen::MatrixXd& LinearQModel::block(int action) const {
  return blocks_.at(static_cast<std::size_t>(action));
}

void LinearQModel::set_block(int action, Eigen::MatrixXd params) {
  Eigen::MatrixXd& dst = blocks_.at(static_cast<std::size_t>(action));
  if (params.rows() != dst.rows() || params.cols() != dst.cols()) {
    throw std::invalid_argument("parameter block has shape " + std::to_string(params.rows()) + "x" +
                                std::to_string(params.cols()) + ", expected " +
                                std::to_string(dst.rows()) + "x" + std::to_string(dst.cols()));
  }
  if (!params.allFinite()) throw std::invalid_argument("parameter block must be finite");
  dst = std::move(params);
}

Probability LinearQModel::predict(const Eigen::Ref<const Eigen::VectorXd>& features,
                                  int action) const {
  const Eigen::MatrixXd& b = block(action);
  if (features.size() != feature_dim_) {
    throw std::invalid_argument("feature vector has length " + std::to_string(features.size()) +
                                ", model expects " + std::to_string(feature_dim_));
  }
  switch (kind_) {
    case LossKind::sq: return Probability::clamped(b.row(0).dot(features));
    case LossKind::log: return Probability::logistic(b.row(0).dot(features));
    case LossKind::cat: {
      const Eigen::VectorXd theta = b * features;
      detail::CatCells cells;
      detail::cat_cells(theta, bins_, cells);
      double mean = 0.0;
      for (Eigen::Index j = 0; j < theta.size(); ++j) {
        mean += bins_.scale(static_cast<std::size_t>(j)) * cells.probs[j];
      }
      return Probability::clamped(mean);
    }
  }
  return {};
}

Eigen::VectorXd LinearQModel::predict_rows(const Eigen::MatrixXd& features, int action) const {
  if (features.cols() != feature_dim_) {
    throw std::invalid_argument("feature matrix has wrong column count");
  }
  const Eigen::MatrixXd& b = block(action);
  const Eigen::MatrixXd scores = features * b.transpose();  // n x rows
  Eigen::VectorXd out(features.rows());
  detail::CatCells cells;
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    switch (kind_) {
      case LossKind::sq: out[i] = Probability::clamped(scores(i, 0)).value(); break;
      case LossKind::log: out[i] = Probability::logistic(scores(i, 0)).value(); break;
      case LossKind::cat: {
        detail::cat_cells(scores.row(i).transpose(), bins_, cells);
        double mean = 0.0;
        for (Eigen::Index j = 0; j < scores.cols(); ++j) {
          mean += bins_.scale(static_cast<std::size_t>(j)) * cells.probs[j];
        }
        out[i] = Probability::clamped(mean).value();
        break;
      }
    }
  }
  return out;
}

}  // namespace vbrl
