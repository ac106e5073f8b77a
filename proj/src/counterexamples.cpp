#include "vbrl/counterexamples.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace vbrl::counterexample {

std::string_view to_string(Variant v) noexcept { return v == Variant::squared ? "squared" : "log"; }

TwoPointInstance::TwoPointInstance(int n, Variant variant) : n_(n), variant_(variant) {
  if (n < 1) throw std::invalid_argument("TwoPointInstance: n must be >= 1");
}

double TwoPointInstance::context_prob(Context c) const noexcept {
  const double rare = 1.0 / n_;
  return c == Context::x_prime ? rare : 1.0 - rare;
}

double TwoPointInstance::fstar(Context c) const noexcept {
  return c == Context::x_prime ? 0.5 : 1.0 - 1.0 / (2.0 * n_);
}

double TwoPointInstance::alternative(Context c) const noexcept {
  if (c == Context::x_prime) return 0.0;
  if (variant_ == Variant::log) return fstar(Context::x);
  return 1.0 - 1.0 / (2.0 * n_) - 1.0 / (3.0 * std::sqrt(static_cast<double>(n_)));
}

double TwoPointInstance::suboptimality_of_max() const noexcept {
  return 1.0 - (context_prob(Context::x) * fstar(Context::x) +
                context_prob(Context::x_prime) * fstar(Context::x_prime));
}

ErrorReport TwoPointInstance::errors(Candidate f) const {
  const std::array<double, 2> fv{value(f, Context::x), value(f, Context::x_prime)};
  const std::array<double, 2> sv{fstar(Context::x), fstar(Context::x_prime)};
  const std::array<double, 2> w{context_prob(Context::x), context_prob(Context::x_prime)};
  return ve_errors(fv, sv, w);
}

void sample_instance(const TwoPointInstance& inst, Rng& rng, std::vector<Sample>& out) {
  std::bernoulli_distribution rare(inst.context_prob(Context::x_prime));
  std::bernoulli_distribution coin(0.5);
  const double label_x = inst.fstar(Context::x);
  out.resize(static_cast<std::size_t>(inst.n()));
  for (Sample& s : out) {
    if (rare(rng)) {
      s.context = Context::x_prime;
      s.label = coin(rng) ? 1.0 : 0.0;
    } else {
      s.context = Context::x;
      s.label = label_x;
    }
  }
}

std::vector<Sample> sample_instance(const TwoPointInstance& inst, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Sample> out;
  sample_instance(inst, rng, out);
  return out;
}

LossKind natural_loss(Variant v) noexcept { return v == Variant::squared ? LossKind::sq : LossKind::log; }

ErmOutcome erm(std::span<const Sample> data, const TwoPointInstance& inst, LossKind loss) {
  if (loss == LossKind::cat) throw std::invalid_argument("erm: only the sq and log losses apply");
  const auto pointwise = [loss](double pred, double label) {
    const Probability x(pred), y(label);
    return loss == LossKind::sq ? loss_sq(x, y) : loss_log(x, y);
  };
  ErmOutcome out;
  out.summary.size = static_cast<int>(data.size());
  for (const Sample& s : data) {
    out.loss_fstar += pointwise(inst.fstar(s.context), s.label);
    out.loss_alternative += pointwise(inst.alternative(s.context), s.label);
    if (s.context == Context::x_prime) {
      ++out.summary.x_prime_count;
      if (s.label == 1.0) ++out.summary.x_prime_ones;
    }
  }
  // +inf compares as expected; ties stay with f*.
  out.chosen = out.loss_alternative < out.loss_fstar ? Candidate::alternative : Candidate::fstar;
  return out;
}

namespace {

struct TrialResult {
  bool bad = false;
  bool event = false;
  double mae = 0.0;
  double rmse = 0.0;
};

void mean_and_se(const std::vector<TrialResult>& trials, double TrialResult::*field, double& mean,
                 double& se) {
  const double t = static_cast<double>(trials.size());
  double sum = 0.0;
  for (const auto& r : trials) sum += r.*field;
  mean = sum / t;
  double ss = 0.0;
  for (const auto& r : trials) ss += (r.*field - mean) * (r.*field - mean);
  se = trials.size() > 1 ? std::sqrt(ss / (t - 1.0) / t) : 0.0;
}

}  // namespace

std::vector<McRow> mc_verify(Variant variant, std::span<const int> ns, int trials,
                             std::uint64_t seed, int jobs) {
  if (trials < 1) throw std::invalid_argument("mc_verify: trials must be >= 1");
  jobs = std::max(1, jobs);
  const LossKind loss = natural_loss(variant);
  std::vector<McRow> rows;

  for (int n : ns) {
    const TwoPointInstance inst(n, variant);
    const std::array<ErrorReport, 2> err{inst.errors(Candidate::fstar),
                                         inst.errors(Candidate::alternative)};
    std::vector<TrialResult> results(static_cast<std::size_t>(trials));

    auto worker = [&](int begin, int end) {
      std::vector<Sample> data;
      for (int t = begin; t < end; ++t) {
        Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(t)}));
        sample_instance(inst, rng, data);
        const ErmOutcome o = erm(data, inst, loss);
        TrialResult& r = results[static_cast<std::size_t>(t)];
        r.bad = o.chosen == Candidate::alternative;
        r.event = o.summary.x_prime_count == 1 && o.summary.x_prime_ones == 0;
        const ErrorReport& e = err[r.bad ? 1 : 0];
        r.mae = e.ve1;
        r.rmse = e.rmse;
      }
    };
    if (jobs == 1) {
      worker(0, trials);
    } else {
      std::vector<std::jthread> pool;
      const int chunk = (trials + jobs - 1) / jobs;
      for (int b = 0; b < trials; b += chunk) pool.emplace_back(worker, b, std::min(trials, b + chunk));
    }

    McRow row;
    row.variant = variant;
    row.n = n;
    row.trials = trials;
    int bad = 0, event = 0;
    bool first_bad = true;
    for (const auto& r : results) {
      if (r.event) {
        ++event;
        if (!r.bad) ++row.event_misses;
      }
      if (r.mae > r.rmse) ++row.jensen_violations;
      if (!r.bad) continue;
      ++bad;
      if (first_bad) {
        row.conditional_mae = r.mae;
        row.conditional_rmse = r.rmse;
        first_bad = false;
      } else if (r.mae != row.conditional_mae || r.rmse != row.conditional_rmse) {
        row.conditional_constant = false;
      }
    }
    if (first_bad) {
      row.conditional_mae = std::nan("");
      row.conditional_rmse = std::nan("");
    }
    const double t = static_cast<double>(trials);
    row.p_bad = bad / t;
    row.p_bad_se = std::sqrt(row.p_bad * (1.0 - row.p_bad) / t);
    row.p_event = event / t;
    mean_and_se(results, &TrialResult::mae, row.mae_mean, row.mae_se);
    mean_and_se(results, &TrialResult::rmse, row.rmse_mean, row.rmse_se);
    rows.push_back(row);
  }
  return rows;
}

double loglog_slope(std::span<const int> ns, std::span<const double> values) {
  if (ns.size() != values.size() || ns.size() < 2) {
    throw std::invalid_argument("loglog_slope: need at least two matching points");
  }
  const double m = static_cast<double>(ns.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (!(values[i] > 0.0)) throw std::domain_error("loglog_slope: values must be positive");
    const double lx = std::log(static_cast<double>(ns[i]));
    const double ly = std::log(values[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

void write_mc_csv(std::ostream& os, std::span<const McRow> rows) {
  os << "variant,n,trials,p_bad,p_bad_se,mae_mean,mae_se,rmse_mean,rmse_se,conditional_mae,"
        "conditional_rmse\n";
  std::ostringstream line;
  line.precision(17);
  for (const McRow& r : rows) {
    line.str("");
    line << to_string(r.variant) << ',' << r.n << ',' << r.trials << ',' << r.p_bad << ','
         << r.p_bad_se << ',' << r.mae_mean << ',' << r.mae_se << ',' << r.rmse_mean << ','
         << r.rmse_se << ',' << r.conditional_mae << ',' << r.conditional_rmse << '\n';
    os << line.str();
  }
}

}  // namespace vbrl::counterexample
