#include "vbrl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "vbrl/counterexamples.hpp"
#include "vbrl/plot.hpp"
#include "vbrl/propcheck.hpp"
#include "vbrl/rng.hpp"

namespace vbrl::harness {

std::string_view to_string(ExperimentKind kind) noexcept {
  switch (kind) {
    case ExperimentKind::pendulum: return "pendulum";
    case ExperimentKind::counterexample: return "counterexample";
    case ExperimentKind::rates: return "rates";
    case ExperimentKind::propcheck: return "propcheck";
  }
  return "?";
}

std::string loss_label(LossKind kind) { return "fqi-" + std::string(to_string(kind)); }

// Config ----------------------------------------------------------------------

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

void require_sizes(const std::vector<int>& v, const char* field) {
  require(!v.empty(), std::string(field) + " must not be empty");
  for (int x : v) require(x >= 1, std::string(field) + " entries must be >= 1");
}

}  // namespace

void ExperimentConfig::validate() const {
  require(!losses.empty(), "losses must not be empty");
  for (std::size_t i = 0; i < losses.size(); ++i) {
    require(std::count(losses.begin(), losses.end(), losses[i]) == 1, "losses must be distinct");
  }
  require_sizes(grid, "grid");
  require(replications >= 1, "replications must be >= 1");
  require(order >= 1, "order must be >= 1");
  require(gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0,1)");
  require(iterations >= 1, "iterations must be >= 1");
  require(horizon >= 1, "horizon must be >= 1");
  require(eval_rollouts >= 1, "eval_rollouts must be >= 1");
  for (double v : l2) require(std::isfinite(v) && v >= 0.0, "l2 values must be finite and >= 0");
  require(l2_for(LossKind::log) > 0.0, "l2.log must be > 0");
  require(l2_for(LossKind::cat) > 0.0, "l2.cat must be > 0");
  require_sizes(ns, "counterexample.ns");
  require(trials >= 1, "counterexample.trials must be >= 1");
  require_sizes(rate_ns, "rates.ns");
  require(rate_ns.size() >= 2, "rates.ns needs at least two sizes");
  require(rate_trials >= 1, "rates.trials must be >= 1");
  require(std::isfinite(grad_perturbation), "propcheck.grad_perturbation must be finite");
  require(jobs >= 1, "jobs must be >= 1");
  require(!out_dir.empty(), "out_dir must not be empty");
  (void)bins();
}

BinSpec ExperimentConfig::bins() const {
  if (bins_preset == "uniform5") return BinSpec::uniform5();
  if (bins_preset == "nonuniform5") return BinSpec::nonuniform5();
  if (bins_preset == "custom") {
    try {
      return BinSpec(custom_bins);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("custom bins: ") + e.what());
    }
  }
  throw ConfigError("unknown bins preset '" + bins_preset + "'");
}

FqiConfig ExperimentConfig::fqi_config(LossKind kind) const {
  FqiConfig c;
  c.loss = kind;
  c.iterations = iterations;
  c.gamma = gamma;
  c.l2 = l2_for(kind);
  c.bins = bins();
  c.warm_start = warm_start;
  return c;
}

namespace {

using nlohmann::json;

template <class T>
T get(const json& j, const char* key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("unknown config key '" + where + key + "'");
    }
  }
}

ExperimentKind parse_kind(const std::string& s) {
  for (auto k : {ExperimentKind::pendulum, ExperimentKind::counterexample, ExperimentKind::rates,
                 ExperimentKind::propcheck}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("unknown experiment '" + s + "'");
}

LossKind parse_loss(const std::string& s) {
  try {
    return parse_loss_kind(s);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

ExperimentConfig parse_config(std::string_view json_text, ExperimentConfig c) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j,
             {"experiment", "losses", "grid", "replications", "order", "coupling", "bins", "gamma",
              "iterations", "horizon", "eval_rollouts", "l2", "warm_start", "integrator",
              "save_diagnostics", "save_datasets", "counterexample", "rates", "propcheck", "seed", "out_dir", "jobs"},
             "");
  if (j.contains("experiment")) c.kind = parse_kind(get<std::string>(j["experiment"], "experiment"));
  if (j.contains("losses")) {
    c.losses.clear();
    for (const auto& s : get<std::vector<std::string>>(j["losses"], "losses")) c.losses.push_back(parse_loss(s));
  }
  if (j.contains("grid")) c.grid = get<std::vector<int>>(j["grid"], "grid");
  if (j.contains("replications")) c.replications = get<int>(j["replications"], "replications");
  if (j.contains("order")) c.order = get<int>(j["order"], "order");
  if (j.contains("coupling")) {
    const auto s = get<std::string>(j["coupling"], "coupling");
    if (s == "full") {
      c.coupling = FourierCoupling::full;
    } else if (s == "axis_aligned") {
      c.coupling = FourierCoupling::axis_aligned;
    } else {
      throw ConfigError("coupling must be 'full' or 'axis_aligned'");
    }
  }
  if (j.contains("bins")) {
    const json& b = j["bins"];
    if (b.is_string()) {
      c.bins_preset = b.get<std::string>();
    } else {
      c.bins_preset = "custom";
      c.custom_bins = get<std::vector<double>>(b, "bins");
    }
  }
  if (j.contains("gamma")) c.gamma = get<double>(j["gamma"], "gamma");
  if (j.contains("iterations")) c.iterations = get<int>(j["iterations"], "iterations");
  if (j.contains("horizon")) c.horizon = get<int>(j["horizon"], "horizon");
  if (j.contains("eval_rollouts")) c.eval_rollouts = get<int>(j["eval_rollouts"], "eval_rollouts");
  if (j.contains("l2")) {
    const json& l = j["l2"];
    check_keys(l, {"sq", "log", "cat"}, "l2.");
    for (const auto& [key, value] : l.items()) c.set_l2(parse_loss(key), get<double>(value, "l2"));
  }
  if (j.contains("warm_start")) c.warm_start = get<bool>(j["warm_start"], "warm_start");
  if (j.contains("integrator")) {
    const auto s = get<std::string>(j["integrator"], "integrator");
    if (s == "semi_implicit") {
      c.integrator = pendulum::Integrator::semi_implicit;
    } else if (s == "explicit_euler") {
      c.integrator = pendulum::Integrator::explicit_euler;
    } else {
      throw ConfigError("integrator must be 'semi_implicit' or 'explicit_euler'");
    }
  }
  if (j.contains("save_diagnostics")) c.save_diagnostics = get<bool>(j["save_diagnostics"], "save_diagnostics");
  if (j.contains("save_datasets")) c.save_datasets = get<bool>(j["save_datasets"], "save_datasets");
  if (j.contains("counterexample")) {
    const json& s = j["counterexample"];
    check_keys(s, {"ns", "trials"}, "counterexample.");
    if (s.contains("ns")) c.ns = get<std::vector<int>>(s["ns"], "counterexample.ns");
    if (s.contains("trials")) c.trials = get<int>(s["trials"], "counterexample.trials");
  }
  if (j.contains("rates")) {
    const json& s = j["rates"];
    check_keys(s, {"ns", "trials"}, "rates.");
    if (s.contains("ns")) c.rate_ns = get<std::vector<int>>(s["ns"], "rates.ns");
    if (s.contains("trials")) c.rate_trials = get<int>(s["trials"], "rates.trials");
  }
  if (j.contains("propcheck")) {
    const json& s = j["propcheck"];
    check_keys(s, {"grad_perturbation"}, "propcheck.");
    if (s.contains("grad_perturbation")) {
      c.grad_perturbation = get<double>(s["grad_perturbation"], "propcheck.grad_perturbation");
    }
  }
  if (j.contains("seed")) c.seed = get<std::uint64_t>(j["seed"], "seed");
  if (j.contains("out_dir")) c.out_dir = get<std::string>(j["out_dir"], "out_dir");
  if (j.contains("jobs")) c.jobs = get<int>(j["jobs"], "jobs");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), std::move(base));
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = std::string(to_string(c.kind));
  std::vector<std::string> losses;
  for (auto l : c.losses) losses.emplace_back(to_string(l));
  j["losses"] = losses;
  j["grid"] = c.grid;
  j["replications"] = c.replications;
  j["order"] = c.order;
  j["coupling"] = c.coupling == FourierCoupling::full ? "full" : "axis_aligned";
  if (c.bins_preset == "custom") {
    j["bins"] = c.custom_bins;
  } else {
    j["bins"] = c.bins_preset;
  }
  j["gamma"] = c.gamma;
  j["iterations"] = c.iterations;
  j["horizon"] = c.horizon;
  j["eval_rollouts"] = c.eval_rollouts;
  j["l2"] = {{"sq", c.l2_for(LossKind::sq)}, {"log", c.l2_for(LossKind::log)}, {"cat", c.l2_for(LossKind::cat)}};
  j["warm_start"] = c.warm_start;
  j["integrator"] = c.integrator == pendulum::Integrator::semi_implicit ? "semi_implicit" : "explicit_euler";
  j["save_diagnostics"] = c.save_diagnostics;
  j["save_datasets"] = c.save_datasets;
  j["counterexample"] = {{"ns", c.ns}, {"trials", c.trials}};
  j["rates"] = {{"ns", c.rate_ns}, {"trials", c.rate_trials}};
  j["propcheck"] = {{"grad_perturbation", c.grad_perturbation}};
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir.string();
  j["jobs"] = c.jobs;
  return j.dump(2);
}

// Pendulum --------------------------------------------------------------------

std::uint64_t cell_seed(std::uint64_t master, LossKind loss, int size_index, int replication) {
  return derive_seed(master, {static_cast<std::uint64_t>(loss), static_cast<std::uint64_t>(size_index),
                              static_cast<std::uint64_t>(replication)});
}

namespace {

std::string cell_stem(LossKind loss, int n_episodes, int replication) {
  return std::string(to_string(loss)) + "_n" + std::to_string(n_episodes) + "_r" +
         std::to_string(replication);
}

}  // namespace

ResultRow run_cell(const ExperimentConfig& config, LossKind loss, int size_index, int replication) {
  const auto start = std::chrono::steady_clock::now();
  ResultRow row;
  row.loss = loss;
  row.size_index = size_index;
  row.n_episodes = config.grid.at(static_cast<std::size_t>(size_index));
  row.replication = replication;

  const std::uint64_t seed = cell_seed(config.seed, loss, size_index, replication);
  const BatchDataset data = BatchDataset::collect(row.n_episodes, derive_seed(seed, {0}), config.integrator);
  row.transitions = static_cast<int>(data.transitions.size());
  const FourierBasis basis(config.order, config.coupling);
  const FqiProblem problem = make_problem(data, basis);

  if (config.save_datasets) {
    std::filesystem::create_directories(config.out_dir / "datasets");
    std::ofstream out(config.out_dir / "datasets" / (cell_stem(loss, row.n_episodes, replication) + ".csv"));
    pendulum::write_transitions_csv(out, data.transitions);
  }

  try {
    const FqiResult result = run_fqi(problem, config.fqi_config(loss));
    if (config.save_diagnostics) {
      std::filesystem::create_directories(config.out_dir / "diagnostics");
      std::ofstream out(config.out_dir / "diagnostics" /
                        (cell_stem(loss, row.n_episodes, replication) + ".csv"));
      write_diagnostics_csv(out, result.fits);
    }
    row.failure_rate = pendulum::evaluate_policy(make_controller(result.policy, basis), config.horizon,
                                                 config.eval_rollouts, derive_seed(seed, {1}),
                                                 config.integrator);
  } catch (const FqiError& e) {
    row.solver_failed = true;
    row.error = e.what();
    row.failure_rate = std::nan("");
  }
  row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

double normal_critical_value(double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("confidence level must lie in (0,1)");
  // Solve P(|Z| <= z) = level, i.e. erfc(z / sqrt 2) = 1 - level, by bisection.
  const double target = 1.0 - level;
  double lo = 0.0, hi = 40.0;
  for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (std::erfc(mid / std::sqrt(2.0)) > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

CiSummary summarize_values(std::span<const double> values, double level) {
  if (values.empty()) throw std::invalid_argument("summarize_values: no replications");
  CiSummary s;
  s.reps = static_cast<int>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / s.reps;
  if (s.reps == 1) {
    s.single_replication = true;
    s.lower = s.upper = s.mean;
    return s;
  }
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  const double half = normal_critical_value(level) * std::sqrt(ss / (s.reps - 1)) / std::sqrt(s.reps);
  s.lower = std::clamp(s.mean - half, 0.0, 1.0);
  s.upper = std::clamp(s.mean + half, 0.0, 1.0);
  return s;
}

std::vector<CiSummary> summarize_ci(std::span<const ResultRow> rows, double level) {
  std::map<std::pair<LossKind, int>, std::vector<double>> cells;
  for (const ResultRow& r : rows) {
    auto& v = cells[{r.loss, r.n_episodes}];
    if (!r.solver_failed) v.push_back(r.failure_rate);
  }
  std::vector<CiSummary> out;
  for (const auto& [key, values] : cells) {
    if (values.empty()) continue;
    CiSummary s = summarize_values(values, level);
    s.loss = key.first;
    s.n_episodes = key.second;
    out.push_back(s);
  }
  return out;
}

PendulumRun run_pendulum(const ExperimentConfig& config, const Progress& progress) {
  config.validate();
  struct Task {
    LossKind loss;
    int size_index;
    int replication;
  };
  std::vector<Task> tasks;
  for (LossKind loss : config.losses) {
    for (int s = 0; s < static_cast<int>(config.grid.size()); ++s) {
      for (int r = 0; r < config.replications; ++r) tasks.push_back({loss, s, r});
    }
  }
  // Largest datasets first so the pool does not idle at the end.
  std::vector<std::size_t> order(tasks.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return config.grid[static_cast<std::size_t>(tasks[a].size_index)] >
           config.grid[static_cast<std::size_t>(tasks[b].size_index)];
  });

  PendulumRun run;
  run.rows.resize(tasks.size());
  std::atomic<std::size_t> next{0};
  std::size_t done = 0;
  std::mutex mutex;
  std::exception_ptr error;

  auto worker = [&] {
    for (;;) {
      const std::size_t slot = next.fetch_add(1);
      if (slot >= order.size()) return;
      const Task& t = tasks[order[slot]];
      try {
        ResultRow row = run_cell(config, t.loss, t.size_index, t.replication);
        std::lock_guard lock(mutex);
        run.rows[order[slot]] = std::move(row);
        ++done;
        if (progress) progress(run.rows[order[slot]], done, tasks.size());
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!error) error = std::current_exception();
        next = order.size();
        return;
      }
    }
  };
  {
    const int n = std::min<int>(config.jobs, static_cast<int>(tasks.size()));
    std::vector<std::jthread> pool;
    for (int i = 1; i < n; ++i) pool.emplace_back(worker);
    worker();
  }
  if (error) std::rethrow_exception(error);

  for (const auto& r : run.rows) run.solver_failures += r.solver_failed ? 1 : 0;
  run.summaries = summarize_ci(run.rows);
  return run;
}

// CSV -------------------------------------------------------------------------

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

LossKind parse_label(const std::string& label) {
  try {
    return parse_loss_kind(label);
  } catch (const std::invalid_argument&) {
    throw std::runtime_error("unknown loss label '" + label + "'");
  }
}

}  // namespace

void write_results_csv(std::ostream& os, std::span<const ResultRow> rows) {
  os << "loss,n_episodes,replication,failure_rate,solver_failed,transitions\n";
  for (const auto& r : rows) {
    os << loss_label(r.loss) << ',' << r.n_episodes << ',' << r.replication << ','
       << (r.solver_failed ? std::string("nan") : fmt(r.failure_rate)) << ',' << (r.solver_failed ? 1 : 0)
       << ',' << r.transitions << '\n';
  }
}

void write_timings_csv(std::ostream& os, std::span<const ResultRow> rows) {
  os << "loss,n_episodes,replication,wall_seconds\n";
  for (const auto& r : rows) {
    os << loss_label(r.loss) << ',' << r.n_episodes << ',' << r.replication << ',' << fmt(r.wall_seconds)
       << '\n';
  }
}

void write_summary_csv(std::ostream& os, std::span<const CiSummary> summaries) {
  os << "loss,n_episodes,mean_failure,lo90,hi90,reps\n";
  for (const auto& s : summaries) {
    os << loss_label(s.loss) << ',' << s.n_episodes << ',' << fmt(s.mean) << ',' << fmt(s.lower) << ','
       << fmt(s.upper) << ',' << s.reps << '\n';
  }
}

std::vector<CiSummary> read_summary_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "loss,n_episodes,mean_failure,lo90,hi90,reps") {
    throw std::runtime_error("summary CSV: unexpected header");
  }
  std::vector<CiSummary> out;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != 6) throw std::runtime_error("summary CSV line " + std::to_string(lineno) + ": expected 6 fields");
    CiSummary s;
    try {
      s.loss = parse_label(cells[0]);
      s.n_episodes = std::stoi(cells[1]);
      s.mean = std::stod(cells[2]);
      s.lower = std::stod(cells[3]);
      s.upper = std::stod(cells[4]);
      s.reps = std::stoi(cells[5]);
    } catch (const std::logic_error&) {
      throw std::runtime_error("summary CSV line " + std::to_string(lineno) + ": bad number");
    }
    s.single_replication = s.reps == 1;
    out.push_back(s);
  }
  return out;
}

// Experiments -----------------------------------------------------------------

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

int pendulum_experiment(const ExperimentConfig& c, std::ostream& log) {
  const PendulumRun run = run_pendulum(c, [&](const ResultRow& r, std::size_t done, std::size_t total) {
    log << '[' << done << '/' << total << "] " << loss_label(r.loss) << " n=" << r.n_episodes
        << " rep=" << r.replication;
    if (r.solver_failed) {
      log << " SOLVER FAILURE: " << r.error << '\n';
    } else {
      log << " failure_rate=" << r.failure_rate << " (" << r.wall_seconds << " s)\n";
    }
  });
  auto results = open_output(c.out_dir / "results.csv");
  write_results_csv(results, run.rows);
  auto timings = open_output(c.out_dir / "timings.csv");
  write_timings_csv(timings, run.rows);
  auto summary = open_output(c.out_dir / "summary.csv");
  write_summary_csv(summary, run.summaries);
  for (const auto& s : run.summaries) {
    if (s.single_replication) {
      log << "warning: " << loss_label(s.loss) << " n=" << s.n_episodes
          << " has a single replication; its interval is the point estimate\n";
    }
  }
  if (!run.summaries.empty()) {
    PlotOptions opt;
    opt.title = "Fourier order " + std::to_string(c.order) + ", bins " + c.bins_preset;
    emit_plot(run.summaries, c.out_dir / "failure_rate.svg", opt);
  }
  if (run.solver_failures > 0) {
    log << run.solver_failures << " cell(s) had a solver failure\n";
    return kSolverFailure;
  }
  return kOk;
}

int counterexample_experiment(const ExperimentConfig& c, std::ostream& log) {
  std::vector<counterexample::McRow> rows;
  for (auto v : {counterexample::Variant::squared, counterexample::Variant::log}) {
    auto r = counterexample::mc_verify(v, c.ns, c.trials, c.seed, c.jobs);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  auto out = open_output(c.out_dir / "counterexample.csv");
  counterexample::write_mc_csv(out, rows);
  for (const auto& r : rows) {
    log << counterexample::to_string(r.variant) << " n=" << r.n << " p_bad=" << r.p_bad << " (se "
        << r.p_bad_se << ") conditional mae=" << r.conditional_mae << " rmse=" << r.conditional_rmse << '\n';
  }
  return kOk;
}

int rates_experiment(const ExperimentConfig& c, std::ostream& log) {
  std::vector<counterexample::McRow> rows;
  auto slopes = open_output(c.out_dir / "rate_slopes.csv");
  slopes << "variant,loss,slope_mae,slope_rmse\n";
  for (auto v : {counterexample::Variant::squared, counterexample::Variant::log}) {
    auto r = counterexample::mc_verify(v, c.rate_ns, c.rate_trials, c.seed, c.jobs);
    std::vector<double> mae, rmse;
    for (const auto& row : r) {
      mae.push_back(row.mae_mean);
      rmse.push_back(row.rmse_mean);
    }
    const double s_mae = counterexample::loglog_slope(c.rate_ns, mae);
    const double s_rmse = counterexample::loglog_slope(c.rate_ns, rmse);
    slopes << counterexample::to_string(v) << ',' << to_string(counterexample::natural_loss(v)) << ','
           << fmt(s_mae) << ',' << fmt(s_rmse) << '\n';
    log << to_string(counterexample::natural_loss(v)) << " ERM: log-log slope of expected MAE " << s_mae
        << ", of expected rMSE " << s_rmse << '\n';
    rows.insert(rows.end(), r.begin(), r.end());
  }
  auto out = open_output(c.out_dir / "rates.csv");
  counterexample::write_mc_csv(out, rows);
  return kOk;
}

int propcheck_experiment(const ExperimentConfig& c, std::ostream& log) {
  const auto results = propcheck::run_all({c.seed, c.grad_perturbation});
  auto out = open_output(c.out_dir / "propcheck.csv");
  propcheck::write_table(out, results);
  propcheck::write_table(log, results);
  for (const auto& r : results) {
    if (!r.passed) return kCheckFailure;
  }
  return kOk;
}

}  // namespace

int run_experiment(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  std::filesystem::create_directories(config.out_dir);
  {
    auto out = open_output(config.out_dir / "config.json");
    out << config_to_json(config) << '\n';
  }
  switch (config.kind) {
    case ExperimentKind::pendulum: return pendulum_experiment(config, log);
    case ExperimentKind::counterexample: return counterexample_experiment(config, log);
    case ExperimentKind::rates: return rates_experiment(config, log);
    case ExperimentKind::propcheck: return propcheck_experiment(config, log);
  }
  return kOk;
}

}  // namespace vbrl::harness
