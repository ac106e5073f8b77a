// Command-line front end for the experiments.
//
// Settings are layered: built-in defaults, then --config (JSON), then any
// flag given on the command line.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vbrl/harness.hpp"
#include "vbrl/plot.hpp"

using namespace vbrl;
using namespace vbrl::harness;

namespace {

// Flags that override the config file only when given.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> jobs;

  std::optional<std::vector<std::string>> losses;
  std::optional<std::vector<int>> grid;
  std::optional<int> reps, order, iterations, horizon, rollouts;
  std::optional<std::string> coupling, bins, integrator;
  std::optional<std::vector<double>> custom_bins;
  std::optional<double> gamma, l2_sq, l2_log, l2_cat;
  bool warm_start = false, diagnostics = false, datasets = false;

  std::optional<std::vector<int>> ns;
  std::optional<int> trials;
  std::optional<double> grad_perturbation;
};

void apply(const Overrides& o, ExperimentConfig& c) {
  if (o.seed) c.seed = *o.seed;
  if (o.out_dir) c.out_dir = *o.out_dir;
  if (o.jobs) c.jobs = *o.jobs;
  if (o.losses) {
    c.losses.clear();
    for (const auto& s : *o.losses) {
      try {
        c.losses.push_back(parse_loss_kind(s));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    }
  }
  if (o.grid) c.grid = *o.grid;
  if (o.reps) c.replications = *o.reps;
  if (o.order) c.order = *o.order;
  if (o.iterations) c.iterations = *o.iterations;
  if (o.horizon) c.horizon = *o.horizon;
  if (o.rollouts) c.eval_rollouts = *o.rollouts;
  if (o.coupling) {
    if (*o.coupling == "full") {
      c.coupling = FourierCoupling::full;
    } else if (*o.coupling == "axis_aligned") {
      c.coupling = FourierCoupling::axis_aligned;
    } else {
      throw ConfigError("--coupling must be full or axis_aligned");
    }
  }
  if (o.bins) c.bins_preset = *o.bins;
  if (o.custom_bins) {
    c.bins_preset = "custom";
    c.custom_bins = *o.custom_bins;
  }
  if (o.integrator) {
    if (*o.integrator == "semi_implicit") {
      c.integrator = pendulum::Integrator::semi_implicit;
    } else if (*o.integrator == "explicit_euler") {
      c.integrator = pendulum::Integrator::explicit_euler;
    } else {
      throw ConfigError("--integrator must be semi_implicit or explicit_euler");
    }
  }
  if (o.gamma) c.gamma = *o.gamma;
  if (o.l2_sq) c.set_l2(LossKind::sq, *o.l2_sq);
  if (o.l2_log) c.set_l2(LossKind::log, *o.l2_log);
  if (o.l2_cat) c.set_l2(LossKind::cat, *o.l2_cat);
  if (o.warm_start) c.warm_start = true;
  if (o.diagnostics) c.save_diagnostics = true;
  if (o.datasets) c.save_datasets = true;
  if (o.grad_perturbation) c.grad_perturbation = *o.grad_perturbation;
  if (c.kind == ExperimentKind::counterexample) {
    if (o.ns) c.ns = *o.ns;
    if (o.trials) c.trials = *o.trials;
  } else if (c.kind == ExperimentKind::rates) {
    if (o.ns) c.rate_ns = *o.ns;
    if (o.trials) c.rate_trials = *o.trials;
  }
}

template <class T>
void optional_flag(CLI::App* app, const std::string& name, std::optional<T>& target, const std::string& help) {
  app->add_option_function<T>(name, [&target](const T& v) { target = v; }, help);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Value-based RL with squared, log and categorical losses"};
  app.require_subcommand(1);
  app.fallthrough();

  Overrides o;
  std::string config_path;
  app.add_option("--config", config_path, "JSON file with experiment settings")->check(CLI::ExistingFile);
  optional_flag(&app, "--seed", o.seed, "Master seed");
  optional_flag(&app, "--out-dir", o.out_dir, "Output directory");
  optional_flag(&app, "--jobs", o.jobs, "Worker threads");

  auto* pend = app.add_subcommand("run-pendulum", "Failure rate of FQI policies vs. dataset size");
  optional_flag(pend, "--losses", o.losses, "Subset of sq, log, cat");
  optional_flag(pend, "--grid", o.grid, "Dataset sizes in episodes");
  optional_flag(pend, "--reps", o.reps, "Replications per size");
  optional_flag(pend, "--order", o.order, "Fourier order");
  optional_flag(pend, "--coupling", o.coupling, "full or axis_aligned");
  optional_flag(pend, "--bins", o.bins, "uniform5 or nonuniform5");
  optional_flag(pend, "--bin-boundaries", o.custom_bins, "Custom increasing boundaries in (0,1)");
  optional_flag(pend, "--gamma", o.gamma, "Discount");
  optional_flag(pend, "--iterations", o.iterations, "FQI iterations");
  optional_flag(pend, "--horizon", o.horizon, "Evaluation horizon");
  optional_flag(pend, "--eval-rollouts", o.rollouts, "Evaluation rollouts per policy");
  optional_flag(pend, "--l2-sq", o.l2_sq, "Ridge for the squared loss");
  optional_flag(pend, "--l2-log", o.l2_log, "Ridge for the log-loss");
  optional_flag(pend, "--l2-cat", o.l2_cat, "Ridge for the cat-loss");
  optional_flag(pend, "--integrator", o.integrator, "semi_implicit or explicit_euler");
  pend->add_flag("--warm-start", o.warm_start, "Start each fit from the previous iterate");
  pend->add_flag("--save-diagnostics", o.diagnostics, "Write per-iteration solver CSVs");
  pend->add_flag("--save-datasets", o.datasets, "Write the collected transitions");

  auto* cex = app.add_subcommand("run-counterexample", "Monte Carlo on the two-context instances");
  optional_flag(cex, "--ns", o.ns, "Sample sizes");
  optional_flag(cex, "--trials", o.trials, "Datasets per size");

  auto* rates = app.add_subcommand("run-rates", "MAE rate of squared vs. log ERM");
  optional_flag(rates, "--ns", o.ns, "Sample sizes");
  optional_flag(rates, "--trials", o.trials, "Datasets per size");

  auto* prop = app.add_subcommand("propcheck", "Invariant checks of the loss functions");
  optional_flag(prop, "--grad-perturbation", o.grad_perturbation, "Fault injection into grad A");

  auto* plot = app.add_subcommand("plot", "Render an SVG from a summary CSV");
  std::string summary_path, svg_path, title;
  plot->add_option("--summary", summary_path, "summary.csv")->required()->check(CLI::ExistingFile);
  plot->add_option("--output", svg_path, "Output SVG")->required();
  plot->add_option("--title", title, "Plot title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (plot->parsed()) {
      std::ifstream in(summary_path);
      const auto summaries = read_summary_csv(in);
      PlotOptions opt;
      if (!title.empty()) opt.title = title;
      emit_plot(summaries, std::filesystem::path(svg_path), opt);
      return kOk;
    }

    ExperimentConfig config;
    if (!config_path.empty()) config = load_config(config_path);
    if (pend->parsed()) config.kind = ExperimentKind::pendulum;
    if (cex->parsed()) config.kind = ExperimentKind::counterexample;
    if (rates->parsed()) config.kind = ExperimentKind::rates;
    if (prop->parsed()) config.kind = ExperimentKind::propcheck;
    apply(o, config);
    config.validate();
    return run_experiment(config, std::cerr);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
}
