#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "vbrl/fit.hpp"
#include "vbrl/fourier.hpp"
#include "vbrl/fqi.hpp"
#include "vbrl/losses.hpp"
#include "vbrl/pendulum.hpp"

namespace vbrl::harness {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind { pendulum, counterexample, rates, propcheck };

std::string_view to_string(ExperimentKind kind) noexcept;

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::pendulum;

  // pendulum benchmark
  std::vector<LossKind> losses{LossKind::sq, LossKind::log, LossKind::cat};
  std::vector<int> grid{10, 25, 50, 100, 200, 400};  // dataset sizes in episodes
  int replications = 45;
  int order = 2;
  FourierCoupling coupling = FourierCoupling::full;
  std::string bins_preset = "nonuniform5";  // uniform5 | nonuniform5 | custom
  std::vector<double> custom_bins;          // boundaries when bins_preset == "custom"
  double gamma = 0.99;
  int iterations = 50;
  int horizon = 3000;
  int eval_rollouts = 20;
  std::array<double, 3> l2{1e-6, 1e-6, 1e-4};  // indexed by LossKind
  bool warm_start = false;
  pendulum::Integrator integrator = pendulum::Integrator::semi_implicit;
  bool save_diagnostics = false;
  bool save_datasets = false;

  // counterexample Monte Carlo
  std::vector<int> ns{25, 100, 400};
  int trials = 100000;
  // rate sweep
  std::vector<int> rate_ns{25, 100, 400, 1600};
  int rate_trials = 100000;
  // propcheck: added to analytic grad A to demonstrate that the checks fire
  double grad_perturbation = 0.0;

  std::uint64_t seed = 1;
  std::filesystem::path out_dir = "out";
  int jobs = 1;

  /// Throws ConfigError naming the offending field.
  void validate() const;

  /// Resolved bin preset. Throws ConfigError for unknown presets.
  BinSpec bins() const;

  double l2_for(LossKind kind) const noexcept { return l2[static_cast<std::size_t>(kind)]; }
  void set_l2(LossKind kind, double value) noexcept { l2[static_cast<std::size_t>(kind)] = value; }

  FqiConfig fqi_config(LossKind kind) const;
};

/// Overlays the keys of a JSON object onto `base`. Unknown keys and values of
/// the wrong type raise ConfigError. The result is not validated.
ExperimentConfig parse_config(std::string_view json_text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

std::string config_to_json(const ExperimentConfig& config);

// Pendulum benchmark -----------------------------------------------------------

struct ResultRow {
  LossKind loss = LossKind::sq;
  int size_index = 0;
  int n_episodes = 0;
  int replication = 0;
  double failure_rate = 0.0;  // NaN when the solver failed
  bool solver_failed = false;
  std::string error;
  int transitions = 0;
  double wall_seconds = 0.0;
};

/// Seed of one (loss, size, replication) cell. The loss enters by its enum
/// value and the size by its position in the grid.
std::uint64_t cell_seed(std::uint64_t master, LossKind loss, int size_index, int replication);

/// One replication: collect, featurize, run FQI, evaluate. Solver failures
/// are caught and flagged in the row.
ResultRow run_cell(const ExperimentConfig& config, LossKind loss, int size_index, int replication);

struct CiSummary {
  LossKind loss = LossKind::sq;
  int n_episodes = 0;
  double mean = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  int reps = 0;
  bool single_replication = false;  // interval collapsed to the point estimate
};

/// Two-sided standard normal quantile, e.g. 1.6448536... for level 0.90.
double normal_critical_value(double level);

/// Normal-approximation interval mean +- z s / sqrt(reps) clipped to [0,1].
/// Throws std::invalid_argument on an empty sample.
CiSummary summarize_values(std::span<const double> values, double level = 0.90);

/// One summary per (loss, size), ordered by loss then size. Rows with a
/// solver failure are left out; cells with none left are skipped.
std::vector<CiSummary> summarize_ci(std::span<const ResultRow> rows, double level = 0.90);

struct PendulumRun {
  std::vector<ResultRow> rows;  // sorted by (loss position, size index, replication)
  std::vector<CiSummary> summaries;
  int solver_failures = 0;
};

using Progress = std::function<void(const ResultRow&, std::size_t done, std::size_t total)>;

/// Runs every cell on `config.jobs` worker threads. Output does not depend on
/// the number of workers.
PendulumRun run_pendulum(const ExperimentConfig& config, const Progress& progress = {});

// CSV -------------------------------------------------------------------------

/// loss,n_episodes,replication,failure_rate,solver_failed,transitions
void write_results_csv(std::ostream& os, std::span<const ResultRow> rows);
/// loss,n_episodes,replication,wall_seconds
void write_timings_csv(std::ostream& os, std::span<const ResultRow> rows);
/// loss,n_episodes,mean_failure,lo90,hi90,reps
void write_summary_csv(std::ostream& os, std::span<const CiSummary> summaries);
/// Throws std::runtime_error on a malformed file.
std::vector<CiSummary> read_summary_csv(std::istream& is);

/// "fqi-sq", "fqi-log", "fqi-cat".
std::string loss_label(LossKind kind);

// Whole experiments -----------------------------------------------------------

enum ExitCode : int { kOk = 0, kConfigError = 1, kSolverFailure = 2, kCheckFailure = 3 };

/// Runs the experiment named by config.kind, writing CSV (and for the
/// pendulum an SVG) into config.out_dir. Logs go to `log`.
int run_experiment(const ExperimentConfig& config, std::ostream& log);

}  // namespace vbrl::harness
