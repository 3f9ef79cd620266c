#pragma once

// Seeded Monte-Carlo experiments over generator grids. Trial t of grid cell
// k draws its instance from derive_seed(master_seed, k, t); every algorithm
// in the config runs on that same instance.

#include <cstdint>
#include <string>
#include <vector>

#include "sppsbl/datagen.hpp"
#include "sppsbl/metrics.hpp"
#include "sppsbl/solver.hpp"

namespace sppsbl {

struct AlgorithmSpec {
  std::string label;
  SolverConfig solver;
};

struct SweepSpec {
  std::vector<double> snr_db;
  std::vector<double> measurement_ratio;

  bool empty() const { return snr_db.empty() && measurement_ratio.empty(); }
};

struct ExperimentConfig {
  std::string name = "experiment";
  GeneratorSpec generator;
  std::vector<AlgorithmSpec> algorithms;
  int n_trials = 50;
  std::uint64_t master_seed = 0;
  SweepSpec sweep;
  /// Empty means a directory named after the experiment.
  std::string output_dir;
  double support_tau = kDefaultSupportTau;
  /// When false runtime_ms is written as 0 so outputs are byte-stable.
  bool record_timing = true;
  /// Text the config was parsed from, echoed into every output file.
  std::string source_text;

  void validate() const;
};

/// Parses the JSON config format (comments allowed). Errors are ConfigError
/// with "source:line:col" for syntax and "field 'a.b'" for content.
ExperimentConfig parse_experiment_config(const std::string& text,
                                         const std::string& source = "<config>");
ExperimentConfig load_experiment_config(const std::string& path);

/// Canonical JSON for a config, overrides included.
std::string experiment_config_to_json(const ExperimentConfig& config);

struct GridPoint {
  std::size_t index = 0;
  double snr_db = 0.0;
  double measurement_ratio = 0.0;
  GeneratorSpec generator;  // seed left at 0
};

/// Cells in row-major order: snr_db outer, measurement_ratio inner. A missing
/// list falls back to the generator's own value.
std::vector<GridPoint> grid_points(const ExperimentConfig& config);

struct TrialRow {
  std::size_t cell = 0;
  std::size_t trial = 0;
  std::size_t algorithm = 0;
  TrialRecord record;
  CouplingStats coupling;
  double beta_mean = 0.0;  // mean learned coupling, 0 when none is learned
  std::string error;       // set for failed trials
};

struct ExperimentResult {
  std::vector<GridPoint> cells;
  /// Sorted by cell, then seed, then algorithm order.
  std::vector<TrialRow> rows;
};

/// Generates, solves and scores one trial for every algorithm.
std::vector<TrialRow> run_trial(const ExperimentConfig& config, const GridPoint& cell, std::size_t trial);

/// All cells and trials on `threads` workers (0 = hardware concurrency). The
/// result does not depend on the thread count.
ExperimentResult run_trials(const ExperimentConfig& config, unsigned threads = 0);

std::string trials_csv(const ExperimentConfig& config, const ExperimentResult& result);
std::string summary_json(const ExperimentConfig& config, const ExperimentResult& result);
std::vector<GridCell> phase_grid(const ExperimentResult& result, std::size_t algorithm);
std::string grid_csv(const ExperimentConfig& config, const std::vector<GridCell>& grid);

/// Output directory actually used for `config`.
std::string output_directory(const ExperimentConfig& config);

/// Writes trials.csv, summary.json and config_echo.json under
/// output_directory(config).
ExperimentResult run_experiment(const ExperimentConfig& config, unsigned threads = 0);

/// Requires both sweep lists. Writes grid.csv for the first algorithm,
/// grid_<label>.csv for the others, plus everything run_experiment writes.
ExperimentResult run_phase_grid(const ExperimentConfig& config, unsigned threads = 0);

}  // namespace sppsbl
