// Seeded experiment harness: budget / arrival-rate sweeps with replication,
// all mechanisms run on identical arrival streams, metric aggregation, and
// deterministic CSV + manifest output.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bbs/baselines.hpp"
#include "bbs/config.hpp"
#include "bbs/mechanism.hpp"
#include "bbs/scenario.hpp"

namespace bbs {

// Fixed-width numeric formatting for byte-identical output.
std::string format_number(double v);

inline const std::vector<std::string> kAllMechanisms = {
    "bbs", "wta", "mw", "rev_full", "rev_ic", "prop_share"};

struct ExperimentConfig {
  ScenarioParams scenario;
  MechanismConfig mechanism;
  int mw_prizes = 5;
  std::string sweep_axis = "budget";  // budget | lambda
  std::vector<double> sweep_values = {5.0, 10.0, 20.0, 40.0};
  int replications = 30;
  std::vector<std::string> mechanisms = kAllMechanisms;
  std::string out_dir;
  std::uint64_t master_seed = 1;
};

ExperimentConfig load_experiment_config(const Config& cfg);

struct RunRecord {
  double sweep_value;
  int replication;
  std::string mechanism;
  std::uint64_t utility;
  int participation;
  double payments;
  std::optional<double> mean_error;
  std::optional<double> final_e_star;
};

struct MetricRow {
  double sweep_value;
  std::string mechanism;
  double utility_mean, utility_std;
  double participation_mean, participation_std;
  double payments_mean, payments_std;
  std::optional<double> error_mean, error_std;
  std::optional<double> e_star_mean, e_star_std;
};

// All requested mechanisms over one scenario; key is the mechanism tag.
std::map<std::string, MechanismOutcome> run_all_mechanisms(
    const Scenario& scenario, const ExperimentConfig& cfg, std::uint64_t run_seed,
    std::uint64_t world_seed, double budget);

// Mean measurement error over paid users; absent when no winner submitted.
std::optional<double> mean_winner_error(const MechanismOutcome& outcome);

// Last recomputed e* of the stage trace; absent when never recomputed.
std::optional<double> final_e_star(const MechanismOutcome& outcome);

struct ExperimentResult {
  std::vector<MetricRow> metrics;
  std::vector<RunRecord> runs;
};

// Full sweep. When cfg.out_dir is set, writes metrics.csv, runs.csv and
// manifest.json there (the directory is created; an unwritable path fails
// before any computation).
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Per-replication BBS stage traces at the base configuration.
std::vector<std::vector<StageRecord>> threshold_trace(const ExperimentConfig& cfg);

// Relative change of e* between the last two stage records; absent when the
// trace has fewer than two stages.
std::optional<double> last_two_stage_change(const std::vector<StageRecord>& stages);

void write_metrics_csv(const std::vector<MetricRow>& rows, std::ostream& out);
void write_runs_csv(const std::vector<RunRecord>& rows, std::ostream& out);

// Deterministic child seeds for (sweep index, replication, mechanism index).
std::uint64_t child_seed(std::uint64_t master, int sweep_index, int replication,
                         int mechanism_index);

}  // namespace bbs
