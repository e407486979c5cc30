#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "trpmbm/scenario.hpp"
#include "trpmbm/traj_metric.hpp"
#include "trpmbm/tree.hpp"

namespace trpmbm {

enum class FilterKind { kTrPMBM, kTrMBM, kTPMBM };

struct FilterSpec {
  FilterKind kind = FilterKind::kTrPMBM;
  int lscan = 5;

  /// "TrPMBM(L=5)"
  std::string name() const;
  /// "trpmbm_l5", used in file names.
  std::string slug() const;

  friend bool operator==(const FilterSpec&, const FilterSpec&) = default;
};

std::string to_string(FilterKind kind);
/// Accepts trpmbm, trmbm, tpmbm in any letter case. Throws ConfigError otherwise.
FilterKind parse_filter_kind(const std::string& text);

/// The scenario as seen by a filter: TrMBM switches to multi-Bernoulli birth, TPMBM keeps only
/// the surviving mode, and L comes from the spec.
ScenarioConfig filter_config(const ScenarioConfig& scenario, const FilterSpec& spec);

struct ExperimentOptions {
  std::vector<FilterSpec> filters;
  int runs = 20;
  std::uint64_t seed = 1;
  /// Fixed ground truth shared by all runs; sampled per run when empty.
  std::optional<std::vector<TreeTrajectory>> truth;
  TrajMetricParams metric;
  int threads = 1;
};

struct RunReport {
  FilterSpec filter;
  int run = 0;
  std::uint64_t seed = 0;  // seed of the run's truth and measurement streams
  std::vector<MetricBreakdown> metric;  // one per time step
  double seconds = 0.0;  // filtering only, metric evaluation excluded
  double mean_global_hypotheses = 0.0;
  int max_global_hypotheses = 0;
  std::uint64_t stream_hash = 0;  // hash of the measurement sets the filter consumed
  std::string error;  // nonempty when the run aborted
};

/// Runs every filter on each run's shared truth and measurements, ordered by run then filter.
/// Throws ConfigError for an invalid scenario, an empty filter list or runs < 1. A run whose
/// filter fails numerically is reported with `error` set and the metric cut at the failing step.
std::vector<RunReport> run_experiment(const ScenarioConfig& scenario, const ExperimentOptions& options);

/// RMS over the successful runs of one filter, per step.
std::vector<MetricBreakdown> rms_metric(const std::vector<RunReport>& reports, const FilterSpec& filter);

/// Writes rms_vs_time.csv, decomposition.csv, timing.csv, runs.csv, metric_<slug>.csv and
/// gnuplot .dat files into `out_dir` (created if missing). Throws ConfigError for empty reports
/// and std::runtime_error when a file cannot be written.
void emit_outputs(const std::vector<RunReport>& reports, const std::filesystem::path& out_dir);

/// FNV-1a over the raw bytes of the measurement vectors.
std::uint64_t hash_measurements(const std::vector<std::vector<Eigen::VectorXd>>& measurements);

}  // namespace trpmbm
