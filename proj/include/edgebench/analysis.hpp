#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "edgebench/model.hpp"
#include "edgebench/run_log.hpp"

namespace edgebench {

// Median with the even-count rule: mean of the two central order statistics.
// Throws std::invalid_argument on empty input.
double median(std::span<const double> values);

struct RunMetrics {
  double load_latency_s = 0.0;
  double gen_latency_s = 0.0;
  double time_per_token_s = 0.0;
  long long tokens_generated = 0;
  // Telemetry-derived; absent when the run lacks the samples to support them.
  std::optional<double> baseline_power_w;
  std::optional<double> energy_load_j;
  std::optional<double> energy_gen_j;
  std::optional<double> peak_power_gen_w;
  std::optional<double> peak_gpu_mem_mb;
  std::optional<double> peak_ram_mb;

  friend bool operator==(const RunMetrics&, const RunMetrics&) = default;
};

struct PeakStats {
  double peak_power_gen_w;
  double peak_gpu_mem_mb;
  double peak_ram_mb;
};

// End - Start of the phase; workload clock when both events carry it, receipt clock otherwise.
double phase_latency(const RunLog& log, Phase phase);

// Median power over samples inside the Idle window (receipt clock, inclusive).
double baseline_power(const RunLog& log);

// Trapezoidal integral of (power - baseline) over the phase window. Window edges
// are linearly interpolated from the neighbouring samples when both sides exist.
// Negative excess is kept.
double excess_energy(const RunLog& log, Phase phase, double baseline_w);

// Same integral over an explicit window and sample series.
double excess_energy(std::span<const TelemetrySample> samples, double window_start, double window_end,
                     double baseline_w);

PeakStats peak_stats(const RunLog& log);

double time_per_token(const RunLog& log);

// Metrics for a Completed log. Energy, baseline and peaks are left empty when
// the telemetry does not support them.
RunMetrics compute_run_metrics(const RunLog& log);

// Per-config aggregate. Medians are over all iterations; absent optional metrics
// stay absent unless every iteration provides them.
struct ConfigMetrics {
  ConfigPoint config;
  std::optional<double> load_latency_s;
  std::optional<double> gen_latency_s;
  std::optional<double> time_per_token_s;
  std::optional<double> tokens_generated;
  std::optional<double> baseline_power_w;
  std::optional<double> energy_load_j;
  std::optional<double> energy_gen_j;
  std::optional<double> peak_power_gen_w;
  std::optional<double> peak_gpu_mem_mb;
  std::optional<double> peak_ram_mb;
  int iteration_count = 0;
  std::optional<RunMetrics> first_iteration;
  std::optional<double> accuracy_pct;

  friend bool operator==(const ConfigMetrics&, const ConfigMetrics&) = default;
};

struct Exclusion {
  ConfigPoint config;
  std::string reason;
  friend bool operator==(const Exclusion&, const Exclusion&) = default;
};

using AggregateResult = std::variant<ConfigMetrics, Exclusion>;

// All logs must share one ConfigPoint. Any Failed iteration excludes the config.
AggregateResult aggregate(std::span<const RunLog> logs);

struct DriftPair {
  double first;
  double rest_median;
};

struct IterationDrift {
  DriftPair load_latency_s;
  DriftPair gen_latency_s;
  DriftPair time_per_token_s;
  std::optional<DriftPair> energy_load_j;
  std::optional<DriftPair> energy_gen_j;
  std::optional<DriftPair> peak_power_gen_w;
  std::optional<DriftPair> peak_gpu_mem_mb;
  std::optional<DriftPair> peak_ram_mb;
};

// First Completed iteration vs. the median of the remaining Completed ones.
IterationDrift iteration_drift(std::span<const RunLog> logs);

}  // namespace edgebench
