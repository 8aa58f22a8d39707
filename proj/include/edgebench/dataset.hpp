#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "edgebench/analysis.hpp"
#include "edgebench/model.hpp"

namespace edgebench {

enum class MetricId {
  LoadLatency,
  GenLatency,
  TotalLatency,
  PeakPowerGen,
  EnergyGen,
  EnergyLoad,
  PeakGpuMem,
  PeakRam,
  TimePerToken,
  Accuracy,
  PowerBudget,  // nominal watts of the power model preset, from a user-supplied table
};

inline constexpr MetricId kAllMetrics[] = {
    MetricId::LoadLatency, MetricId::GenLatency, MetricId::TotalLatency, MetricId::PeakPowerGen,
    MetricId::EnergyGen,   MetricId::EnergyLoad, MetricId::PeakGpuMem,   MetricId::PeakRam,
    MetricId::TimePerToken, MetricId::Accuracy,   MetricId::PowerBudget,
};

std::string_view to_string(MetricId m);  // e.g. "gen_latency"
std::optional<MetricId> parse_metric(std::string_view name);
std::string_view unit_of(MetricId m);  // "s", "W", "J", "MB", "%", "s/token"
std::string allowed_metric_names();  // comma-separated, for diagnostics

using AccuracyKey = std::pair<std::string, Quantization>;  // (model, quantization)
using BudgetKey = std::pair<std::string, std::string>;      // (device, power model)

// Aggregated measurements keyed by ConfigPoint, kept in sweep order.
// Excluded configs are tracked separately and never appear as entries.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(SweepOrder order) : order_(std::move(order)) {}

  // Throws ValidationError if the key already exists (as entry or exclusion).
  void add(ConfigMetrics entry);
  // Removes any entry for the key. Re-excluding an excluded key is a no-op.
  void exclude(Exclusion exclusion);
  // Throws ValidationError on a conflicting value.
  void set_accuracy(const std::string& model, Quantization q, double percent);
  // Nominal budget of a power model preset. Throws ValidationError on a conflicting value.
  void set_power_budget(const std::string& device, const std::string& power_model, double watts);

  const std::vector<ConfigMetrics>& entries() const { return entries_; }
  const std::vector<Exclusion>& excluded() const { return excluded_; }
  const std::map<AccuracyKey, double>& accuracy_table() const { return accuracy_; }
  bool has_accuracy_table() const { return !accuracy_.empty(); }
  const std::map<BudgetKey, double>& power_budget_table() const { return budgets_; }

  ConfigMetrics* find(const ConfigPoint& key);
  const ConfigMetrics* find(const ConfigPoint& key) const;
  bool is_excluded(const ConfigPoint& key) const;

  // Metric value for an entry, joining accuracy by (model, quantization) and
  // deriving TotalLatency. Empty when the data needed is absent.
  std::optional<double> value(const ConfigMetrics& entry, MetricId metric) const;

  // Throws MissingMetricError unless every entry can resolve the metric.
  void require(MetricId metric) const;

  bool less(const ConfigPoint& a, const ConfigPoint& b) const { return order_.less(a, b); }
  const SweepOrder& order() const { return order_; }

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.entries_ == b.entries_ && a.excluded_ == b.excluded_ && a.accuracy_ == b.accuracy_ &&
           a.budgets_ == b.budgets_;
  }

 private:
  void sort();

  SweepOrder order_;
  std::vector<ConfigMetrics> entries_;
  std::vector<Exclusion> excluded_;
  std::map<AccuracyKey, double> accuracy_;
  std::map<BudgetKey, double> budgets_;
};

}  // namespace edgebench
