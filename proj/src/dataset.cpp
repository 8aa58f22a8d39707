#include "edgebench/dataset.hpp"

#include <algorithm>

#include "edgebench/errors.hpp"

namespace edgebench {

namespace {
struct MetricInfo {
  MetricId id;
  std::string_view name;
  std::string_view unit;
};

constexpr MetricInfo kMetricInfo[] = {
    {MetricId::LoadLatency, "load_latency", "s"},
    {MetricId::GenLatency, "gen_latency", "s"},
    {MetricId::TotalLatency, "total_latency", "s"},
    {MetricId::PeakPowerGen, "peak_power_gen", "W"},
    {MetricId::EnergyGen, "energy_gen", "J"},
    {MetricId::EnergyLoad, "energy_load", "J"},
    {MetricId::PeakGpuMem, "peak_gpu_mem", "MB"},
    {MetricId::PeakRam, "peak_ram", "MB"},
    {MetricId::TimePerToken, "time_per_token", "s/token"},
    {MetricId::Accuracy, "accuracy", "%"},
    {MetricId::PowerBudget, "power_budget", "W"},
};
}  // namespace

std::string_view to_string(MetricId m) {
  for (const auto& i : kMetricInfo)
    if (i.id == m) return i.name;
  return "?";
}

std::optional<MetricId> parse_metric(std::string_view name) {
  for (const auto& i : kMetricInfo)
    if (i.name == name) return i.id;
  return std::nullopt;
}

std::string_view unit_of(MetricId m) {
  for (const auto& i : kMetricInfo)
    if (i.id == m) return i.unit;
  return "";
}

std::string allowed_metric_names() {
  std::string out;
  for (const auto& i : kMetricInfo) {
    if (!out.empty()) out += ", ";
    out += i.name;
  }
  return out;
}

void Dataset::sort() {
  std::stable_sort(entries_.begin(), entries_.end(),
                   [this](const ConfigMetrics& a, const ConfigMetrics& b) { return order_.less(a.config, b.config); });
  std::stable_sort(excluded_.begin(), excluded_.end(),
                   [this](const Exclusion& a, const Exclusion& b) { return order_.less(a.config, b.config); });
}

void Dataset::add(ConfigMetrics entry) {
  if (find(entry.config) || is_excluded(entry.config))
    throw ValidationError("duplicate dataset key: " + describe(entry.config));
  order_.observe(entry.config);
  entries_.push_back(std::move(entry));
  sort();
}

void Dataset::exclude(Exclusion exclusion) {
  if (is_excluded(exclusion.config)) return;
  order_.observe(exclusion.config);
  std::erase_if(entries_, [&](const ConfigMetrics& e) { return e.config == exclusion.config; });
  excluded_.push_back(std::move(exclusion));
  sort();
}

void Dataset::set_accuracy(const std::string& model, Quantization q, double percent) {
  auto [it, inserted] = accuracy_.emplace(AccuracyKey{model, q}, percent);
  if (!inserted && it->second != percent)
    throw ValidationError("conflicting accuracy for " + model + "/" + std::string(to_string(q)));
}

void Dataset::set_power_budget(const std::string& device, const std::string& power_model, double watts) {
  auto [it, inserted] = budgets_.emplace(BudgetKey{device, power_model}, watts);
  if (!inserted && it->second != watts)
    throw ValidationError("conflicting power budget for " + device + "/" + power_model);
}

ConfigMetrics* Dataset::find(const ConfigPoint& key) {
  auto it = std::find_if(entries_.begin(), entries_.end(), [&](const ConfigMetrics& e) { return e.config == key; });
  return it == entries_.end() ? nullptr : &*it;
}

const ConfigMetrics* Dataset::find(const ConfigPoint& key) const {
  return const_cast<Dataset*>(this)->find(key);
}

bool Dataset::is_excluded(const ConfigPoint& key) const {
  return std::any_of(excluded_.begin(), excluded_.end(), [&](const Exclusion& e) { return e.config == key; });
}

std::optional<double> Dataset::value(const ConfigMetrics& e, MetricId metric) const {
  switch (metric) {
    case MetricId::LoadLatency: return e.load_latency_s;
    case MetricId::GenLatency: return e.gen_latency_s;
    case MetricId::TotalLatency:
      if (e.load_latency_s && e.gen_latency_s) return *e.load_latency_s + *e.gen_latency_s;
      return std::nullopt;
    case MetricId::PeakPowerGen: return e.peak_power_gen_w;
    case MetricId::EnergyGen: return e.energy_gen_j;
    case MetricId::EnergyLoad: return e.energy_load_j;
    case MetricId::PeakGpuMem: return e.peak_gpu_mem_mb;
    case MetricId::PeakRam: return e.peak_ram_mb;
    case MetricId::TimePerToken: return e.time_per_token_s;
    case MetricId::Accuracy: {
      if (e.accuracy_pct) return e.accuracy_pct;
      auto it = accuracy_.find({e.config.model, e.config.quantization});
      if (it == accuracy_.end()) return std::nullopt;
      return it->second;
    }
    case MetricId::PowerBudget: {
      auto it = budgets_.find({e.config.device, e.config.power_model});
      if (it == budgets_.end()) return std::nullopt;
      return it->second;
    }
  }
  return std::nullopt;
}

void Dataset::require(MetricId metric) const {
  if (metric == MetricId::Accuracy && !has_accuracy_table() &&
      std::none_of(entries_.begin(), entries_.end(), [](const ConfigMetrics& e) { return e.accuracy_pct.has_value(); }))
    throw MissingMetricError("metric 'accuracy' needs an accuracy table joined to the dataset");
  if (metric == MetricId::PowerBudget && budgets_.empty())
    throw MissingMetricError("metric 'power_budget' needs a power budget table joined to the dataset");
  for (const auto& e : entries_)
    if (!value(e, metric))
      throw MissingMetricError("metric '" + std::string(to_string(metric)) + "' is missing for " + describe(e.config));
}

}  // namespace edgebench
