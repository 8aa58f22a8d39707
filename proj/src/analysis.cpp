#include "edgebench/analysis.hpp"

#include <algorithm>
#include <stdexcept>

#include "edgebench/errors.hpp"

namespace edgebench {

double median(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty set");
  std::vector<double> v(values.begin(), values.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return (lower + upper) / 2.0;
}

namespace {

struct Window {
  double start;
  double end;
};

std::pair<const PhaseEvent*, const PhaseEvent*> phase_events(const RunLog& log, Phase phase) {
  const auto* s = log.find(phase, Boundary::Start);
  const auto* e = log.find(phase, Boundary::End);
  if (!s || !e)
    throw IncompletePhaseError(std::string(to_string(phase)) + " phase lacks its " + (s ? "END" : "START") +
                               " event");
  return {s, e};
}

Window receipt_window(const RunLog& log, Phase phase) {
  auto [s, e] = phase_events(log, phase);
  return {s->t_receipt, e->t_receipt};
}

bool inside(const TelemetrySample& s, Window w) { return s.t >= w.start && s.t <= w.end; }

// Power at time t from the bracketing samples, if both sides exist.
std::optional<double> power_at(std::span<const TelemetrySample> samples, double t) {
  auto hi = std::lower_bound(samples.begin(), samples.end(), t,
                             [](const TelemetrySample& s, double v) { return s.t < v; });
  if (hi == samples.end()) return std::nullopt;
  if (hi->t == t) return hi->power_w;
  if (hi == samples.begin()) return std::nullopt;
  auto lo = hi - 1;
  const double f = (t - lo->t) / (hi->t - lo->t);
  return lo->power_w + (hi->power_w - lo->power_w) * f;
}

}  // namespace

double phase_latency(const RunLog& log, Phase phase) {
  auto [s, e] = phase_events(log, phase);
  if (s->t_workload && e->t_workload) return *e->t_workload - *s->t_workload;
  return e->t_receipt - s->t_receipt;
}

double baseline_power(const RunLog& log) {
  const Window w = receipt_window(log, Phase::Idle);
  std::vector<double> idle;
  for (const auto& s : log.samples)
    if (inside(s, w)) idle.push_back(s.power_w);
  if (idle.empty()) throw NoBaselineError("no telemetry samples inside the IDLE window");
  return median(idle);
}

double excess_energy(std::span<const TelemetrySample> samples, double window_start, double window_end,
                     double baseline_w) {
  std::vector<std::pair<double, double>> pts;  // (t, excess power)
  if (auto p = power_at(samples, window_start)) pts.emplace_back(window_start, *p - baseline_w);
  for (const auto& s : samples)
    if (s.t > window_start && s.t < window_end) pts.emplace_back(s.t, s.power_w - baseline_w);
  if (auto p = power_at(samples, window_end)) pts.emplace_back(window_end, *p - baseline_w);

  if (pts.size() < 2) throw InsufficientSamplesError("fewer than two usable power points in the window");
  double joules = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    joules += 0.5 * (pts[i].second + pts[i - 1].second) * (pts[i].first - pts[i - 1].first);
  return joules;
}

double excess_energy(const RunLog& log, Phase phase, double baseline_w) {
  const Window w = receipt_window(log, phase);
  return excess_energy(log.samples, w.start, w.end, baseline_w);
}

PeakStats peak_stats(const RunLog& log) {
  const Window load = receipt_window(log, Phase::ModelLoad);
  const Window gen = receipt_window(log, Phase::Generate);

  std::optional<double> power, gpu, ram;
  for (const auto& s : log.samples) {
    if (inside(s, gen)) power = std::max(power.value_or(s.power_w), s.power_w);
    if (inside(s, load) || inside(s, gen)) {
      gpu = std::max(gpu.value_or(s.gpu_mem_mb), s.gpu_mem_mb);
      ram = std::max(ram.value_or(s.ram_mb), s.ram_mb);
    }
  }
  if (!power) throw InsufficientSamplesError("no telemetry samples inside the GENERATE window");
  if (!gpu || !ram) throw InsufficientSamplesError("no telemetry samples inside MODEL_LOAD or GENERATE");
  return {*power, *gpu, *ram};
}

double time_per_token(const RunLog& log) {
  if (log.tokens_generated <= 0) throw std::domain_error("time per token undefined for zero tokens");
  return phase_latency(log, Phase::Generate) / static_cast<double>(log.tokens_generated);
}

RunMetrics compute_run_metrics(const RunLog& log) {
  if (!log.status.completed) throw std::invalid_argument("metrics requested for a failed run");
  RunMetrics m;
  m.load_latency_s = phase_latency(log, Phase::ModelLoad);
  m.gen_latency_s = phase_latency(log, Phase::Generate);
  m.tokens_generated = log.tokens_generated;
  m.time_per_token_s = time_per_token(log);

  try {
    const double base = baseline_power(log);
    m.baseline_power_w = base;
    try {
      m.energy_load_j = excess_energy(log, Phase::ModelLoad, base);
    } catch (const InsufficientSamplesError&) {
    }
    try {
      m.energy_gen_j = excess_energy(log, Phase::Generate, base);
    } catch (const InsufficientSamplesError&) {
    }
  } catch (const NoBaselineError&) {
  }

  try {
    const auto peaks = peak_stats(log);
    m.peak_power_gen_w = peaks.peak_power_gen_w;
    m.peak_gpu_mem_mb = peaks.peak_gpu_mem_mb;
    m.peak_ram_mb = peaks.peak_ram_mb;
  } catch (const InsufficientSamplesError&) {
  }
  return m;
}

namespace {

std::vector<const RunLog*> by_iteration(std::span<const RunLog> logs) {
  std::vector<const RunLog*> ordered;
  for (const auto& l : logs) ordered.push_back(&l);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const RunLog* a, const RunLog* b) { return a->iteration < b->iteration; });
  return ordered;
}

template <typename Get>
std::optional<double> median_of(const std::vector<RunMetrics>& runs, Get get) {
  std::vector<double> v;
  for (const auto& r : runs) {
    const std::optional<double> x = get(r);
    if (!x) return std::nullopt;
    v.push_back(*x);
  }
  return median(v);
}

}  // namespace

AggregateResult aggregate(std::span<const RunLog> logs) {
  if (logs.empty()) throw std::invalid_argument("aggregate needs at least one log");
  for (const auto& l : logs)
    if (!(l.config == logs.front().config)) throw std::invalid_argument("aggregate over mixed configurations");

  const auto ordered = by_iteration(logs);
  for (const auto* l : ordered)
    if (!l->status.completed)
      return Exclusion{l->config, "iteration " + std::to_string(l->iteration) + " failed: " + l->status.reason};

  std::vector<RunMetrics> runs;
  for (const auto* l : ordered) runs.push_back(compute_run_metrics(*l));

  ConfigMetrics c;
  c.config = logs.front().config;
  c.iteration_count = static_cast<int>(runs.size());
  c.first_iteration = runs.front();
  c.load_latency_s = median_of(runs, [](const RunMetrics& r) { return std::optional(r.load_latency_s); });
  c.gen_latency_s = median_of(runs, [](const RunMetrics& r) { return std::optional(r.gen_latency_s); });
  c.time_per_token_s = median_of(runs, [](const RunMetrics& r) { return std::optional(r.time_per_token_s); });
  c.tokens_generated =
      median_of(runs, [](const RunMetrics& r) { return std::optional(static_cast<double>(r.tokens_generated)); });
  c.baseline_power_w = median_of(runs, [](const RunMetrics& r) { return r.baseline_power_w; });
  c.energy_load_j = median_of(runs, [](const RunMetrics& r) { return r.energy_load_j; });
  c.energy_gen_j = median_of(runs, [](const RunMetrics& r) { return r.energy_gen_j; });
  c.peak_power_gen_w = median_of(runs, [](const RunMetrics& r) { return r.peak_power_gen_w; });
  c.peak_gpu_mem_mb = median_of(runs, [](const RunMetrics& r) { return r.peak_gpu_mem_mb; });
  c.peak_ram_mb = median_of(runs, [](const RunMetrics& r) { return r.peak_ram_mb; });
  return c;
}

IterationDrift iteration_drift(std::span<const RunLog> logs) {
  std::vector<RunMetrics> runs;
  for (const auto* l : by_iteration(logs))
    if (l->status.completed) runs.push_back(compute_run_metrics(*l));
  if (runs.size() < 2) throw std::invalid_argument("iteration drift needs at least two completed runs");

  const std::vector<RunMetrics> rest(runs.begin() + 1, runs.end());
  auto pair = [&](auto get) -> std::optional<DriftPair> {
    const std::optional<double> first = get(runs.front());
    const auto rest_median = median_of(rest, get);
    if (!first || !rest_median) return std::nullopt;
    return DriftPair{*first, *rest_median};
  };

  IterationDrift d{};
  d.load_latency_s = *pair([](const RunMetrics& r) { return std::optional(r.load_latency_s); });
  d.gen_latency_s = *pair([](const RunMetrics& r) { return std::optional(r.gen_latency_s); });
  d.time_per_token_s = *pair([](const RunMetrics& r) { return std::optional(r.time_per_token_s); });
  d.energy_load_j = pair([](const RunMetrics& r) { return r.energy_load_j; });
  d.energy_gen_j = pair([](const RunMetrics& r) { return r.energy_gen_j; });
  d.peak_power_gen_w = pair([](const RunMetrics& r) { return r.peak_power_gen_w; });
  d.peak_gpu_mem_mb = pair([](const RunMetrics& r) { return r.peak_gpu_mem_mb; });
  d.peak_ram_mb = pair([](const RunMetrics& r) { return r.peak_ram_mb; });
  return d;
}

}  // namespace edgebench
