#include "edgebench/report.hpp"

#include <functional>
#include <json.hpp>
#include <map>
#include <sstream>

#include "edgebench/errors.hpp"

namespace edgebench {

namespace {

struct FigureInfo {
  Figure id;
  std::string_view name;
};
constexpr FigureInfo kFigureInfo[] = {
    {Figure::Latency, "latency"}, {Figure::Memory, "memory"},    {Figure::Power, "power"},
    {Figure::Energy, "energy"},   {Figure::TimePerToken, "tpt"}, {Figure::QuantComp, "quant_comp"},
};

using Cell = std::optional<double>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> key_cells;  // leading text columns
  std::vector<std::vector<Cell>> values;
  std::size_t key_width = 0;
};

std::string render(const Table& t, FileFormat format) {
  std::ostringstream os;
  if (format == FileFormat::Csv) {
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << "\n";
    for (std::size_t r = 0; r < t.values.size(); ++r) {
      bool first = true;
      for (const auto& k : t.key_cells[r]) {
        os << (first ? "" : ",") << csv_escape(k);
        first = false;
      }
      for (const auto& v : t.values[r]) os << "," << (v ? format_double(*v) : "");
      os << "\n";
    }
    return os.str();
  }
  for (std::size_t r = 0; r < t.values.size(); ++r) {
    nlohmann::ordered_json j;
    for (std::size_t c = 0; c < t.key_width; ++c) j[t.columns[c]] = t.key_cells[r][c];
    for (std::size_t c = 0; c < t.values[r].size(); ++c) {
      const auto& v = t.values[r][c];
      j[t.columns[t.key_width + c]] = v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
    }
    os << j.dump() << "\n";
  }
  return os.str();
}

// Entries and exclusions merged back into one sweep-ordered sequence.
struct Row {
  ConfigPoint config;
  const ConfigMetrics* entry;  // null when excluded
};

std::vector<Row> all_rows(const Dataset& ds) {
  std::vector<Row> rows;
  const auto& es = ds.entries();
  const auto& xs = ds.excluded();
  std::size_t i = 0, j = 0;
  while (i < es.size() || j < xs.size()) {
    if (j == xs.size() || (i < es.size() && !ds.less(xs[j].config, es[i].config)))
      rows.push_back({es[i].config, &es[i]}), ++i;
    else
      rows.push_back({xs[j].config, nullptr}), ++j;
  }
  return rows;
}

std::optional<double> derived_tpt(const ConfigMetrics& e, long long tokens) {
  if (e.time_per_token_s) return e.time_per_token_s;
  if (!e.gen_latency_s) return std::nullopt;
  const double n = e.tokens_generated ? *e.tokens_generated : static_cast<double>(tokens);
  return *e.gen_latency_s / n;
}

using Extract = std::function<Cell(const ConfigMetrics&)>;

Table per_config(const Dataset& ds, const std::vector<std::pair<std::string, Extract>>& series) {
  Table t;
  t.columns = {"device", "power_model", "model", "quantization", "status"};
  t.key_width = t.columns.size();
  for (const auto& [name, _] : series) t.columns.push_back(name);
  for (const auto& row : all_rows(ds)) {
    t.key_cells.push_back({row.config.device, row.config.power_model, row.config.model,
                           std::string(to_string(row.config.quantization)), row.entry ? "ok" : "excluded"});
    std::vector<Cell> vals;
    for (const auto& [_, f] : series) vals.push_back(row.entry ? f(*row.entry) : std::nullopt);
    t.values.push_back(std::move(vals));
  }
  return t;
}

// int4 and none side by side for every (device, power model, model) pair.
Table quant_comparison(const Dataset& ds) {
  Table t;
  t.columns = {"device", "power_model", "model", "metric", "int4", "none", "ratio_none_to_int4"};
  t.key_width = 4;
  struct Pair {
    std::optional<double> v[2];
  };
  const MetricId metrics[] = {MetricId::LoadLatency, MetricId::GenLatency, MetricId::TotalLatency};
  std::vector<std::tuple<std::string, std::string, std::string>> order;
  std::map<std::tuple<std::string, std::string, std::string>, std::map<MetricId, Pair>> cells;
  for (const auto& row : all_rows(ds)) {
    auto key = std::make_tuple(row.config.device, row.config.power_model, row.config.model);
    if (!cells.contains(key)) order.push_back(key);
    auto& m = cells[key];
    const int slot = row.config.quantization == Quantization::Int4 ? 0 : 1;
    for (auto id : metrics) m[id].v[slot] = row.entry ? ds.value(*row.entry, id) : std::nullopt;
  }
  for (const auto& key : order) {
    for (auto id : metrics) {
      const auto& p = cells[key][id];
      t.key_cells.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), std::string(to_string(id))});
      Cell ratio;
      if (p.v[0] && p.v[1] && *p.v[0] != 0) ratio = *p.v[1] / *p.v[0];
      t.values.push_back({p.v[0], p.v[1], ratio});
    }
  }
  return t;
}

}  // namespace

std::string_view to_string(Figure f) {
  for (const auto& i : kFigureInfo)
    if (i.id == f) return i.name;
  return "?";
}

std::optional<Figure> parse_figure(std::string_view id) {
  for (const auto& i : kFigureInfo)
    if (i.name == id) return i.id;
  return std::nullopt;
}

SeriesFile render_figure(const Dataset& ds, Figure figure, const ReportOptions& options) {
  if (ds.entries().empty()) throw ValidationError("report: dataset has no entries");
  if (options.tokens < 1) throw ValidationError("report: --tokens must be >= 1");

  Table t;
  switch (figure) {
    case Figure::Latency:
      ds.require(MetricId::LoadLatency);
      ds.require(MetricId::GenLatency);
      t = per_config(ds, {{"load_latency_s", [](const ConfigMetrics& e) { return e.load_latency_s; }},
                          {"gen_latency_s", [](const ConfigMetrics& e) { return e.gen_latency_s; }}});
      break;
    case Figure::Memory:
      ds.require(MetricId::PeakGpuMem);
      ds.require(MetricId::PeakRam);
      t = per_config(ds, {{"peak_gpu_mem_mb", [](const ConfigMetrics& e) { return e.peak_gpu_mem_mb; }},
                          {"peak_ram_mb", [](const ConfigMetrics& e) { return e.peak_ram_mb; }}});
      break;
    case Figure::Power:
      ds.require(MetricId::PeakPowerGen);
      t = per_config(ds, {{"peak_power_gen_w", [](const ConfigMetrics& e) { return e.peak_power_gen_w; }},
                          {"baseline_power_w", [](const ConfigMetrics& e) { return e.baseline_power_w; }}});
      break;
    case Figure::Energy:
      ds.require(MetricId::EnergyLoad);
      ds.require(MetricId::EnergyGen);
      t = per_config(ds, {{"energy_load_j", [](const ConfigMetrics& e) { return e.energy_load_j; }},
                          {"energy_gen_j", [](const ConfigMetrics& e) { return e.energy_gen_j; }}});
      break;
    case Figure::TimePerToken: {
      for (const auto& e : ds.entries())
        if (!derived_tpt(e, options.tokens))
          throw MissingMetricError("metric 'time_per_token' is missing for " + describe(e.config) +
                                   " (no gen_latency to derive it from)");
      const long long n = options.tokens;
      t = per_config(ds, {{"time_per_token_s", [n](const ConfigMetrics& e) { return derived_tpt(e, n); }}});
      break;
    }
    case Figure::QuantComp:
      ds.require(MetricId::LoadLatency);
      ds.require(MetricId::GenLatency);
      t = quant_comparison(ds);
      break;
  }
  const std::string ext = options.format == FileFormat::Csv ? ".csv" : ".jsonl";
  return {std::string(to_string(figure)) + ext, render(t, options.format)};
}

}  // namespace edgebench
