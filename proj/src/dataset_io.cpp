#include "edgebench/dataset_io.hpp"

#include <charconv>
#include <cmath>
#include <json.hpp>
#include <map>
#include <set>
#include <sstream>

#include "edgebench/errors.hpp"
#include "edgebench/log_io.hpp"

namespace edgebench {

using nlohmann::json;

std::optional<FileFormat> parse_format(std::string_view text) {
  if (text == "csv") return FileFormat::Csv;
  if (text == "json-lines" || text == "jsonl") return FileFormat::JsonLines;
  return std::nullopt;
}

std::optional<TableSchema> parse_schema(std::string_view text) {
  if (text == "load-latency") return TableSchema::LoadLatency;
  if (text == "gen-latency") return TableSchema::GenLatency;
  if (text == "accuracy") return TableSchema::Accuracy;
  if (text == "power-budget") return TableSchema::PowerBudget;
  if (text == "full") return TableSchema::Full;
  return std::nullopt;
}

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  if (quoted) throw ValidationError("unterminated quoted field");
  fields.push_back(std::move(cur));
  return fields;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

namespace {

constexpr std::string_view kManifest = "edgebench dataset v1";
constexpr std::string_view kUnits = "seconds, watts, joules, megabytes, percent";
constexpr std::string_view kHeader = "device,power_model,model,quantization,metric,value";
constexpr std::string_view kOrderPrefix = "# order: ";

using MetricField = std::optional<double> ConfigMetrics::*;

struct NamedField {
  std::string_view name;
  MetricField field;
};

constexpr NamedField kEntryFields[] = {
    {"load_latency_s", &ConfigMetrics::load_latency_s},
    {"gen_latency_s", &ConfigMetrics::gen_latency_s},
    {"time_per_token_s", &ConfigMetrics::time_per_token_s},
    {"tokens_generated", &ConfigMetrics::tokens_generated},
    {"baseline_power_w", &ConfigMetrics::baseline_power_w},
    {"energy_load_j", &ConfigMetrics::energy_load_j},
    {"energy_gen_j", &ConfigMetrics::energy_gen_j},
    {"peak_power_gen_w", &ConfigMetrics::peak_power_gen_w},
    {"peak_gpu_mem_mb", &ConfigMetrics::peak_gpu_mem_mb},
    {"peak_ram_mb", &ConfigMetrics::peak_ram_mb},
    {"accuracy_pct", &ConfigMetrics::accuracy_pct},
};

using RunField = std::optional<double> RunMetrics::*;
struct NamedRunField {
  std::string_view name;
  RunField field;
};
constexpr NamedRunField kFirstOptional[] = {
    {"first.baseline_power_w", &RunMetrics::baseline_power_w},
    {"first.energy_load_j", &RunMetrics::energy_load_j},
    {"first.energy_gen_j", &RunMetrics::energy_gen_j},
    {"first.peak_power_gen_w", &RunMetrics::peak_power_gen_w},
    {"first.peak_gpu_mem_mb", &RunMetrics::peak_gpu_mem_mb},
    {"first.peak_ram_mb", &RunMetrics::peak_ram_mb},
};

struct Row {
  ConfigPoint key;
  bool wildcard = false;  // "*" device and power model: accuracy table row
  std::string metric;
  std::string value;
  bool budget = false;  // "*" model and quantization: power budget row
};

std::vector<Row> dataset_rows(const Dataset& ds) {
  std::vector<Row> rows;
  auto num = [](double v) { return format_double(v); };
  for (const auto& e : ds.entries()) {
    rows.push_back({e.config, false, "iteration_count", std::to_string(e.iteration_count)});
    for (const auto& f : kEntryFields)
      if (e.*(f.field)) rows.push_back({e.config, false, std::string(f.name), num(*(e.*(f.field)))});
    if (const auto& first = e.first_iteration) {
      rows.push_back({e.config, false, "first.load_latency_s", num(first->load_latency_s)});
      rows.push_back({e.config, false, "first.gen_latency_s", num(first->gen_latency_s)});
      rows.push_back({e.config, false, "first.time_per_token_s", num(first->time_per_token_s)});
      rows.push_back({e.config, false, "first.tokens_generated", std::to_string(first->tokens_generated)});
      for (const auto& f : kFirstOptional)
        if ((*first).*(f.field)) rows.push_back({e.config, false, std::string(f.name), num(*((*first).*(f.field)))});
    }
  }
  for (const auto& [k, v] : ds.accuracy_table())
    rows.push_back({{"*", "*", k.first, k.second}, true, "accuracy_pct", num(v)});
  for (const auto& [k, v] : ds.power_budget_table())
    rows.push_back({{k.first, k.second, "*", Quantization::None}, false, "power_budget_w", num(v), true});
  for (const auto& x : ds.excluded()) rows.push_back({x.config, false, "excluded", x.reason});
  return rows;
}

double parse_number(const std::string& text, const std::string& where) {
  double v = 0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || p != text.data() + text.size() || !std::isfinite(v))
    throw ValidationError(where + "value '" + text + "' is not a finite number");
  return v;
}

Quantization parse_quant_field(const std::string& text, const std::string& where) {
  auto q = parse_quantization(text);
  if (!q) throw ValidationError(where + "unknown quantization '" + text + "' (expected int4 or none)");
  return *q;
}

Dataset build_dataset(const std::vector<std::pair<int, Row>>& rows, SweepOrder order) {
  std::vector<ConfigPoint> key_order;
  std::map<ConfigPoint, ConfigMetrics> entries;
  std::map<ConfigPoint, RunMetrics> firsts;
  std::map<ConfigPoint, std::set<std::string>> seen;
  std::vector<Exclusion> excluded;
  Dataset ds(std::move(order));

  for (const auto& [lineno, r] : rows) {
    const std::string where = "dataset row " + std::to_string(lineno) + ": ";
    if (r.wildcard) {
      if (r.metric != "accuracy_pct") throw ValidationError(where + "only accuracy_pct rows may use '*' keys");
      ds.set_accuracy(r.key.model, r.key.quantization, parse_number(r.value, where));
      continue;
    }
    if (r.budget) {
      if (r.metric != "power_budget_w") throw ValidationError(where + "only power_budget_w rows may use '*' model keys");
      ds.set_power_budget(r.key.device, r.key.power_model, parse_number(r.value, where));
      continue;
    }
    if (r.metric == "excluded") {
      excluded.push_back({r.key, r.value});
      continue;
    }
    if (!seen[r.key].insert(r.metric).second) throw ValidationError(where + "duplicate metric '" + r.metric + "'");
    if (!entries.contains(r.key)) {
      key_order.push_back(r.key);
      entries[r.key].config = r.key;
    }
    auto& e = entries[r.key];
    if (r.metric == "iteration_count") {
      e.iteration_count = static_cast<int>(parse_number(r.value, where));
      continue;
    }
    bool matched = false;
    for (const auto& f : kEntryFields)
      if (f.name == r.metric) {
        e.*(f.field) = parse_number(r.value, where);
        matched = true;
      }
    if (matched) continue;
    if (r.metric.starts_with("first.")) {
      auto& first = firsts[r.key];
      const double v = parse_number(r.value, where);
      if (r.metric == "first.load_latency_s") first.load_latency_s = v;
      else if (r.metric == "first.gen_latency_s") first.gen_latency_s = v;
      else if (r.metric == "first.time_per_token_s") first.time_per_token_s = v;
      else if (r.metric == "first.tokens_generated") first.tokens_generated = static_cast<long long>(v);
      else {
        for (const auto& f : kFirstOptional)
          if (f.name == r.metric) {
            first.*(f.field) = v;
            matched = true;
          }
        if (!matched) throw ValidationError(where + "unknown metric '" + r.metric + "'");
      }
      continue;
    }
    throw ValidationError(where + "unknown metric '" + r.metric + "'");
  }

  for (const auto& k : key_order) {
    auto e = entries[k];
    if (auto it = firsts.find(k); it != firsts.end()) e.first_iteration = it->second;
    ds.add(std::move(e));
  }
  for (auto& x : excluded) ds.exclude(std::move(x));
  return ds;
}

std::string quant_text(const Row& r) { return r.budget ? "*" : std::string(to_string(r.key.quantization)); }

json order_to_json(const SweepOrder& o) {
  return {{"devices", o.devices()}, {"power_models", o.power_models()}, {"models", o.models()}};
}

SweepOrder order_from_json(const json& j, const std::string& where) {
  try {
    return SweepOrder(j.at("devices").get<std::vector<std::string>>(),
                      j.at("power_models").get<std::vector<std::vector<std::string>>>(),
                      j.at("models").get<std::vector<std::string>>());
  } catch (const json::exception& e) {
    throw ValidationError(where + "bad order: " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(where + e.what());
  }
}

}  // namespace

std::string write_dataset(const Dataset& dataset, FileFormat format) {
  std::ostringstream os;
  const auto rows = dataset_rows(dataset);
  if (format == FileFormat::Csv) {
    os << "# " << kManifest << "\n# units: " << kUnits << "\n";
    // name order, so a re-read keeps the rows in the same sequence
    if (!dataset.order().empty()) os << kOrderPrefix << order_to_json(dataset.order()).dump() << "\n";
    os << kHeader << "\n";
    for (const auto& r : rows)
      os << csv_escape(r.key.device) << "," << csv_escape(r.key.power_model) << "," << csv_escape(r.key.model) << ","
         << quant_text(r) << "," << r.metric << "," << csv_escape(r.value) << "\n";
  } else {
    json manifest{{"manifest", kManifest}, {"units", kUnits}};
    if (!dataset.order().empty()) manifest["order"] = order_to_json(dataset.order());
    os << manifest.dump() << "\n";
    for (const auto& r : rows)
      os << json{{"device", r.key.device},
                 {"power_model", r.key.power_model},
                 {"model", r.key.model},
                 {"quantization", quant_text(r)},
                 {"metric", r.metric},
                 {"value", r.value}}
                .dump()
         << "\n";
  }
  return os.str();
}

Dataset read_dataset(std::string_view text, SweepOrder order) {
  std::vector<std::pair<int, Row>> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  bool json_lines = false, header_seen = false, first_content = true;
  std::optional<SweepOrder> file_order;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string where = "dataset row " + std::to_string(lineno) + ": ";
    if (line.starts_with(kOrderPrefix)) {
      try {
        file_order = order_from_json(json::parse(line.substr(kOrderPrefix.size())), where);
      } catch (const json::exception& e) {
        throw ValidationError(where + e.what());
      }
      continue;
    }
    if (line.empty() || line.starts_with("#")) continue;
    if (first_content) {
      first_content = false;
      if (line.starts_with("{")) {
        json_lines = true;
        try {
          const json m = json::parse(line);
          if (m.value("manifest", "") != kManifest) throw ValidationError(where + "unknown manifest");
          if (m.contains("order")) file_order = order_from_json(m.at("order"), where);
        } catch (const json::exception& e) {
          throw ValidationError(where + e.what());
        }
        continue;
      }
    }
    Row r;
    std::string device, power_model, quant;
    if (json_lines) {
      try {
        const json j = json::parse(line);
        device = j.at("device").get<std::string>();
        power_model = j.at("power_model").get<std::string>();
        r.key.model = j.at("model").get<std::string>();
        quant = j.at("quantization").get<std::string>();
        r.metric = j.at("metric").get<std::string>();
        r.value = j.at("value").get<std::string>();
      } catch (const json::exception& e) {
        throw ValidationError(where + e.what());
      }
    } else {
      if (!header_seen) {
        if (line != kHeader) throw ValidationError(where + "expected header '" + std::string(kHeader) + "'");
        header_seen = true;
        continue;
      }
      std::vector<std::string> f;
      try {
        f = split_csv_line(line);
      } catch (const ValidationError& e) {
        throw ValidationError(where + e.what());
      }
      if (f.size() != 6) throw ValidationError(where + "expected 6 fields, got " + std::to_string(f.size()));
      device = f[0];
      power_model = f[1];
      r.key.model = f[2];
      quant = f[3];
      r.metric = f[4];
      r.value = f[5];
    }
    r.key.device = device;
    r.key.power_model = power_model;
    r.budget = r.key.model == "*" && quant == "*";
    if (!r.budget) r.key.quantization = parse_quant_field(quant, where);
    r.wildcard = device == "*" && power_model == "*";
    rows.emplace_back(lineno, std::move(r));
  }
  if (order.empty() && file_order) order = std::move(*file_order);
  return build_dataset(rows, std::move(order));
}

Dataset load_dataset(const std::filesystem::path& path, SweepOrder order) {
  return read_dataset(read_text_file(path), std::move(order));
}

void save_dataset(const std::filesystem::path& path, const Dataset& dataset, FileFormat format) {
  write_text_file(path, write_dataset(dataset, format));
}

namespace {

void set_metric(Dataset& into, const ConfigPoint& key, MetricField field, std::string_view name, double v,
                const std::string& where) {
  if (into.is_excluded(key)) return;  // exclusion wins over any populated cell
  auto* e = into.find(key);
  if (!e) {
    ConfigMetrics fresh;
    fresh.config = key;
    into.add(std::move(fresh));
    e = into.find(key);
  }
  auto& slot = e->*field;
  if (slot && *slot != v)
    throw ValidationError(where + "conflicting " + std::string(name) + " for " + describe(key) + " (" +
                          format_double(*slot) + " vs " + format_double(v) + ")");
  slot = v;
}

}  // namespace

void ingest_table(Dataset& into, std::string_view text, TableSchema schema) {
  if (schema == TableSchema::Full) {
    merge_into(into, read_dataset(text));
    return;
  }
  const bool accuracy = schema == TableSchema::Accuracy;
  const bool budget = schema == TableSchema::PowerBudget;
  const std::size_t width = accuracy || budget ? 3 : 5;
  const MetricField field =
      schema == TableSchema::LoadLatency ? &ConfigMetrics::load_latency_s : &ConfigMetrics::gen_latency_s;
  const std::string_view name = schema == TableSchema::LoadLatency ? "load_latency_s" : "gen_latency_s";

  std::set<std::pair<ConfigPoint, bool>> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos || line.starts_with("#")) continue;
    const std::string where = "row " + std::to_string(lineno) + ": ";
    std::vector<std::string> f;
    try {
      f = split_csv_line(line);
    } catch (const ValidationError& e) {
      throw ValidationError(where + e.what());
    }
    for (auto& x : f) {
      while (!x.empty() && x.front() == ' ') x.erase(0, 1);
      while (!x.empty() && x.back() == ' ') x.pop_back();
    }
    if (first_content) {
      first_content = false;
      if (!f.empty() && (f[0] == "device" || f[0] == "model")) continue;  // header
    }
    if (f.size() != width)
      throw ValidationError(where + "expected " + std::to_string(width) + " fields, got " + std::to_string(f.size()));

    if (accuracy) {
      const auto q = parse_quant_field(f[1], where);
      if (f[2] == "-") continue;
      into.set_accuracy(f[0], q, parse_number(f[2], where));
      continue;
    }

    if (budget) {
      if (f[0].empty() || f[1].empty()) throw ValidationError(where + "empty key field");
      if (f[2] == "-") continue;
      const double w = parse_number(f[2], where);
      if (!(w > 0)) throw ValidationError(where + "power budget must be > 0");
      into.set_power_budget(f[0], f[1], w);
      continue;
    }

    ConfigPoint key{f[0], f[1], f[2], parse_quant_field(f[3], where)};
    if (key.device.empty() || key.power_model.empty() || key.model.empty())
      throw ValidationError(where + "empty key field");
    if (!seen.insert({key, false}).second) throw ValidationError(where + "duplicate row for " + describe(key));
    if (f[4] == "-") {
      into.exclude({key, "no data in source table"});
      continue;
    }
    const double v = parse_number(f[4], where);
    if (!(v > 0)) throw ValidationError(where + "latency must be > 0");
    set_metric(into, key, field, name, v, where);
  }
}

void merge_into(Dataset& into, const Dataset& from) {
  for (const auto& [k, v] : from.accuracy_table()) into.set_accuracy(k.first, k.second, v);
  for (const auto& [k, v] : from.power_budget_table()) into.set_power_budget(k.first, k.second, v);
  for (const auto& src : from.entries()) {
    if (into.is_excluded(src.config)) continue;
    auto* dst = into.find(src.config);
    if (!dst) {
      into.add(src);
      continue;
    }
    const std::string where = "merge: ";
    for (const auto& f : kEntryFields)
      if (src.*(f.field)) set_metric(into, src.config, f.field, f.name, *(src.*(f.field)), where);
    dst = into.find(src.config);
    if (src.first_iteration) {
      if (dst->first_iteration && !(*dst->first_iteration == *src.first_iteration))
        throw ValidationError(where + "conflicting first iteration for " + describe(src.config));
      dst->first_iteration = src.first_iteration;
    }
    if (src.iteration_count && dst->iteration_count && src.iteration_count != dst->iteration_count)
      throw ValidationError(where + "conflicting iteration count for " + describe(src.config));
    dst->iteration_count = std::max(dst->iteration_count, src.iteration_count);
  }
  for (const auto& x : from.excluded()) into.exclude(x);
}

}  // namespace edgebench
