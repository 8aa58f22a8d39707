#include "edgebench/recommender.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "edgebench/errors.hpp"

namespace edgebench {

namespace {

std::string_view label_of(MetricId m) {
  switch (m) {
    case MetricId::LoadLatency: return "Load latency";
    case MetricId::GenLatency: return "Generation latency";
    case MetricId::TotalLatency: return "Latency";
    case MetricId::PeakPowerGen: return "Power";
    case MetricId::EnergyGen: return "Energy";
    case MetricId::EnergyLoad: return "Load energy";
    case MetricId::PeakGpuMem: return "Pk. GPU memory";
    case MetricId::PeakRam: return "Pk. memory";
    case MetricId::TimePerToken: return "Time per token";
    case MetricId::Accuracy: return "Accuracy";
    case MetricId::PowerBudget: return "Power budget";
  }
  return "?";
}

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string with_unit(double v, MetricId m) {
  const auto unit = unit_of(m);
  return unit == "%" ? number(v) + "%" : number(v) + " " + std::string(unit);
}

// Oriented so that smaller is better.
double cost(double v, Direction d) { return d == Direction::Minimize ? v : -v; }

}  // namespace

Constraint parse_constraint(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  std::size_t op = text.find("<=");
  Relation rel = Relation::AtMost;
  if (op == std::string_view::npos) {
    op = text.find(">=");
    rel = Relation::AtLeast;
  }
  if (op == std::string_view::npos)
    throw ValidationError("constraint '" + std::string(text) + "': expected <metric><=<bound> or <metric>>=<bound>");
  const auto name = trim(text.substr(0, op));
  const auto bound_text = trim(text.substr(op + 2));
  const auto metric = parse_metric(name);
  if (!metric)
    throw ValidationError("unknown metric '" + std::string(name) + "'; allowed: " + allowed_metric_names());
  double bound = 0;
  auto [p, ec] = std::from_chars(bound_text.data(), bound_text.data() + bound_text.size(), bound);
  if (ec != std::errc{} || p != bound_text.data() + bound_text.size() || !std::isfinite(bound))
    throw ValidationError("constraint '" + std::string(text) + "': bound must be a finite number");
  return {*metric, rel, bound};
}

std::string format_constraint(const Constraint& c) {
  return std::string(c.relation == Relation::AtMost ? "≤ " : "≥ ") + with_unit(c.bound, c.metric);
}

std::vector<ConfigMetrics> filter(const Dataset& dataset, const std::vector<Constraint>& constraints) {
  for (const auto& c : constraints) {
    if (!std::isfinite(c.bound)) throw ValidationError("constraint bound must be finite");
    dataset.require(c.metric);
  }
  std::vector<ConfigMetrics> out;
  for (const auto& e : dataset.entries()) {
    const bool ok = std::all_of(constraints.begin(), constraints.end(),
                                [&](const Constraint& c) { return c.satisfied_by(*dataset.value(e, c.metric)); });
    if (ok) out.push_back(e);
  }
  return out;
}

Selection select_best(const Dataset& dataset, const Query& query) {
  dataset.require(query.objective);
  Selection s;
  s.ranked = filter(dataset, query.constraints);
  if (s.ranked.empty()) return s;

  auto key = [&](const ConfigMetrics& e) { return cost(*dataset.value(e, query.objective), query.direction); };
  std::stable_sort(s.ranked.begin(), s.ranked.end(),
                   [&](const ConfigMetrics& a, const ConfigMetrics& b) { return key(a) < key(b); });
  s.best_value = dataset.value(s.ranked.front(), query.objective);
  for (const auto& e : s.ranked) {
    if (key(e) != key(s.ranked.front())) break;
    s.ties.push_back(e);
  }
  return s;
}

std::vector<UseCaseRow> use_case_report(const Dataset& dataset, const std::vector<Query>& queries) {
  std::vector<UseCaseRow> rows;
  for (const auto& q : queries) rows.push_back({q, select_best(dataset, q)});
  return rows;
}

namespace {

std::string constraints_text(const Query& q) {
  std::string out;
  for (const auto& c : q.constraints) {
    if (!out.empty()) out += ", ";
    out += std::string(label_of(c.metric)) + " " + format_constraint(c);
  }
  return out.empty() ? "(none)" : out;
}

std::string objective_text(const Query& q) {
  return std::string(q.direction == Direction::Maximize ? "Highest " : "Lowest ") + std::string(label_of(q.objective));
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Display width of a UTF-8 string.
std::size_t width(const std::string& s) {
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) { return (c & 0xC0) != 0x80; }));
}

}  // namespace

std::string render_use_case_table(const std::vector<UseCaseRow>& rows) {
  struct Line {
    std::string constraints, objective, choice;
  };
  std::vector<Line> lines{{"Constraints", "Objective", "Configuration"}};
  for (const auto& r : rows) {
    Line l{constraints_text(r.query), objective_text(r.query), "infeasible"};
    if (r.selection.feasible()) {
      l.choice = describe(r.selection.ties.front().config) + " (" +
                 with_unit(*r.selection.best_value, r.query.objective) + ")";
      if (r.selection.ties.size() > 1)
        l.choice += " [tied with " + std::to_string(r.selection.ties.size() - 1) + " more]";
    }
    lines.push_back(std::move(l));
  }
  std::size_t w1 = 0, w2 = 0;
  for (const auto& l : lines) {
    w1 = std::max(w1, width(l.constraints));
    w2 = std::max(w2, width(l.objective));
  }
  std::ostringstream os;
  for (const auto& l : lines) {
    os << l.constraints << std::string(w1 - width(l.constraints), ' ') << " | " << l.objective
       << std::string(w2 - width(l.objective), ' ') << " | " << l.choice << "\n";
  }
  return os.str();
}

std::string render_use_case_csv(const std::vector<UseCaseRow>& rows) {
  std::ostringstream os;
  os << "constraints,objective,direction,device,power_model,model,quantization,objective_value,tied_with\n";
  for (const auto& r : rows) {
    std::string cons;
    for (const auto& c : r.query.constraints) {
      if (!cons.empty()) cons += ";";
      cons += std::string(to_string(c.metric)) + (c.relation == Relation::AtMost ? "<=" : ">=") + number(c.bound);
    }
    os << csv_field(cons) << "," << to_string(r.query.objective) << ","
       << (r.query.direction == Direction::Maximize ? "max" : "min") << ",";
    if (!r.selection.feasible()) {
      os << "infeasible,,,,,\n";
      continue;
    }
    const auto& c = r.selection.ties.front().config;
    std::string tied;
    for (std::size_t i = 1; i < r.selection.ties.size(); ++i) {
      if (!tied.empty()) tied += ";";
      tied += describe(r.selection.ties[i].config);
    }
    os << csv_field(c.device) << "," << csv_field(c.power_model) << "," << csv_field(c.model) << ","
       << to_string(c.quantization) << "," << number(*r.selection.best_value) << "," << csv_field(tied) << "\n";
  }
  return os.str();
}

std::vector<ConfigMetrics> pareto_front(const Dataset& dataset, const std::vector<MetricId>& metrics,
                                        const std::vector<Direction>& directions) {
  if (metrics.empty()) throw ValidationError("pareto front needs at least one metric");
  if (directions.size() != metrics.size())
    throw ValidationError("pareto front needs one direction per metric");
  for (auto m : metrics) dataset.require(m);

  struct Item {
    std::size_t index;
    std::vector<double> cost;
  };
  std::vector<Item> items;
  const auto& entries = dataset.entries();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    Item it{i, {}};
    for (std::size_t k = 0; k < metrics.size(); ++k)
      it.cost.push_back(cost(*dataset.value(entries[i], metrics[k]), directions[k]));
    items.push_back(std::move(it));
  }

  // Any dominator precedes its victim lexicographically, so one pass against
  // the running front suffices.
  std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.cost < b.cost; });
  auto dominates = [](const std::vector<double>& a, const std::vector<double>& b) {
    bool strict = false;
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (a[k] > b[k]) return false;
      if (a[k] < b[k]) strict = true;
    }
    return strict;
  };
  std::vector<const Item*> front;
  for (const auto& it : items)
    if (std::none_of(front.begin(), front.end(), [&](const Item* f) { return dominates(f->cost, it.cost); }))
      front.push_back(&it);

  std::vector<std::size_t> keep;
  for (const auto* f : front) keep.push_back(f->index);
  std::sort(keep.begin(), keep.end());
  std::vector<ConfigMetrics> out;
  for (auto i : keep) out.push_back(entries[i]);
  return out;
}

}  // namespace edgebench
