#pragma once

#include <optional>
#include <string>
#include <vector>

#include "edgebench/dataset.hpp"

namespace edgebench {

enum class Relation { AtMost, AtLeast };
enum class Direction { Minimize, Maximize };

// Bounds are inclusive.
struct Constraint {
  MetricId metric;
  Relation relation;
  double bound;

  bool satisfied_by(double value) const { return relation == Relation::AtMost ? value <= bound : value >= bound; }
};

struct Query {
  std::vector<Constraint> constraints;
  MetricId objective = MetricId::Accuracy;
  Direction direction = Direction::Maximize;
};

// "gen_latency<=7.1" / "accuracy>=45". Throws ValidationError listing the allowed names.
Constraint parse_constraint(std::string_view text);
std::string format_constraint(const Constraint& c);  // "≤ 45 W"

// Entries satisfying every constraint, in sweep order.
std::vector<ConfigMetrics> filter(const Dataset& dataset, const std::vector<Constraint>& constraints);

struct Selection {
  // Feasible entries ordered by the objective (best first); equal values keep sweep order.
  std::vector<ConfigMetrics> ranked;
  // Entries sharing the best objective value, in sweep order. ranked.front() is ties.front().
  std::vector<ConfigMetrics> ties;
  std::optional<double> best_value;

  bool feasible() const { return !ranked.empty(); }
};

Selection select_best(const Dataset& dataset, const Query& query);

struct UseCaseRow {
  Query query;
  Selection selection;
};

std::vector<UseCaseRow> use_case_report(const Dataset& dataset, const std::vector<Query>& queries);

// Plain-text table, one row per query; infeasible rows say "infeasible".
std::string render_use_case_table(const std::vector<UseCaseRow>& rows);
// constraints,objective,direction,device,power_model,model,quantization,objective_value,tied_with
std::string render_use_case_csv(const std::vector<UseCaseRow>& rows);

// Entries not dominated on all listed metrics at once, in sweep order.
std::vector<ConfigMetrics> pareto_front(const Dataset& dataset, const std::vector<MetricId>& metrics,
                                        const std::vector<Direction>& directions);

}  // namespace edgebench
