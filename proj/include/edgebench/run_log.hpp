#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "edgebench/model.hpp"
#include "edgebench/sampler.hpp"

namespace edgebench {

enum class Phase { Idle, ModelLoad, Generate };
enum class Boundary { Start, End };

inline constexpr Phase kPhases[] = {Phase::Idle, Phase::ModelLoad, Phase::Generate};

std::string_view to_string(Phase p);  // "IDLE", "MODEL_LOAD", "GENERATE"
std::string_view to_string(Boundary b);  // "START", "END"
std::optional<Phase> parse_phase(std::string_view text);
std::optional<Boundary> parse_boundary(std::string_view text);

struct PhaseEvent {
  Phase phase = Phase::Idle;
  Boundary boundary = Boundary::Start;
  std::optional<double> t_workload;
  double t_receipt = 0.0;

  friend bool operator==(const PhaseEvent&, const PhaseEvent&) = default;
};

struct RunStatus {
  bool completed = true;
  std::string reason;  // "spawn", "timeout", "crash", "protocol", "sampler" when failed

  static RunStatus ok() { return {}; }
  static RunStatus failed(std::string why) { return {false, std::move(why)}; }

  friend bool operator==(const RunStatus&, const RunStatus&) = default;
};

struct RunLog {
  ConfigPoint config;
  int iteration = 0;
  SweepPlan plan;  // echo of the plan that produced the run
  std::vector<PhaseEvent> events;
  std::vector<TelemetrySample> samples;
  long long tokens_generated = 0;
  RunStatus status;

  const PhaseEvent* find(Phase phase, Boundary boundary) const;

  friend bool operator==(const RunLog&, const RunLog&) = default;
};

// Empty when the log satisfies every RunLog invariant, otherwise the first violation.
std::optional<std::string> check_invariants(const RunLog& log);

}  // namespace edgebench
