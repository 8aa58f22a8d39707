#include "edgebench/run_log.hpp"

namespace edgebench {

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::Idle: return "IDLE";
    case Phase::ModelLoad: return "MODEL_LOAD";
    case Phase::Generate: return "GENERATE";
  }
  return "?";
}

std::string_view to_string(Boundary b) { return b == Boundary::Start ? "START" : "END"; }

std::optional<Phase> parse_phase(std::string_view text) {
  if (text == "IDLE") return Phase::Idle;
  if (text == "MODEL_LOAD") return Phase::ModelLoad;
  if (text == "GENERATE") return Phase::Generate;
  return std::nullopt;
}

std::optional<Boundary> parse_boundary(std::string_view text) {
  if (text == "START") return Boundary::Start;
  if (text == "END") return Boundary::End;
  return std::nullopt;
}

const PhaseEvent* RunLog::find(Phase phase, Boundary boundary) const {
  for (const auto& e : events)
    if (e.phase == phase && e.boundary == boundary) return &e;
  return nullptr;
}

std::optional<std::string> check_invariants(const RunLog& log) {
  for (std::size_t i = 1; i < log.events.size(); ++i)
    if (log.events[i].t_receipt < log.events[i - 1].t_receipt)
      return "events not ordered by receipt time at index " + std::to_string(i);

  for (std::size_t i = 1; i < log.samples.size(); ++i)
    if (!(log.samples[i].t > log.samples[i - 1].t))
      return "samples not strictly increasing at index " + std::to_string(i);

  for (const auto& s : log.samples)
    if (s.power_w < 0 || s.gpu_mem_mb < 0 || s.ram_mb < 0) return "negative telemetry value";

  // Events must follow the fixed six-step order; a failed log may stop early.
  std::size_t step = 0;
  for (const auto& e : log.events) {
    if (step >= 6) return "more than six phase events";
    const Phase want_phase = kPhases[step / 2];
    const Boundary want_boundary = step % 2 == 0 ? Boundary::Start : Boundary::End;
    if (e.phase != want_phase || e.boundary != want_boundary)
      return "unexpected event " + std::string(to_string(e.phase)) + "_" + std::string(to_string(e.boundary));
    if (e.boundary == Boundary::End) {
      const auto& start = log.events[step - 1];
      if (e.t_receipt < start.t_receipt) return "END precedes START on receipt clock";
      if (e.t_workload && start.t_workload && *e.t_workload < *start.t_workload)
        return "END precedes START on workload clock";
    }
    ++step;
  }

  if (log.status.completed) {
    if (step != 6) return "completed log lacks one or more of the six phase events";
    if (log.tokens_generated <= 0) return "completed log has no generated tokens";
  } else if (log.status.reason.empty()) {
    return "failed log has no reason";
  }
  return std::nullopt;
}

}  // namespace edgebench
