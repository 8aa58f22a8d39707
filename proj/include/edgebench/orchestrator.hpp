#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "edgebench/model.hpp"
#include "edgebench/run_log.hpp"
#include "edgebench/sampler.hpp"

namespace edgebench {

// ---- marker protocol -----------------------------------------------------------
//
//   @@BENCH <PHASE>_<BOUNDARY> <t>    PHASE in {IDLE, MODEL_LOAD, GENERATE}, BOUNDARY in {START, END},
//                                     t in decimal seconds with >= 6 fractional digits
//   @@BENCH TOKENS <n>                once, after GENERATE_END

inline constexpr std::string_view kMarkerPrefix = "@@BENCH ";

struct MarkerEvent {
  Phase phase;
  Boundary boundary;
  double t_workload;
  friend bool operator==(const MarkerEvent&, const MarkerEvent&) = default;
};

struct TokenCount {
  long long tokens;
  friend bool operator==(const TokenCount&, const TokenCount&) = default;
};

struct NotAMarker {
  friend bool operator==(const NotAMarker&, const NotAMarker&) = default;
};

using MarkerLine = std::variant<MarkerEvent, TokenCount, NotAMarker>;

// Throws ProtocolError for a line carrying the marker prefix that violates the grammar.
MarkerLine parse_marker_line(std::string_view line);

// Formats a marker line (without newline) in the canonical grammar.
std::string format_marker(Phase phase, Boundary boundary, double t_workload);
std::string format_tokens(long long n);

// ---- workload launch ------------------------------------------------------------

// Command template with placeholders {model}, {quant}, {tokens}, {idle_seconds},
// plus {device}, {power_model}, {iteration}. Split into argv on whitespace;
// single and double quotes group words. No shell is involved.
struct WorkloadTemplate {
  std::string command;

  std::vector<std::string> argv_for(const ConfigPoint& point, int iteration, const SweepPlan& plan) const;
};

// ---- runs ---------------------------------------------------------------------

struct SamplerSource {
  SamplerSpec spec;
  BackendFactory backend;  // used with the monotonic clock
  MockScript virtual_script;  // used with the virtual clock
};

struct RunOptions {
  double timeout_s = 600.0;
  // Receives non-marker stdout lines from the workload.
  std::function<void(std::string_view)> chatter;
};

// Raised when the sampler fails; the sweep aborts after persisting the affected run.
class SamplerFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Lifecycle hooks. on_log is called (and must persist) before the next run starts.
struct SweepObserver {
  std::function<void(const ConfigPoint&, int iteration)> on_spawn;
  std::function<void(const ConfigPoint&, int iteration)> on_exit;
  std::function<void(const RunLog&)> on_log;
};

RunLog run_single(const ConfigPoint& config, int iteration, const SweepPlan& plan,
                  const WorkloadTemplate& workload, const SamplerSource& sampler,
                  const RunOptions& options = {}, const SweepObserver* observer = nullptr);

// Runs every point of enumerate_sweep(plan) for plan.iterations back-to-back.
// Throws SamplerFailure on telemetry failure; logs already delivered to the
// observer stay delivered.
std::vector<RunLog> run_sweep(const SweepPlan& plan, const WorkloadTemplate& workload,
                              const SamplerSource& sampler, const RunOptions& options = {},
                              const SweepObserver& observer = {});

// Same, over an explicit point list (already validated by the caller).
std::vector<RunLog> run_points(const std::vector<ConfigPoint>& points, const SweepPlan& plan,
                               const WorkloadTemplate& workload, const SamplerSource& sampler,
                               const RunOptions& options = {}, const SweepObserver& observer = {});

}  // namespace edgebench
