#include "edgebench/orchestrator.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

#include "edgebench/errors.hpp"
#include "subprocess.hpp"

namespace edgebench {

// ---- marker protocol -----------------------------------------------------------

namespace {

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

bool is_marker_time(std::string_view s) {
  const auto dot = s.find('.');
  if (dot == std::string_view::npos) return false;
  return all_digits(s.substr(0, dot)) && all_digits(s.substr(dot + 1)) && s.size() - dot - 1 >= 6;
}

[[noreturn]] void bad_marker(std::string_view line, std::string_view why) {
  throw ProtocolError("malformed marker '" + std::string(line) + "': " + std::string(why));
}

}  // namespace

MarkerLine parse_marker_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  if (!line.starts_with(kMarkerPrefix)) return NotAMarker{};

  const std::string_view body = line.substr(kMarkerPrefix.size());
  const auto space = body.find(' ');
  if (space == std::string_view::npos) bad_marker(line, "expected '<NAME> <value>'");
  const std::string_view name = body.substr(0, space);
  const std::string_view value = body.substr(space + 1);
  if (value.find(' ') != std::string_view::npos) bad_marker(line, "trailing fields");

  if (name == "TOKENS") {
    if (!all_digits(value)) bad_marker(line, "token count must be a decimal integer");
    long long n = 0;
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), n);
    if (ec != std::errc{} || p != value.data() + value.size()) bad_marker(line, "token count out of range");
    return TokenCount{n};
  }

  const auto us = name.rfind('_');
  if (us == std::string_view::npos) bad_marker(line, "unknown marker name");
  const auto phase = parse_phase(name.substr(0, us));
  const auto boundary = parse_boundary(name.substr(us + 1));
  if (!phase || !boundary) bad_marker(line, "unknown marker name");
  if (!is_marker_time(value)) bad_marker(line, "timestamp needs >= 6 fractional digits");
  double t = 0;
  auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), t);
  if (ec != std::errc{} || p != value.data() + value.size()) bad_marker(line, "timestamp out of range");
  return MarkerEvent{*phase, *boundary, t};
}

std::string format_marker(Phase phase, Boundary boundary, double t_workload) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", t_workload);
  return std::string(kMarkerPrefix) + std::string(to_string(phase)) + "_" + std::string(to_string(boundary)) +
         " " + buf;
}

std::string format_tokens(long long n) { return std::string(kMarkerPrefix) + "TOKENS " + std::to_string(n); }

// ---- workload template -----------------------------------------------------------

namespace {

std::vector<std::string> split_words(const std::string& command) {
  std::vector<std::string> words;
  std::string cur;
  bool in_word = false;
  char quote = 0;
  for (char c : command) {
    if (quote) {
      if (c == quote) quote = 0;
      else cur += c;
    } else if (c == '\'' || c == '"') {
      quote = c;
      in_word = true;
    } else if (c == ' ' || c == '\t' || c == '\n') {
      if (in_word) words.push_back(std::move(cur));
      cur.clear();
      in_word = false;
    } else {
      cur += c;
      in_word = true;
    }
  }
  if (quote) throw ValidationError("workload.command: unterminated quote");
  if (in_word) words.push_back(std::move(cur));
  return words;
}

std::string format_seconds(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", s);
  return buf;
}

}  // namespace

std::vector<std::string> WorkloadTemplate::argv_for(const ConfigPoint& point, int iteration,
                                                    const SweepPlan& plan) const {
  const std::pair<std::string_view, std::string> subs[] = {
      {"{model}", point.model},
      {"{quant}", std::string(to_string(point.quantization))},
      {"{tokens}", std::to_string(plan.token_target)},
      {"{idle_seconds}", format_seconds(plan.idle_seconds)},
      {"{device}", point.device},
      {"{power_model}", point.power_model},
      {"{iteration}", std::to_string(iteration)},
  };
  auto words = split_words(command);
  if (words.empty()) throw ValidationError("workload.command: empty");
  for (auto& w : words) {
    std::string out;
    for (std::size_t i = 0; i < w.size();) {
      bool replaced = false;
      if (w[i] == '{') {
        for (const auto& [key, val] : subs) {
          if (std::string_view(w).substr(i, key.size()) == key) {
            out += val;
            i += key.size();
            replaced = true;
            break;
          }
        }
      }
      if (!replaced) out += w[i++];
    }
    w = std::move(out);
  }
  return words;
}

// ---- runs --------------------------------------------------------------------------

namespace {

std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t run_salt(const ConfigPoint& c, int iteration) {
  std::uint64_t h = fnv1a(c.device);
  h = fnv1a("|" + c.power_model, h);
  h = fnv1a("|" + c.model, h);
  h = fnv1a(to_string(c.quantization), h);
  return fnv1a("#" + std::to_string(iteration), h);
}

}  // namespace

RunLog run_single(const ConfigPoint& config, int iteration, const SweepPlan& plan,
                  const WorkloadTemplate& workload, const SamplerSource& sampler, const RunOptions& options,
                  const SweepObserver* observer) {
  if (!(options.timeout_s > 0)) throw ValidationError("timeout must be > 0");

  RunLog log;
  log.config = config;
  log.iteration = iteration;
  log.plan = plan;

  const bool virtual_clock = sampler.spec.clock == SamplerClock::Virtual;
  const auto argv = workload.argv_for(config, iteration, plan);

  std::unique_ptr<SamplerHandle> handle;
  if (!virtual_clock) {
    try {
      handle = start_sampling(sampler.spec, sampler.backend ? sampler.backend() : nullptr);
    } catch (const SamplerError& e) {
      throw SamplerFailure(e.what());
    }
  }

  std::optional<detail::Subprocess> proc;
  try {
    proc.emplace(argv);
  } catch (const detail::SpawnError&) {
    log.status = RunStatus::failed("spawn");
    if (handle) log.samples = handle->stop();
    return log;
  }
  if (observer && observer->on_spawn) observer->on_spawn(config, iteration);

  const double deadline = monotonic_seconds() + options.timeout_s;
  std::size_t step = 0;  // next expected event index in the six-event sequence
  bool have_tokens = false;
  std::optional<std::string> failure;
  std::string line;

  while (!failure) {
    const auto rs = proc->read_line(deadline, line);
    if (rs == detail::Subprocess::ReadStatus::Eof) break;
    if (rs == detail::Subprocess::ReadStatus::Timeout) {
      failure = "timeout";
      break;
    }
    const double t_recv = monotonic_seconds();
    if (handle && handle->failed()) {
      failure = "sampler";
      break;
    }

    MarkerLine parsed;
    try {
      parsed = parse_marker_line(line);
    } catch (const ProtocolError&) {
      failure = "protocol";
      break;
    }

    if (std::holds_alternative<NotAMarker>(parsed)) {
      if (options.chatter) options.chatter(line);
      continue;
    }
    if (const auto* tc = std::get_if<TokenCount>(&parsed)) {
      if (step != 6 || have_tokens) {
        failure = "protocol";
        break;
      }
      log.tokens_generated = tc->tokens;
      have_tokens = true;
      continue;
    }

    const auto& ev = std::get<MarkerEvent>(parsed);
    const Phase want_phase = step < 6 ? kPhases[step / 2] : Phase::Generate;
    const Boundary want_boundary = step % 2 == 0 ? Boundary::Start : Boundary::End;
    if (step >= 6 || ev.phase != want_phase || ev.boundary != want_boundary ||
        (!log.events.empty() && ev.t_workload < *log.events.back().t_workload)) {
      failure = "protocol";
      break;
    }
    log.events.push_back({ev.phase, ev.boundary, ev.t_workload, t_recv});
    ++step;
  }

  if (failure) proc->kill();
  const auto exit = proc->wait();
  if (observer && observer->on_exit) observer->on_exit(config, iteration);

  if (!failure) {
    if (!exit.clean()) failure = "crash";
    else if (step != 6 || !have_tokens || log.tokens_generated <= 0) failure = "protocol";
  }

  if (virtual_clock) {
    // Receipt clock is the workload clock rebased to the run start: zero pipe skew.
    if (!log.events.empty()) {
      const double origin = *log.events.front().t_workload;
      for (auto& e : log.events) e.t_receipt = *e.t_workload - origin;
    }
    const double end = log.events.empty() ? 0.0 : log.events.back().t_receipt;
    log.samples = sample_virtual(sampler.virtual_script, sampler.spec, end, run_salt(config, iteration));
  } else {
    if (!failure && !log.events.empty()) {
      const double cover = std::max(1.0, 4 * sampler.spec.interval_s);
      handle->wait_for_sample_after(log.events.back().t_receipt, cover);
    }
    if (handle->failed()) failure = "sampler";
    log.samples = handle->stop();
  }

  log.status = failure ? RunStatus::failed(*failure) : RunStatus::ok();
  return log;
}

std::vector<RunLog> run_points(const std::vector<ConfigPoint>& points, const SweepPlan& plan,
                               const WorkloadTemplate& workload, const SamplerSource& sampler,
                               const RunOptions& options, const SweepObserver& observer) {
  std::vector<RunLog> logs;
  for (const auto& point : points) {
    for (int k = 1; k <= plan.iterations; ++k) {  // iterations are numbered from 1
      auto log = run_single(point, k, plan, workload, sampler, options, &observer);
      if (observer.on_log) observer.on_log(log);
      const bool sampler_failed = !log.status.completed && log.status.reason == "sampler";
      logs.push_back(std::move(log));
      if (sampler_failed) throw SamplerFailure("telemetry sampler failed during " + describe(point));
    }
  }
  return logs;
}

std::vector<RunLog> run_sweep(const SweepPlan& plan, const WorkloadTemplate& workload,
                              const SamplerSource& sampler, const RunOptions& options,
                              const SweepObserver& observer) {
  if (plan.devices.empty() || plan.models.empty() || plan.quantizations.empty()) return {};
  return run_points(enumerate_sweep(plan), plan, workload, sampler, options, observer);
}

}  // namespace edgebench
