#include "edgebench/sampler.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <fstream>
#include <map>
#include <sstream>

#include "edgebench/errors.hpp"

namespace edgebench {

double monotonic_seconds() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

// ---- MockScript ------------------------------------------------------------

MockScript::MockScript(std::vector<Breakpoint> points) : points_(std::move(points)) {
  for (std::size_t i = 1; i < points_.size(); ++i)
    if (!(points_[i].t > points_[i - 1].t))
      throw ValidationError("mock script: breakpoint times must be strictly ascending (row " +
                            std::to_string(i + 1) + ")");
  for (const auto& p : points_)
    if (p.value.power_w < 0 || p.value.gpu_mem_mb < 0 || p.value.ram_mb < 0)
      throw ValidationError("mock script: negative telemetry value at t=" + std::to_string(p.t));
}

MockScript MockScript::parse(std::string_view text) {
  std::vector<Breakpoint> points;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream row(line);
    Breakpoint bp{};
    std::string extra;
    if (!(row >> bp.t >> bp.value.power_w >> bp.value.gpu_mem_mb >> bp.value.ram_mb) || (row >> extra))
      throw ValidationError("mock script line " + std::to_string(lineno) +
                            ": expected '<t> <power_w> <gpu_mem_mb> <ram_mb>'");
    points.push_back(bp);
  }
  return MockScript(std::move(points));
}

MockScript MockScript::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SamplerError("mock script not readable: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

MockScript MockScript::constant(double power_w, double gpu_mem_mb, double ram_mb) {
  return MockScript(std::vector<Breakpoint>{Breakpoint{0.0, {power_w, gpu_mem_mb, ram_mb}}});
}

TelemetryReading MockScript::at(double t) const {
  if (points_.empty()) return {};
  if (t <= points_.front().t) return points_.front().value;
  if (t >= points_.back().t) return points_.back().value;
  auto hi = std::upper_bound(points_.begin(), points_.end(), t,
                             [](double v, const Breakpoint& b) { return v < b.t; });
  auto lo = hi - 1;
  const double f = (t - lo->t) / (hi->t - lo->t);
  auto lerp = [f](double a, double b) { return a + (b - a) * f; };
  return {lerp(lo->value.power_w, hi->value.power_w), lerp(lo->value.gpu_mem_mb, hi->value.gpu_mem_mb),
          lerp(lo->value.ram_mb, hi->value.ram_mb)};
}

void MockBackend::open() {
  if (script_.empty()) throw SamplerError("mock backend: script has no breakpoints");
}

namespace {
std::mutex& adapter_mu() {
  static std::mutex mu;
  return mu;
}
std::map<std::string, AdapterFactory>& adapters() {
  static std::map<std::string, AdapterFactory> table;
  return table;
}
}  // namespace

void register_telemetry_adapter(const std::string& name, AdapterFactory factory) {
  std::lock_guard lock(adapter_mu());
  adapters()[name] = std::move(factory);
}

std::unique_ptr<DeviceTelemetryAdapter> make_telemetry_adapter(const std::string& name) {
  AdapterFactory f;
  {
    std::lock_guard lock(adapter_mu());
    auto it = adapters().find(name);
    if (it == adapters().end()) return nullptr;
    f = it->second;
  }
  return f();
}

void ExternalBackend::open() {
  if (!impl_) throw SamplerError("telemetry adapter '" + adapter_ + "' is not available on this host");
}

// ---- live sampler ------------------------------------------------------------

void validate_sampler_spec(const SamplerSpec& spec) {
  if (!(spec.interval_s >= kMinSampleInterval))
    throw ValidationError("sampler.interval_s: must be >= 0.1 s (got " + std::to_string(spec.interval_s) +
                          ")");
}

SamplerHandle::SamplerHandle(SamplerSpec spec, std::unique_ptr<TelemetryBackend> backend)
    : spec_(spec), backend_(std::move(backend)) {}

SamplerHandle::~SamplerHandle() { stop(); }

std::unique_ptr<SamplerHandle> start_sampling(const SamplerSpec& spec,
                                              std::unique_ptr<TelemetryBackend> backend) {
  validate_sampler_spec(spec);
  if (!backend) throw SamplerError("no telemetry backend configured");
  backend->open();
  std::unique_ptr<SamplerHandle> h(new SamplerHandle(spec, std::move(backend)));
  h->start_ = monotonic_seconds();
  h->thread_ = std::jthread([raw = h.get()](std::stop_token st) { raw->loop(st); });
  return h;
}

void SamplerHandle::loop(std::stop_token stop) {
  const double interval = spec_.interval_s;
  double next = start_;
  double last_t = -1.0;
  std::mutex sleep_mu;
  std::condition_variable_any sleeper;
  auto& cv = cv_;

  while (!stop.stop_requested()) {
    const double poll_start = monotonic_seconds();
    last_poll_start_.store(poll_start);
    in_poll_.store(true);
    TelemetryReading r;
    try {
      r = backend_->poll(poll_start - start_);
    } catch (const std::exception& e) {
      in_poll_.store(false);
      std::lock_guard lock(mu_);
      failure_ = std::string("backend error: ") + e.what();
      failed_.store(true);
      cv.notify_all();
      return;
    }
    in_poll_.store(false);
    const double t = monotonic_seconds();
    {
      std::lock_guard lock(mu_);
      if (last_t >= 0 && t - last_t > kStallFactor * interval && !failed_.load()) {
        failure_ = "backend stalled for " + std::to_string(t - last_t) + " s";
        failed_.store(true);
      }
      if (t > last_t) {
        samples_.push_back({t, std::max(0.0, r.power_w), std::max(0.0, r.gpu_mem_mb), std::max(0.0, r.ram_mb)});
        last_t = t;
      }
    }
    cv.notify_all();

    next += interval;
    if (next < t) next = t + interval;  // fell behind: resume the grid from now
    std::unique_lock lock(sleep_mu);
    const auto deadline = std::chrono::steady_clock::time_point(
        std::chrono::duration_cast<std::chrono::steady_clock::duration>(std::chrono::duration<double>(next)));
    sleeper.wait_until(lock, stop, deadline, [] { return false; });
  }
}

const std::vector<TelemetrySample>& SamplerHandle::stop() {
  if (!stopped_) {
    if (thread_.joinable()) {
      thread_.request_stop();
      thread_.join();
    }
    stopped_ = true;
    cv_.notify_all();
  }
  return samples_;
}

bool SamplerHandle::failed() const {
  if (failed_.load()) return true;
  if (!stopped_ && in_poll_.load() &&
      monotonic_seconds() - last_poll_start_.load() > kStallFactor * spec_.interval_s)
    return true;
  return false;
}

std::string SamplerHandle::failure_reason() const {
  std::lock_guard lock(mu_);
  if (!failure_.empty()) return failure_;
  return failed() ? "backend poll blocked beyond stall limit" : "";
}

bool SamplerHandle::wait_for_sample_after(double t, double timeout_s) const {
  auto& cv = cv_;
  std::unique_lock lock(mu_);
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                            std::chrono::duration<double>(timeout_s));
  return cv.wait_until(lock, deadline, [&] {
    return (!samples_.empty() && samples_.back().t > t) || failed_.load() || stopped_;
  }) && !samples_.empty() && samples_.back().t > t;
}

// ---- virtual clock -------------------------------------------------------------

namespace {
// splitmix64: fixed, platform-independent stream for jitter.
std::uint64_t splitmix(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}
}  // namespace

std::vector<TelemetrySample> sample_virtual(const MockScript& script, const SamplerSpec& spec,
                                            double end_s, std::uint64_t run_salt) {
  validate_sampler_spec(spec);
  if (script.empty()) throw SamplerError("mock backend: script has no breakpoints");
  std::uint64_t state = spec.seed ^ (run_salt * 0xD1B54A32D192ED03ull);
  std::vector<TelemetrySample> out;
  double t = 0.0;
  for (;;) {
    const auto r = script.at(t);
    out.push_back({t, r.power_w, r.gpu_mem_mb, r.ram_mb});
    if (t > end_s) break;
    // gap in [0.8, 1.2] x interval
    const double u = static_cast<double>(splitmix(state) >> 11) * 0x1.0p-53;
    t += spec.interval_s * (0.8 + 0.4 * u);
  }
  return out;
}

}  // namespace edgebench
