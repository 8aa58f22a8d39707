#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace edgebench {

// Seconds on the process-wide monotonic clock shared by the orchestrator and the sampler.
double monotonic_seconds();

struct TelemetrySample {
  double t = 0.0;  // orchestrator monotonic clock, seconds
  double power_w = 0.0;
  double gpu_mem_mb = 0.0;
  double ram_mb = 0.0;

  friend bool operator==(const TelemetrySample&, const TelemetrySample&) = default;
};

struct TelemetryReading {
  double power_w = 0.0;
  double gpu_mem_mb = 0.0;
  double ram_mb = 0.0;
};

// Piecewise-linear (t, power, gpu_mem, ram) breakpoint table. Values hold flat
// before the first and after the last breakpoint.
class MockScript {
 public:
  struct Breakpoint {
    double t;
    TelemetryReading value;
  };

  MockScript() = default;
  explicit MockScript(std::vector<Breakpoint> points);

  // One breakpoint per line: "<t> <power_w> <gpu_mem_mb> <ram_mb>". '#' starts a comment.
  static MockScript parse(std::string_view text);
  static MockScript load(const std::filesystem::path& path);
  static MockScript constant(double power_w, double gpu_mem_mb = 0.0, double ram_mb = 0.0);

  TelemetryReading at(double t) const;
  const std::vector<Breakpoint>& breakpoints() const { return points_; }
  bool empty() const { return points_.empty(); }

 private:
  std::vector<Breakpoint> points_;
};

// Source of readings. `elapsed_s` is time since sampling started; device
// adapters that read live counters ignore it.
class TelemetryBackend {
 public:
  virtual ~TelemetryBackend() = default;
  virtual std::string name() const = 0;
  // Throws SamplerError when the backend cannot serve readings.
  virtual void open() {}
  virtual TelemetryReading poll(double elapsed_s) = 0;
};

class MockBackend final : public TelemetryBackend {
 public:
  explicit MockBackend(MockScript script) : script_(std::move(script)) {}
  std::string name() const override { return "mock"; }
  void open() override;
  TelemetryReading poll(double elapsed_s) override { return script_.at(elapsed_s); }

 private:
  MockScript script_;
};

// Real-device adapter contract: poll() -> (power_w, gpu_mem_mb, ram_mb).
// No implementation ships; registering one makes it selectable by name.
class DeviceTelemetryAdapter {
 public:
  virtual ~DeviceTelemetryAdapter() = default;
  virtual TelemetryReading poll() = 0;
};

class ExternalBackend final : public TelemetryBackend {
 public:
  ExternalBackend(std::string adapter, std::unique_ptr<DeviceTelemetryAdapter> impl)
      : adapter_(std::move(adapter)), impl_(std::move(impl)) {}
  std::string name() const override { return "external:" + adapter_; }
  void open() override;
  TelemetryReading poll(double) override { return impl_->poll(); }

 private:
  std::string adapter_;
  std::unique_ptr<DeviceTelemetryAdapter> impl_;
};

using AdapterFactory = std::function<std::unique_ptr<DeviceTelemetryAdapter>()>;

// Process-wide adapter table consulted by the "external" backend.
void register_telemetry_adapter(const std::string& name, AdapterFactory factory);
// Null when no adapter of that name is registered.
std::unique_ptr<DeviceTelemetryAdapter> make_telemetry_adapter(const std::string& name);

enum class SamplerClock { Monotonic, Virtual };

struct SamplerSpec {
  double interval_s = 0.25;
  SamplerClock clock = SamplerClock::Monotonic;
  std::uint64_t seed = 0;  // virtual clock jitter seed
};

inline constexpr double kMinSampleInterval = 0.1;
inline constexpr double kStallFactor = 10.0;

void validate_sampler_spec(const SamplerSpec& spec);

using BackendFactory = std::function<std::unique_ptr<TelemetryBackend>()>;

// Live sampling on a background thread. Samples are published through a
// one-way channel; the sampler never reads orchestrator state.
class SamplerHandle {
 public:
  SamplerHandle(const SamplerHandle&) = delete;
  SamplerHandle& operator=(const SamplerHandle&) = delete;
  ~SamplerHandle();

  // Idempotent. Returns every sample captured since start, strictly increasing in t.
  const std::vector<TelemetrySample>& stop();

  // True once the backend stalled beyond kStallFactor x interval or threw.
  bool failed() const;
  std::string failure_reason() const;

  // Blocks until a sample with t > `t` exists, the sampler failed, or `timeout_s` elapsed.
  bool wait_for_sample_after(double t, double timeout_s) const;

  double start_time() const { return start_; }

 private:
  friend std::unique_ptr<SamplerHandle> start_sampling(const SamplerSpec&,
                                                       std::unique_ptr<TelemetryBackend>);
  SamplerHandle(SamplerSpec spec, std::unique_ptr<TelemetryBackend> backend);
  void loop(std::stop_token stop);

  SamplerSpec spec_;
  std::unique_ptr<TelemetryBackend> backend_;
  double start_ = 0.0;

  mutable std::mutex mu_;
  mutable std::condition_variable_any cv_;
  std::vector<TelemetrySample> samples_;
  std::string failure_;
  std::atomic<bool> failed_{false};
  std::atomic<double> last_poll_start_{0.0};
  std::atomic<bool> in_poll_{false};

  std::jthread thread_;
  std::atomic<bool> stopped_{false};
};

// Throws ValidationError for a bad spec, SamplerError if the backend cannot open.
std::unique_ptr<SamplerHandle> start_sampling(const SamplerSpec& spec,
                                              std::unique_ptr<TelemetryBackend> backend);

// Virtual-clock sampling: evaluates the script on a seeded jittered grid over
// [0, end_s] plus one trailing sample. Deterministic for equal inputs.
std::vector<TelemetrySample> sample_virtual(const MockScript& script, const SamplerSpec& spec,
                                            double end_s, std::uint64_t run_salt);

}  // namespace edgebench
