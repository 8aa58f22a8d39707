#include <doctest.h>

#include <cmath>
#include <thread>

#include "edgebench/analysis.hpp"
#include "edgebench/errors.hpp"
#include "edgebench/orchestrator.hpp"

using namespace edgebench;

namespace {

const std::string kStub = EDGEBENCH_STUB;

SweepPlan one_device(int iterations = 1) {
  SweepPlan p;
  p.devices = {{"Dev", 1, 1, {"MAXN"}}};
  p.models = {{"a", 1}, {"b", 2}};
  p.quantizations = {Quantization::None};
  p.iterations = iterations;
  p.idle_seconds = 0.0;
  return p;
}

SamplerSource live_mock(double watts = 5.0) {
  SamplerSource s;
  s.spec.interval_s = 0.1;
  s.backend = [watts] { return std::make_unique<MockBackend>(MockScript::constant(watts)); };
  return s;
}

SamplerSource virtual_mock() {
  SamplerSource s;
  s.spec.clock = SamplerClock::Virtual;
  s.spec.seed = 9;
  s.virtual_script = MockScript::parse("0 4 0 100\n1 4 0 100\n1.5 10 500 300\n3.5 12 500 300\n");
  return s;
}

const ConfigPoint kPoint{"Dev", "MAXN", "a", Quantization::None};

}  // namespace

TEST_CASE("scripted run: phase durations and token count") {
  WorkloadTemplate w{kStub + " --idle 1 --load 0.5 --gen 2 --tokens 16"};
  const auto log = run_single(kPoint, 1, one_device(), w, live_mock());
  REQUIRE(log.status.completed);
  CHECK_FALSE(check_invariants(log).has_value());
  CHECK(log.tokens_generated == 16);
  CHECK(std::abs(phase_latency(log, Phase::Idle) - 1.0) <= 0.05);
  CHECK(std::abs(phase_latency(log, Phase::ModelLoad) - 0.5) <= 0.05);
  CHECK(std::abs(phase_latency(log, Phase::Generate) - 2.0) <= 0.05);
  // receipt clock tracks the workload clock closely when output is unbuffered
  for (const auto& e : log.events) CHECK(e.t_receipt >= log.events.front().t_receipt);
  // telemetry covers the whole run
  REQUIRE_FALSE(log.samples.empty());
  CHECK(log.samples.front().t <= log.events.front().t_receipt + 0.1);
  CHECK(log.samples.back().t > log.events.back().t_receipt);
}

TEST_CASE("hanging workload times out") {
  WorkloadTemplate w{kStub + " --idle 0 --load 0 --gen 0 --fail hang"};
  RunOptions opts;
  opts.timeout_s = 2.0;
  const auto t0 = std::chrono::steady_clock::now();
  const auto log = run_single(kPoint, 1, one_device(), w, live_mock(), opts);
  const double took = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(log.status == RunStatus::failed("timeout"));
  CHECK(took < 5.0);
  CHECK_FALSE(check_invariants(log).has_value());
}

TEST_CASE("GENERATE_START before MODEL_LOAD_END is a protocol failure") {
  WorkloadTemplate w{
      "/bin/sh -c \"echo '@@BENCH IDLE_START 1.000000'; echo '@@BENCH IDLE_END 2.000000'; "
      "echo '@@BENCH MODEL_LOAD_START 2.000000'; echo '@@BENCH GENERATE_START 3.000000'; sleep 5\""};
  const auto log = run_single(kPoint, 1, one_device(), w, live_mock());
  CHECK(log.status == RunStatus::failed("protocol"));
  CHECK(log.events.size() == 3);  // nothing recorded after the violation
}

TEST_CASE("malformed marker, decreasing time, clean exit without all markers") {
  WorkloadTemplate bad{"/bin/sh -c \"echo '@@BENCH IDLE_START 1.5'\""};
  CHECK(run_single(kPoint, 1, one_device(), bad, live_mock()).status == RunStatus::failed("protocol"));

  WorkloadTemplate back{"/bin/sh -c \"echo '@@BENCH IDLE_START 2.000000'; echo '@@BENCH IDLE_END 1.000000'\""};
  CHECK(run_single(kPoint, 1, one_device(), back, live_mock()).status == RunStatus::failed("protocol"));

  WorkloadTemplate short_{"/bin/sh -c \"echo '@@BENCH IDLE_START 1.000000'\""};
  CHECK(run_single(kPoint, 1, one_device(), short_, live_mock()).status == RunStatus::failed("protocol"));

  WorkloadTemplate twice{kStub + " --tokens 4 --clock script --chatter"};
  std::vector<std::string> chatter;
  RunOptions opts;
  opts.chatter = [&](std::string_view l) { chatter.emplace_back(l); };
  const auto ok = run_single(kPoint, 1, one_device(), twice, live_mock(), opts);
  CHECK(ok.status.completed);
  CHECK(chatter == std::vector<std::string>{"loading weights", "done"});
}

TEST_CASE("nonzero exit is a crash, missing binary is a spawn failure") {
  WorkloadTemplate w{kStub + " --fail load"};
  const auto log = run_single(kPoint, 1, one_device(), w, live_mock());
  CHECK(log.status == RunStatus::failed("crash"));
  CHECK(log.events.size() == 3);
  CHECK_FALSE(check_invariants(log).has_value());

  WorkloadTemplate gen{kStub + " --fail gen"};
  const auto g = run_single(kPoint, 1, one_device(), gen, live_mock());
  CHECK(g.status == RunStatus::failed("crash"));
  CHECK(g.events.size() == 5);

  WorkloadTemplate missing{"/nonexistent/edgebench-workload --x"};
  CHECK(run_single(kPoint, 1, one_device(), missing, live_mock()).status == RunStatus::failed("spawn"));
}

TEST_CASE("crash on iteration 3 of point A leaves point B alone") {
  const auto plan = one_device(5);
  WorkloadTemplate w{kStub + " --clock script --idle 0.1 --load 0.2 --gen 0.3 --tokens 8 --model {model} --iter {iteration} "
                            "--fail load --fail-iter 3 --fail-model a"};
  std::vector<std::string> trace;
  SweepObserver obs;
  obs.on_spawn = [&](const ConfigPoint& c, int k) { trace.push_back("spawn " + c.model + std::to_string(k)); };
  obs.on_exit = [&](const ConfigPoint& c, int k) { trace.push_back("exit " + c.model + std::to_string(k)); };
  int delivered = 0;
  obs.on_log = [&](const RunLog&) { ++delivered; };
  const auto logs = run_sweep(plan, w, virtual_mock(), {}, obs);
  REQUIRE(logs.size() == 10);
  CHECK(delivered == 10);
  for (int k = 0; k < 5; ++k) {
    CHECK(logs[k].config.model == "a");
    CHECK(logs[k].iteration == k + 1);
    CHECK(logs[k].status.completed == (k != 2));
    CHECK(logs[5 + k].config.model == "b");
    CHECK(logs[5 + k].status.completed);
  }
  CHECK(logs[2].status.reason == "crash");
  // strictly serial: every spawn is followed by its own exit
  REQUIRE(trace.size() == 20);
  for (std::size_t i = 0; i < trace.size(); i += 2) {
    CHECK(trace[i].starts_with("spawn "));
    CHECK(trace[i + 1] == "exit " + trace[i].substr(6));
  }
}

TEST_CASE("empty plan spawns nothing") {
  SweepPlan p;
  p.devices.clear();
  p.models.clear();
  int spawned = 0;
  SweepObserver obs;
  obs.on_spawn = [&](const ConfigPoint&, int) { ++spawned; };
  CHECK(run_sweep(p, WorkloadTemplate{kStub}, live_mock(), {}, obs).empty());
  CHECK(spawned == 0);
}

TEST_CASE("virtual clock runs are reproducible") {
  WorkloadTemplate w{kStub + " --clock script --idle 1 --load 0.5 --gen 2 --tokens 16"};
  const auto a = run_single(kPoint, 1, one_device(), w, virtual_mock());
  const auto b = run_single(kPoint, 1, one_device(), w, virtual_mock());
  REQUIRE(a.status.completed);
  CHECK(a == b);
  CHECK(a.events.front().t_receipt == 0.0);
  CHECK(a.events.back().t_receipt == doctest::Approx(3.5));
  CHECK(phase_latency(a, Phase::Generate) == doctest::Approx(2.0));
  const auto other = run_single(kPoint, 2, one_device(), w, virtual_mock());
  CHECK_FALSE(a.samples == other.samples);  // salt includes the iteration
}

TEST_CASE("sampler failure aborts the sweep after delivering the run") {
  class Flaky final : public TelemetryBackend {
   public:
    std::string name() const override { return "flaky"; }
    void open() override {}
    TelemetryReading poll(double) override {
      if (++calls_ > 2) throw std::runtime_error("i2c timeout");
      return {5.0, 0.0, 0.0};
    }

   private:
    int calls_ = 0;
  };
  SamplerSource s;
  s.spec.interval_s = 0.1;
  s.backend = [] { return std::make_unique<Flaky>(); };
  WorkloadTemplate w{kStub + " --idle 0.5 --load 0.2 --gen 0.2 --tokens 4"};
  std::vector<RunLog> seen;
  SweepObserver obs;
  obs.on_log = [&](const RunLog& l) { seen.push_back(l); };
  CHECK_THROWS_AS(run_sweep(one_device(3), w, s, {}, obs), SamplerFailure);
  REQUIRE(seen.size() == 1);
  CHECK(seen[0].status == RunStatus::failed("sampler"));
}

TEST_CASE("sampler that cannot start is a sweep-level failure") {
  SamplerSource s;
  s.backend = [] { return std::make_unique<ExternalBackend>("missing", nullptr); };
  CHECK_THROWS_AS(run_single(kPoint, 1, one_device(), WorkloadTemplate{kStub}, s), SamplerFailure);
}
