#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "edgebench/analysis.hpp"
#include "edgebench/errors.hpp"
#include "fixtures.hpp"

using namespace edgebench;
using fixtures::LogShape;
using fixtures::make_log;

namespace {

RunLog events_only(std::vector<std::pair<Phase, std::pair<double, double>>> phases) {
  RunLog log;
  for (auto& [p, t] : phases) {
    log.events.push_back({p, Boundary::Start, t.first, t.first});
    log.events.push_back({p, Boundary::End, t.second, t.second});
  }
  log.tokens_generated = 1;
  return log;
}

// Left Riemann sum with n steps; independent of the trapezoid code.
double rectangle_sum(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += f(a + (i + 0.5) * h) * h;
  return s;
}

}  // namespace

TEST_CASE("phase latency examples") {
  auto log = events_only({{Phase::ModelLoad, {10.000, 12.280}}});
  CHECK(phase_latency(log, Phase::ModelLoad) == doctest::Approx(2.280).epsilon(1e-12));
  log = events_only({{Phase::Generate, {3.5, 54.7}}});
  CHECK(phase_latency(log, Phase::Generate) == doctest::Approx(51.2).epsilon(1e-12));
  log = events_only({{Phase::Idle, {4.0, 4.0}}});
  CHECK(phase_latency(log, Phase::Idle) == 0.0);
  CHECK_THROWS_AS(phase_latency(log, Phase::Generate), IncompletePhaseError);
}

TEST_CASE("phase latency prefers the workload clock") {
  RunLog log;
  log.events.push_back({Phase::Generate, Boundary::Start, 1.0, 100.0});
  log.events.push_back({Phase::Generate, Boundary::End, 3.0, 105.0});
  CHECK(phase_latency(log, Phase::Generate) == 2.0);
  log.events[1].t_workload.reset();
  CHECK(phase_latency(log, Phase::Generate) == 5.0);
}

TEST_CASE("baseline power examples") {
  auto with_idle = [](std::vector<double> watts) {
    RunLog log = events_only({{Phase::Idle, {0.0, 10.0}}});
    double t = 1.0;
    for (double w : watts) log.samples.push_back({t++, w, 0, 0});
    log.samples.push_back({20.0, 99.0, 0, 0});  // outside the window
    return log;
  };
  CHECK(baseline_power(with_idle({5.0, 5.2, 5.1})) == doctest::Approx(5.1));
  CHECK(baseline_power(with_idle({4.0, 6.0})) == 5.0);
  CHECK(baseline_power(make_log(LogShape{}, [](double) { return 7.0; })) == 7.0);
  RunLog none = events_only({{Phase::Idle, {0.0, 10.0}}});
  none.samples.push_back({11.0, 3.0, 0, 0});
  CHECK_THROWS_AS(baseline_power(none), NoBaselineError);
}

TEST_CASE("excess energy examples") {
  LogShape s;
  s.gen_start = 3.0;
  s.gen_end = 13.0;
  s.dt = 0.25;
  const auto flat = make_log(s, [](double t) { return t >= 3.0 ? 15.0 : 5.0; });
  CHECK(excess_energy(flat, Phase::Generate, 5.0) == doctest::Approx(100.0).epsilon(1e-12));

  auto ramp = [](double t) { return t < 3.0 ? 5.0 : t > 13.0 ? 15.0 : 5.0 + (t - 3.0); };
  const auto ramped = make_log(s, ramp);
  CHECK(excess_energy(ramped, Phase::Generate, 5.0) == doctest::Approx(50.0).epsilon(1e-12));
  const double oracle = rectangle_sum([&](double t) { return ramp(t) - 5.0; }, 3.0, 13.0, 10000);
  CHECK(std::abs(excess_energy(ramped, Phase::Generate, 5.0) - oracle) / oracle < 1e-3);

  const auto level = make_log(s, [](double) { return 5.0; });
  CHECK(excess_energy(level, Phase::Generate, 5.0) == 0.0);
}

TEST_CASE("excess energy interpolates window edges and keeps negative excess") {
  // samples at 0, 1, 2, 3; window [0.5, 2.5] over p(t) = t
  std::vector<TelemetrySample> xs;
  for (int i = 0; i <= 3; ++i) xs.push_back({double(i), double(i), 0, 0});
  // integral of t over [0.5, 2.5] = (6.25 - 0.25) / 2 = 3
  CHECK(excess_energy(xs, 0.5, 2.5, 0.0) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(excess_energy(xs, 0.5, 2.5, 2.0) == doctest::Approx(-1.0).epsilon(1e-12));
  // window extending past the last sample: only interior points remain
  CHECK(excess_energy(xs, 0.5, 10.0, 0.0) == doctest::Approx(0.5 * (0.5 + 1) * 0.5 + 1.5 + 2.5));
  std::vector<TelemetrySample> one{{5.0, 1.0, 0, 0}};
  CHECK_THROWS_AS(excess_energy(one, 0.0, 10.0, 0.0), InsufficientSamplesError);
}

TEST_CASE("trapezoid is exact for piecewise-linear power with breakpoints on samples") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<TelemetrySample> xs;
    double t = 0.0;
    for (int i = 0; i < 30; ++i) {
      xs.push_back({t, 20.0 * u(rng), 0, 0});
      t += 0.05 + u(rng);
    }
    // exact integral of the polyline between samples 3 and 25
    double exact = 0.0;
    for (int i = 4; i <= 25; ++i) exact += (xs[i].t - xs[i - 1].t) * (xs[i].power_w + xs[i - 1].power_w) / 2.0;
    const double base = 3.0;
    exact -= base * (xs[25].t - xs[3].t);
    CHECK(excess_energy(xs, xs[3].t, xs[25].t, base) == doctest::Approx(exact).epsilon(1e-9));
  }
}

TEST_CASE("peak stats examples") {
  LogShape s;
  s.dt = 1.0;
  s.gen_start = 3.0;
  s.gen_end = 5.0;  // samples at 3, 4, 5 in Generate
  const double pw[] = {10, 14, 12};
  auto log = make_log(s, [&](double t) { return t >= 3 && t <= 5 ? pw[int(t) - 3] : 1.0; },
                      [](double t) { return t <= 3 ? 100 * t : 300.0; },  // rises during load, flat after
                      [](double t) { return t <= 3 ? 50 * t : 150.0; });
  const auto p = peak_stats(log);
  CHECK(p.peak_power_gen_w == 14.0);
  CHECK(p.peak_gpu_mem_mb == 300.0);
  CHECK(p.peak_ram_mb == 150.0);

  RunLog single = events_only({{Phase::ModelLoad, {0, 1}}, {Phase::Generate, {1, 2}}});
  single.samples = {{1.5, 9.0, 42.0, 43.0}};
  const auto q = peak_stats(single);
  CHECK(q.peak_power_gen_w == 9.0);
  CHECK(q.peak_gpu_mem_mb == 42.0);
  CHECK(q.peak_ram_mb == 43.0);

  single.samples = {{5.0, 9.0, 42.0, 43.0}};
  CHECK_THROWS_AS(peak_stats(single), InsufficientSamplesError);
}

TEST_CASE("time per token examples") {
  auto tpt = [](double gen, long long n) {
    auto log = events_only({{Phase::Generate, {3.5, 3.5 + gen}}});
    log.tokens_generated = n;
    return time_per_token(log);
  };
  CHECK(tpt(51.2, 512) == doctest::Approx(0.1));
  CHECK(tpt(7.033, 512) == doctest::Approx(0.013736).epsilon(1e-4));
  CHECK(tpt(10.0, 1) == 10.0);
  CHECK_THROWS_AS(tpt(1.0, 0), std::domain_error);
}

TEST_CASE("median rules") {
  const std::vector<double> five{2.3, 2.1, 2.4, 2.28, 2.2};
  CHECK(median(five) == 2.28);
  CHECK(median(std::vector<double>{4.0, 6.0}) == 5.0);
  CHECK(median(std::vector<double>{7.0}) == 7.0);
  CHECK_THROWS_AS(median(std::vector<double>{}), std::invalid_argument);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> v(1 + rng() % 12);
    for (auto& x : v) x = u(rng);
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const double oracle = n % 2 ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
    const double m = median(v);
    CHECK(m == oracle);
    std::shuffle(v.begin(), v.end(), rng);
    CHECK(median(v) == m);
  }
}

namespace {

std::vector<RunLog> five_runs(std::vector<double> loads) {
  std::vector<RunLog> logs;
  int k = 1;
  for (double l : loads) {
    LogShape s;
    s.load_end = s.load_start + l;
    s.gen_start = s.load_end;
    s.gen_end = s.gen_start + 4.0;
    auto log = make_log(s, [&](double t) { return t < 1.0 ? 5.0 : 12.0; });
    log.iteration = k++;
    logs.push_back(std::move(log));
  }
  return logs;
}

}  // namespace

TEST_CASE("aggregate examples") {
  auto logs = five_runs({2.1, 2.2, 2.28, 2.3, 2.4});
  std::swap(logs[0], logs[3]);  // order of input must not matter
  auto r = aggregate(logs);
  REQUIRE(std::holds_alternative<ConfigMetrics>(r));
  const auto& c = std::get<ConfigMetrics>(r);
  CHECK(*c.load_latency_s == doctest::Approx(2.28).epsilon(1e-12));
  CHECK(c.iteration_count == 5);
  REQUIRE(c.first_iteration);
  CHECK(c.first_iteration->load_latency_s == doctest::Approx(2.1).epsilon(1e-12));
  CHECK(*c.gen_latency_s == 4.0);
  CHECK(*c.baseline_power_w == 5.0);
  CHECK(*c.peak_power_gen_w == 12.0);

  logs[2].status = RunStatus::failed("crash");
  r = aggregate(logs);
  REQUIRE(std::holds_alternative<Exclusion>(r));
  CHECK(std::get<Exclusion>(r).reason.find("crash") != std::string::npos);

  const auto same = five_runs({3.0, 3.0, 3.0, 3.0, 3.0});
  const auto& s = std::get<ConfigMetrics>(aggregate(same));
  CHECK(*s.load_latency_s == 3.0);
  CHECK(s.first_iteration->load_latency_s == 3.0);

  CHECK_THROWS_AS(aggregate(std::vector<RunLog>{}), std::invalid_argument);
}

TEST_CASE("aggregate leaves telemetry metrics empty unless every run has them") {
  auto logs = five_runs({2, 2, 2, 2, 2});
  logs[1].samples.clear();
  const auto& c = std::get<ConfigMetrics>(aggregate(logs));
  CHECK(c.load_latency_s.has_value());
  CHECK_FALSE(c.energy_gen_j.has_value());
  CHECK_FALSE(c.peak_power_gen_w.has_value());
}

TEST_CASE("aggregate excludes iff some iteration failed") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    auto logs = five_runs({1, 2, 3, 4, 5});
    bool any = false;
    for (auto& l : logs)
      if (rng() % 6 == 0) {
        l.status = RunStatus::failed("timeout");
        any = true;
      }
    CHECK(std::holds_alternative<Exclusion>(aggregate(logs)) == any);
  }
}

TEST_CASE("iteration drift") {
  auto logs = five_runs({4.0, 2.2, 2.3, 2.25, 2.28});
  auto d = iteration_drift(logs);
  CHECK(d.load_latency_s.first == doctest::Approx(4.0));
  CHECK(d.load_latency_s.rest_median == doctest::Approx(2.265));

  logs = five_runs({3, 3, 3, 3, 3});
  d = iteration_drift(logs);
  CHECK(d.load_latency_s.first == d.load_latency_s.rest_median);

  logs = five_runs({1.0, 2.0});
  d = iteration_drift(logs);
  CHECK(d.load_latency_s.first == doctest::Approx(1.0));
  CHECK(d.load_latency_s.rest_median == doctest::Approx(2.0));

  logs[1].status = RunStatus::failed("crash");
  CHECK_THROWS_AS(iteration_drift(logs), std::invalid_argument);
}

TEST_CASE("run metrics satisfy the peak and positivity invariants") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    LogShape s;
    s.idle_end = s.load_start = u(rng);
    s.load_end = s.gen_start = s.load_start + u(rng);
    s.gen_end = s.gen_start + u(rng);
    s.dt = 0.1;
    const double idle_w = u(rng);
    auto log = make_log(s, [&](double t) { return t <= s.idle_end ? idle_w : idle_w + 3.0 * std::sin(t) * std::sin(t); });
    const auto m = compute_run_metrics(log);
    CHECK(m.load_latency_s > 0);
    CHECK(m.gen_latency_s > 0);
    REQUIRE(m.peak_power_gen_w);
    CHECK(*m.peak_power_gen_w >= *m.baseline_power_w);
  }
}
