#pragma once
// Shared test builders. Nothing here calls into the code under test except to
// build inputs, so oracles stay independent.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "edgebench/model.hpp"
#include "edgebench/run_log.hpp"

namespace fixtures {

using namespace edgebench;

inline const std::vector<std::string> kModels = {"pythia-70m-deduped", "pythia-160m-deduped", "pythia-410m-deduped",
                                                 "pythia-1b-deduped", "pythia-1.4b-deduped"};

// The Orin matrix, by hand.
inline SweepPlan orin_plan() {
  SweepPlan p;
  p.devices = {
      {"AGX Orin Devkit", 2048, 32768, {"MAXN", "50W", "30W", "15W"}},
      {"AGX Orin 32GB", 1792, 32768, {"MAXN", "40W", "30W", "15W"}},
      {"Orin NX 16GB", 1024, 16384, {"MAXN", "25W", "15W", "10W"}},
      {"Orin NX 8GB", 1024, 8192, {"MAXN", "20W", "15W", "10W"}},
      {"Orin Nano 8GB", 1024, 8192, {"15W", "7W"}},
      {"Orin Nano 4GB", 512, 4096, {"10W", "7W-AI", "7W-CPU"}},
  };
  p.models = {{"pythia-70m-deduped", 70426624},
              {"pythia-160m-deduped", 162322944},
              {"pythia-410m-deduped", 405334016},
              {"pythia-1b-deduped", 1011781632},
              {"pythia-1.4b-deduped", 1414647808}};
  return p;
}

// A log with the six events at the given workload times (receipt = workload + skew)
// and samples drawn from power(t) every `dt` seconds over [t0, t_end].
struct LogShape {
  double idle_start = 0.0, idle_end = 1.0;
  double load_start = 1.0, load_end = 3.0;
  double gen_start = 3.0, gen_end = 8.0;
  double skew = 0.0;
  double dt = 0.25;
  long long tokens = 512;
};

inline RunLog make_log(const LogShape& s, const std::function<double(double)>& power,
                       const std::function<double(double)>& gpu = [](double) { return 0.0; },
                       const std::function<double(double)>& ram = [](double) { return 0.0; }) {
  RunLog log;
  log.config = {"Dev", "MAXN", "m", Quantization::None};
  log.iteration = 1;
  const double ts[] = {s.idle_start, s.idle_end, s.load_start, s.load_end, s.gen_start, s.gen_end};
  int i = 0;
  for (auto p : kPhases)
    for (auto b : {Boundary::Start, Boundary::End}) {
      log.events.push_back({p, b, ts[i], ts[i] + s.skew});
      ++i;
    }
  for (double t = s.idle_start + s.skew; t <= s.gen_end + s.skew + s.dt; t += s.dt)
    log.samples.push_back({t, power(t), gpu(t), ram(t)});
  log.tokens_generated = s.tokens;
  return log;
}

inline std::filesystem::path temp_dir(const std::string& tag) {
  static std::mt19937_64 rng(std::random_device{}());
  auto p = std::filesystem::temp_directory_path() / ("edgebench-" + tag + "-" + std::to_string(rng() % 1000000000));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace fixtures
