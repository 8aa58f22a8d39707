#pragma once

#include <filesystem>
#include <string_view>

#include "edgebench/model.hpp"
#include "edgebench/orchestrator.hpp"

namespace edgebench {

// Toolkit configuration file (YAML):
//
//   devices:
//     - {name: AGX Orin Devkit, cuda_cores: 2048, memory_mb: 32768, power_models: [MAXN, 50W, 30W, 15W]}
//   models:
//     - {id: pythia-70m-deduped, parameter_count: 70426624}
//   sweep:    {quantizations: [int4, none], iterations: 5, token_target: 512, idle_seconds: 15, timeout_s: 600}
//   sampler:  {interval_s: 0.25, clock: monotonic|virtual, seed: 1, backend: mock|external,
//              script: traces/flat.trace, adapter: <name>}
//   workload: {command: "bench_stub --model {model} --quant {quant} --tokens {tokens}"}
//
// Relative paths resolve against the directory holding the file.
struct ToolkitConfig {
  SweepPlan plan;
  SamplerSource sampler;
  WorkloadTemplate workload;
  RunOptions run;
};

// Throws ValidationError whose message starts with the offending field path,
// e.g. "sweep.iterations: must be >= 1".
ToolkitConfig parse_config(std::string_view yaml_text, const std::filesystem::path& base_dir = {});
ToolkitConfig load_config(const std::filesystem::path& path);

}  // namespace edgebench
