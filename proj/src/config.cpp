#include "edgebench/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>

#include "edgebench/errors.hpp"
#include "edgebench/log_io.hpp"

namespace edgebench {

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ValidationError(field + ": " + what);
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) fail(field, "expected a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(field, "cannot read '" + node.Scalar() + "'");
  }
}

template <typename T>
T optional_scalar(const YAML::Node& parent, const char* key, const std::string& field, T fallback) {
  const auto node = parent[key];
  if (!node) return fallback;
  return scalar<T>(node, field);
}

const YAML::Node required(const YAML::Node& parent, const char* key, const std::string& field) {
  const auto node = parent[key];
  if (!node) fail(field, "missing");
  return node;
}

void reject_unknown(const YAML::Node& map, std::initializer_list<std::string_view> known, const std::string& where) {
  for (const auto& kv : map) {
    const auto key = kv.first.Scalar();
    bool ok = false;
    for (auto k : known) ok = ok || k == key;
    if (!ok) fail(where.empty() ? key : where + "." + key, "unknown field");
  }
}

DeviceProfile read_device(const YAML::Node& n, const std::string& field) {
  if (!n.IsMap()) fail(field, "expected a mapping");
  reject_unknown(n, {"name", "cuda_cores", "memory_mb", "power_models"}, field);
  DeviceProfile d;
  d.name = scalar<std::string>(required(n, "name", field + ".name"), field + ".name");
  d.cuda_cores = scalar<std::int64_t>(required(n, "cuda_cores", field + ".cuda_cores"), field + ".cuda_cores");
  d.memory_mb = scalar<std::int64_t>(required(n, "memory_mb", field + ".memory_mb"), field + ".memory_mb");
  const auto pms = required(n, "power_models", field + ".power_models");
  if (!pms.IsSequence()) fail(field + ".power_models", "expected a list");
  for (std::size_t i = 0; i < pms.size(); ++i)
    d.power_models.push_back(scalar<std::string>(pms[i], field + ".power_models[" + std::to_string(i) + "]"));
  return d;
}

}  // namespace

ToolkitConfig parse_config(std::string_view yaml_text, const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    throw ValidationError("config: " + std::string(e.what()));
  }
  if (!root.IsMap()) throw ValidationError("config: top level must be a mapping");
  reject_unknown(root, {"devices", "models", "sweep", "sampler", "workload"}, "");

  ToolkitConfig cfg;
  auto& plan = cfg.plan;

  const auto devices = required(root, "devices", "devices");
  if (!devices.IsSequence()) fail("devices", "expected a list");
  for (std::size_t i = 0; i < devices.size(); ++i)
    plan.devices.push_back(read_device(devices[i], "devices[" + std::to_string(i) + "]"));

  const auto models = required(root, "models", "models");
  if (!models.IsSequence()) fail("models", "expected a list");
  for (std::size_t i = 0; i < models.size(); ++i) {
    const std::string field = "models[" + std::to_string(i) + "]";
    const auto& m = models[i];
    if (!m.IsMap()) fail(field, "expected a mapping");
    reject_unknown(m, {"id", "parameter_count"}, field);
    plan.models.push_back({scalar<std::string>(required(m, "id", field + ".id"), field + ".id"),
                           scalar<std::int64_t>(required(m, "parameter_count", field + ".parameter_count"),
                                                field + ".parameter_count")});
  }

  if (const auto sweep = root["sweep"]) {
    if (!sweep.IsMap()) fail("sweep", "expected a mapping");
    reject_unknown(sweep, {"quantizations", "iterations", "token_target", "idle_seconds", "timeout_s"}, "sweep");
    if (const auto qs = sweep["quantizations"]) {
      if (!qs.IsSequence()) fail("sweep.quantizations", "expected a list");
      plan.quantizations.clear();
      for (std::size_t i = 0; i < qs.size(); ++i) {
        const std::string field = "sweep.quantizations[" + std::to_string(i) + "]";
        const auto text = scalar<std::string>(qs[i], field);
        const auto q = parse_quantization(text);
        if (!q) fail(field, "unknown quantization '" + text + "' (expected int4 or none)");
        plan.quantizations.push_back(*q);
      }
    }
    plan.iterations = optional_scalar<int>(sweep, "iterations", "sweep.iterations", plan.iterations);
    plan.token_target = optional_scalar<int>(sweep, "token_target", "sweep.token_target", plan.token_target);
    plan.idle_seconds = optional_scalar<double>(sweep, "idle_seconds", "sweep.idle_seconds", plan.idle_seconds);
    cfg.run.timeout_s = optional_scalar<double>(sweep, "timeout_s", "sweep.timeout_s", cfg.run.timeout_s);
    if (!(cfg.run.timeout_s > 0) || !std::isfinite(cfg.run.timeout_s)) fail("sweep.timeout_s", "must be > 0");
  }
  try {
    validate_plan(plan);
  } catch (const ValidationError& e) {
    // plan-level fields live under "sweep." in the file
    const std::string what = e.what();
    const bool sweep_field = !what.starts_with("devices") && !what.starts_with("models");
    throw ValidationError(sweep_field ? "sweep." + what : what);
  }

  std::string backend = "mock";
  std::filesystem::path script;
  std::string adapter;
  if (const auto s = root["sampler"]) {
    if (!s.IsMap()) fail("sampler", "expected a mapping");
    reject_unknown(s, {"interval_s", "clock", "seed", "backend", "script", "adapter"}, "sampler");
    auto& spec = cfg.sampler.spec;
    spec.interval_s = optional_scalar<double>(s, "interval_s", "sampler.interval_s", spec.interval_s);
    const auto clock = optional_scalar<std::string>(s, "clock", "sampler.clock", "monotonic");
    if (clock == "monotonic") spec.clock = SamplerClock::Monotonic;
    else if (clock == "virtual") spec.clock = SamplerClock::Virtual;
    else fail("sampler.clock", "expected monotonic or virtual, got '" + clock + "'");
    spec.seed = optional_scalar<std::uint64_t>(s, "seed", "sampler.seed", 0);
    backend = optional_scalar<std::string>(s, "backend", "sampler.backend", backend);
    script = optional_scalar<std::string>(s, "script", "sampler.script", "");
    adapter = optional_scalar<std::string>(s, "adapter", "sampler.adapter", "");
  }
  validate_sampler_spec(cfg.sampler.spec);

  if (backend == "mock") {
    if (script.empty()) fail("sampler.script", "required for the mock backend");
    if (script.is_relative()) script = base_dir / script;
    try {
      cfg.sampler.virtual_script = MockScript::parse(read_text_file(script));
    } catch (const ValidationError& e) {
      fail("sampler.script", e.what());
    } catch (const std::exception&) {
      fail("sampler.script", "cannot read " + script.string());
    }
    if (cfg.sampler.virtual_script.empty()) fail("sampler.script", "script has no breakpoints");
    auto copy = cfg.sampler.virtual_script;
    cfg.sampler.backend = [copy] { return std::make_unique<MockBackend>(copy); };
  } else if (backend == "external") {
    if (adapter.empty()) fail("sampler.adapter", "required for the external backend");
    if (cfg.sampler.spec.clock == SamplerClock::Virtual) fail("sampler.clock", "virtual clock needs the mock backend");
    cfg.sampler.backend = [adapter] {
      return std::make_unique<ExternalBackend>(adapter, make_telemetry_adapter(adapter));
    };
  } else {
    fail("sampler.backend", "expected mock or external, got '" + backend + "'");
  }

  const auto workload = required(root, "workload", "workload");
  if (!workload.IsMap()) fail("workload", "expected a mapping");
  reject_unknown(workload, {"command"}, "workload");
  cfg.workload.command = scalar<std::string>(required(workload, "command", "workload.command"), "workload.command");
  if (cfg.workload.command.find_first_not_of(" \t") == std::string::npos) fail("workload.command", "empty");
  return cfg;
}

ToolkitConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const std::exception&) {
    throw ValidationError("config: cannot read " + path.string());
  }
  return parse_config(text, path.parent_path());
}

}  // namespace edgebench
