#include "edgebench/log_io.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "edgebench/errors.hpp"

namespace edgebench {

using nlohmann::json;

namespace {

json plan_to_json(const SweepPlan& plan) {
  json devices = json::array();
  for (const auto& d : plan.devices)
    devices.push_back({{"name", d.name},
                       {"cuda_cores", d.cuda_cores},
                       {"memory_mb", d.memory_mb},
                       {"power_models", d.power_models}});
  json models = json::array();
  for (const auto& m : plan.models) models.push_back({{"id", m.id}, {"parameter_count", m.parameter_count}});
  json quants = json::array();
  for (auto q : plan.quantizations) quants.push_back(std::string(to_string(q)));
  return {{"devices", devices},
          {"models", models},
          {"quantizations", quants},
          {"iterations", plan.iterations},
          {"token_target", plan.token_target},
          {"idle_seconds", plan.idle_seconds}};
}

Quantization quant_from(const json& j) {
  auto q = parse_quantization(j.get<std::string>());
  if (!q) throw ValidationError("unknown quantization '" + j.get<std::string>() + "'");
  return *q;
}

SweepPlan plan_from_json(const json& j) {
  SweepPlan plan;
  plan.devices.clear();
  for (const auto& d : j.at("devices"))
    plan.devices.push_back({d.at("name").get<std::string>(), d.at("cuda_cores").get<std::int64_t>(),
                            d.at("memory_mb").get<std::int64_t>(),
                            d.at("power_models").get<std::vector<std::string>>()});
  for (const auto& m : j.at("models"))
    plan.models.push_back({m.at("id").get<std::string>(), m.at("parameter_count").get<std::int64_t>()});
  plan.quantizations.clear();
  for (const auto& q : j.at("quantizations")) plan.quantizations.push_back(quant_from(q));
  plan.iterations = j.at("iterations").get<int>();
  plan.token_target = j.at("token_target").get<int>();
  plan.idle_seconds = j.at("idle_seconds").get<double>();
  return plan;
}

}  // namespace

std::string serialize_log(const RunLog& log) {
  std::string out;
  auto emit = [&out](const json& j) {
    out += j.dump();
    out += '\n';
  };
  emit({{"type", "meta"},
        {"device", log.config.device},
        {"power_model", log.config.power_model},
        {"model", log.config.model},
        {"quantization", to_string(log.config.quantization)},
        {"iteration", log.iteration},
        {"plan", plan_to_json(log.plan)}});
  for (const auto& e : log.events) {
    json j{{"type", "event"}, {"phase", to_string(e.phase)}, {"boundary", to_string(e.boundary)}};
    if (e.t_workload) j["t_workload"] = *e.t_workload;
    j["t_receipt"] = e.t_receipt;
    emit(j);
  }
  for (const auto& s : log.samples)
    emit({{"type", "sample"}, {"t", s.t}, {"power_w", s.power_w}, {"gpu_mem_mb", s.gpu_mem_mb}, {"ram_mb", s.ram_mb}});
  json fin{{"type", "final"},
           {"tokens_generated", log.tokens_generated},
           {"status", log.status.completed ? "completed" : "failed"}};
  if (!log.status.completed) fin["reason"] = log.status.reason;
  emit(fin);
  return out;
}

RunLog parse_log(std::string_view text) {
  RunLog log;
  bool have_meta = false, have_final = false;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = "log line " + std::to_string(lineno) + ": ";
    if (have_final) throw ValidationError(where + "record after the final record");
    try {
      const json j = json::parse(line);
      const auto type = j.at("type").get<std::string>();
      if (type == "meta") {
        if (have_meta) throw ValidationError(where + "second meta record");
        log.config.device = j.at("device").get<std::string>();
        log.config.power_model = j.at("power_model").get<std::string>();
        log.config.model = j.at("model").get<std::string>();
        log.config.quantization = quant_from(j.at("quantization"));
        log.iteration = j.at("iteration").get<int>();
        log.plan = plan_from_json(j.at("plan"));
        have_meta = true;
        continue;
      }
      if (!have_meta) throw ValidationError(where + "first record must be meta");
      if (type == "event") {
        PhaseEvent e;
        auto phase = parse_phase(j.at("phase").get<std::string>());
        auto boundary = parse_boundary(j.at("boundary").get<std::string>());
        if (!phase || !boundary) throw ValidationError(where + "unknown phase or boundary");
        e.phase = *phase;
        e.boundary = *boundary;
        if (j.contains("t_workload")) e.t_workload = j.at("t_workload").get<double>();
        e.t_receipt = j.at("t_receipt").get<double>();
        log.events.push_back(e);
      } else if (type == "sample") {
        log.samples.push_back({j.at("t").get<double>(), j.at("power_w").get<double>(),
                               j.at("gpu_mem_mb").get<double>(), j.at("ram_mb").get<double>()});
      } else if (type == "final") {
        log.tokens_generated = j.at("tokens_generated").get<long long>();
        const auto status = j.at("status").get<std::string>();
        if (status == "completed") log.status = RunStatus::ok();
        else if (status == "failed") log.status = RunStatus::failed(j.value("reason", std::string("unknown")));
        else throw ValidationError(where + "unknown status '" + status + "'");
        have_final = true;
      } else {
        throw ValidationError(where + "unknown record type '" + type + "'");
      }
    } catch (const json::exception& e) {
      throw ValidationError(where + e.what());
    }
  }
  if (!have_meta) throw ValidationError("log has no meta record");
  if (!have_final) throw ValidationError("log has no final record (truncated run?)");
  return log;
}

std::string log_file_name(const ConfigPoint& c, int iteration) {
  auto enc = [](const std::string& s) {
    std::string out;
    for (unsigned char ch : s) {
      if ((ch >= 'A' && ch <= 'Z') || (ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9') || ch == '.' || ch == '-') {
        out += static_cast<char>(ch);
      } else {
        char buf[4];
        std::snprintf(buf, sizeof buf, "%%%02X", ch);
        out += buf;
      }
    }
    return out;
  };
  return enc(c.device) + "_" + enc(c.power_model) + "_" + enc(c.model) + "_" + std::string(to_string(c.quantization)) +
         "_iter" + std::to_string(iteration) + ".jsonl";
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_log_file(const std::filesystem::path& path, const RunLog& log) { write_text_file(path, serialize_log(log)); }

RunLog read_log_file(const std::filesystem::path& path) { return parse_log(read_text_file(path)); }

}  // namespace edgebench
