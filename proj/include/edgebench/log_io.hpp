#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "edgebench/run_log.hpp"

namespace edgebench {

// Line-delimited JSON, one record per line:
//   {"type":"meta", "device", "power_model", "model", "quantization", "iteration", "plan": {...}}
//   {"type":"event", "phase", "boundary", "t_workload"?, "t_receipt"}
//   {"type":"sample", "t", "power_w", "gpu_mem_mb", "ram_mb"}
//   {"type":"final", "tokens_generated", "status", "reason"?}
// Exactly one meta record first and one final record last.
std::string serialize_log(const RunLog& log);

// Throws ValidationError with the offending line number.
RunLog parse_log(std::string_view text);

// "<device>_<powermodel>_<model>_<quant>_iter<k>.jsonl" with every name
// component percent-encoded outside [A-Za-z0-9.-], so the mapping is injective.
std::string log_file_name(const ConfigPoint& config, int iteration);

void write_log_file(const std::filesystem::path& path, const RunLog& log);
RunLog read_log_file(const std::filesystem::path& path);

// Whole-file helpers shared by the cli commands.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace edgebench
