#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "edgebench/dataset_io.hpp"

namespace edgebench {

// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

struct CommandIO {
  std::ostream& out;
  std::ostream& err;
};

// Runs the configured sweep, writing one log file per run into out_dir.
int cmd_sweep(const std::filesystem::path& config, const std::filesystem::path& out_dir, CommandIO io);

// Aggregates every *.jsonl log in log_dir into one dataset file, plus
// "<stem>.exclusions.csv" next to it listing excluded configs and reasons.
int cmd_analyze(const std::filesystem::path& log_dir, const std::filesystem::path& out_file, FileFormat format,
                CommandIO io);

// Merges a table into out_file, creating it if needed.
int cmd_ingest(const std::filesystem::path& table, TableSchema schema, const std::filesystem::path& out_file,
               FileFormat format, CommandIO io);

struct RecommendArgs {
  std::filesystem::path dataset;
  std::optional<std::filesystem::path> query_file;  // one JSON query per line
  std::vector<std::string> constraints;             // inline "<metric><=<bound>"
  std::string objective;
  std::string direction;  // min|max
  std::optional<std::filesystem::path> csv_out;
};

int cmd_recommend(const RecommendArgs& args, CommandIO io);

// figure is one family name or "all". With "all", families whose metrics the
// dataset lacks are skipped with a note instead of failing.
int cmd_report(const std::filesystem::path& dataset, const std::string& figure, const std::filesystem::path& out_dir,
               FileFormat format, long long tokens, CommandIO io);

}  // namespace edgebench
