#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "edgebench/dataset.hpp"

namespace edgebench {

enum class FileFormat { Csv, JsonLines };
std::optional<FileFormat> parse_format(std::string_view text);

// Flat table with one row per (ConfigPoint, metric) under a '#' manifest:
//
//   # edgebench dataset v1
//   # units: seconds, watts, joules, megabytes, percent
//   # order: {"devices":[...],"power_models":[[...]],"models":[...]}
//   device,power_model,model,quantization,metric,value
//   AGX Orin Devkit,MAXN,pythia-70m-deduped,int4,load_latency_s,2.28
//   *,*,pythia-70m-deduped,int4,accuracy_pct,35.9
//   AGX Orin Devkit,50W,*,*,power_budget_w,50
//   Orin Nano 4GB,10W,pythia-1b-deduped,none,excluded,no data in source table
//
// The json-lines variant carries the same rows as objects after a manifest object.
std::string write_dataset(const Dataset& dataset, FileFormat format = FileFormat::Csv);

// Accepts either format. Throws ValidationError naming the row.
Dataset read_dataset(std::string_view text, SweepOrder order = {});

Dataset load_dataset(const std::filesystem::path& path, SweepOrder order = {});
void save_dataset(const std::filesystem::path& path, const Dataset& dataset, FileFormat format = FileFormat::Csv);

enum class TableSchema { LoadLatency, GenLatency, Accuracy, PowerBudget, Full };
// load-latency|gen-latency|accuracy|power-budget|full
std::optional<TableSchema> parse_schema(std::string_view text);

// Merges a table into `into`. Latency tables: "device,power_model,model,quantization,<seconds or ->".
// Accuracy table: "model,quantization,<percent>". Power budget table: "device,power_model,<watts>".
// A "-" cell in a latency table excludes its key.
// Throws ValidationError with the row number for malformed rows or conflicting values.
void ingest_table(Dataset& into, std::string_view text, TableSchema schema);

// Field-wise merge; conflicting values throw ValidationError.
void merge_into(Dataset& into, const Dataset& from);

// Minimal RFC 4180 helpers.
std::vector<std::string> split_csv_line(std::string_view line);
std::string csv_escape(std::string_view field);

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace edgebench
