// edgebench: sweep, analyze, ingest, recommend, report.
#include <CLI11.hpp>

#include <iostream>

#include "edgebench/commands.hpp"

using namespace edgebench;

namespace {

FileFormat format_or_die(const std::string& text) {
  auto f = parse_format(text);
  if (!f) throw CLI::ValidationError("--format", "expected csv or json-lines");
  return *f;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benchmark sweeps for edge LLM inference: run, aggregate, query, report."};
  app.require_subcommand(1);
  CommandIO io{std::cout, std::cerr};
  int rc = kExitOk;

  std::string config, out, format = "csv";

  auto* sweep = app.add_subcommand("sweep", "run every configured point and write one log per run");
  sweep->add_option("--config", config, "toolkit configuration file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", out, "directory for run logs")->required();

  std::string log_dir;
  auto* analyze = app.add_subcommand("analyze", "aggregate run logs into a dataset file");
  analyze->add_option("logs", log_dir, "directory of *.jsonl run logs")->required();
  analyze->add_option("--out", out, "dataset file to write")->required();
  analyze->add_option("--format", format, "csv|json-lines");

  std::string table, schema;
  auto* ingest = app.add_subcommand("ingest", "merge a hand-authored table into a dataset file");
  ingest->add_option("table", table, "input table")->required()->check(CLI::ExistingFile);
  ingest->add_option("--schema", schema, "load-latency|gen-latency|accuracy|power-budget|full")->required();
  ingest->add_option("--out", out, "dataset file (merged into when it exists)")->required();
  ingest->add_option("--format", format, "csv|json-lines");

  RecommendArgs rec;
  std::string query, csv;
  auto* recommend = app.add_subcommand("recommend", "best configuration under constraints");
  recommend->add_option("dataset", rec.dataset, "dataset file")->required()->check(CLI::ExistingFile);
  recommend->add_option("--query", query, "query file, one JSON object per line");
  recommend->add_option("--constraint", rec.constraints, "<metric><=<bound> or <metric>>=<bound>, repeatable");
  recommend->add_option("--objective", rec.objective, "metric to optimize");
  recommend->add_option("--direction", rec.direction, "min|max (default max)");
  recommend->add_option("--csv", csv, "also write the table as CSV");

  std::string dataset, figure;
  long long tokens = 512;
  auto* report = app.add_subcommand("report", "write plot-data series");
  report->add_option("dataset", dataset, "dataset file")->required()->check(CLI::ExistingFile);
  report->add_option("--figure", figure, "latency|memory|power|energy|tpt|quant_comp|all")->required();
  report->add_option("--out", out, "output directory")->required();
  report->add_option("--format", format, "csv|json-lines");
  report->add_option("--tokens", tokens, "tokens per run when deriving time per token");

  try {
    app.parse(argc, argv);
    if (*sweep) {
      rc = cmd_sweep(config, out, io);
    } else if (*analyze) {
      rc = cmd_analyze(log_dir, out, format_or_die(format), io);
    } else if (*ingest) {
      auto s = parse_schema(schema);
      if (!s) throw CLI::ValidationError("--schema", "expected load-latency, gen-latency, accuracy, power-budget or full");
      rc = cmd_ingest(table, *s, out, format_or_die(format), io);
    } else if (*recommend) {
      if (!query.empty()) rec.query_file = query;
      if (!csv.empty()) rec.csv_out = csv;
      rc = cmd_recommend(rec, io);
    } else if (*report) {
      rc = cmd_report(dataset, figure, out, format_or_die(format), tokens, io);
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }
  return rc;
}
