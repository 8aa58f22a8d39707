#include "edgebench/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <map>
#include <ostream>
#include <sstream>

#include "edgebench/analysis.hpp"
#include "edgebench/config.hpp"
#include "edgebench/errors.hpp"
#include "edgebench/log_io.hpp"
#include "edgebench/recommender.hpp"
#include "edgebench/report.hpp"

namespace fs = std::filesystem;

namespace edgebench {

namespace {

// Maps the exception taxonomy onto exit codes. Everything not caused by the
// caller's input is a runtime failure.
template <typename F>
int guarded(CommandIO io, const char* what, F&& body) {
  try {
    return body();
  } catch (const ValidationError& e) {
    io.err << what << ": " << e.what() << "\n";
    return kExitValidation;
  } catch (const MissingMetricError& e) {
    io.err << what << ": " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    io.err << what << ": " << e.what() << "\n";
    return kExitRuntime;
  }
}

// Creates the directory if needed and proves we can create files in it.
bool writable_dir(const fs::path& dir, std::string& why) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    why = ec.message();
    return false;
  }
  const auto probe = dir / ".edgebench-write-probe";
  {
    std::ofstream f(probe);
    if (!f) {
      why = "cannot create files in " + dir.string();
      return false;
    }
  }
  fs::remove(probe, ec);
  return true;
}

std::string seconds(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

int cmd_sweep(const fs::path& config_path, const fs::path& out_dir, CommandIO io) {
  return guarded(io, "sweep", [&] {
    const auto cfg = load_config(config_path);
    std::string why;
    if (!writable_dir(out_dir, why)) {
      io.err << "sweep: output directory not writable: " << why << "\n";
      return kExitRuntime;
    }
    const auto points = enumerate_sweep(cfg.plan);
    const std::size_t total = points.size() * static_cast<std::size_t>(cfg.plan.iterations);
    std::size_t done = 0, failed = 0;

    SweepObserver obs;
    obs.on_log = [&](const RunLog& log) {
      write_log_file(out_dir / log_file_name(log.config, log.iteration), log);
      ++done;
      io.out << "[" << done << "/" << total << "] " << describe(log.config) << " iter " << log.iteration << ": ";
      if (log.status.completed) {
        io.out << "completed load=" << seconds(phase_latency(log, Phase::ModelLoad))
               << "s gen=" << seconds(phase_latency(log, Phase::Generate)) << "s tokens=" << log.tokens_generated
               << " samples=" << log.samples.size() << "\n";
      } else {
        ++failed;
        io.out << "failed (" << log.status.reason << ")\n";
      }
      io.out.flush();
    };
    RunOptions opts = cfg.run;
    opts.chatter = [&](std::string_view line) { io.err << "  | " << line << "\n"; };
    try {
      run_points(points, cfg.plan, cfg.workload, cfg.sampler, opts, obs);
    } catch (const SamplerFailure& e) {
      io.err << "sweep: aborted, telemetry failed: " << e.what() << "\n";
      return kExitRuntime;
    }
    io.out << "sweep: " << done << " runs, " << failed << " failed, logs in " << out_dir.string() << "\n";
    return kExitOk;
  });
}

int cmd_analyze(const fs::path& log_dir, const fs::path& out_file, FileFormat format, CommandIO io) {
  return guarded(io, "analyze", [&] {
    if (!fs::is_directory(log_dir)) throw ValidationError("not a directory: " + log_dir.string());
    std::vector<fs::path> files;
    for (const auto& de : fs::directory_iterator(log_dir))
      if (de.is_regular_file() && de.path().extension() == ".jsonl") files.push_back(de.path());
    std::sort(files.begin(), files.end());

    std::vector<RunLog> logs;
    std::size_t skipped = 0;
    for (const auto& f : files) {
      try {
        logs.push_back(read_log_file(f));
      } catch (const std::exception& e) {
        ++skipped;
        io.err << "analyze: warning: skipping " << f.filename().string() << ": " << e.what() << "\n";
      }
    }
    if (skipped) io.err << "analyze: skipped " << skipped << " unparseable log(s)\n";
    if (logs.empty()) throw ValidationError("no parseable logs in " + log_dir.string());

    // Sweep order comes from the plan echoed into the logs.
    SweepOrder order(logs.front().plan);
    std::map<ConfigPoint, std::vector<RunLog>> groups;
    for (auto& log : logs) {
      order.observe(log.config);
      groups[log.config].push_back(std::move(log));
    }

    Dataset ds(order);
    for (auto& [config, runs] : groups) {
      std::sort(runs.begin(), runs.end(), [](const RunLog& a, const RunLog& b) { return a.iteration < b.iteration; });
      AggregateResult r;
      try {
        r = aggregate(runs);
      } catch (const std::exception& e) {
        r = Exclusion{config, std::string("analysis failed: ") + e.what()};
      }
      if (auto* m = std::get_if<ConfigMetrics>(&r)) ds.add(std::move(*m));
      else ds.exclude(std::get<Exclusion>(std::move(r)));
    }

    if (out_file.has_parent_path()) fs::create_directories(out_file.parent_path());
    save_dataset(out_file, ds, format);

    std::ostringstream side;
    side << "device,power_model,model,quantization,reason\n";
    for (const auto& x : ds.excluded())
      side << csv_escape(x.config.device) << "," << csv_escape(x.config.power_model) << ","
           << csv_escape(x.config.model) << "," << to_string(x.config.quantization) << "," << csv_escape(x.reason)
           << "\n";
    auto sidecar = out_file;
    sidecar.replace_extension(".exclusions.csv");
    write_text_file(sidecar, side.str());

    io.out << "analyze: " << logs.size() << " logs, " << ds.entries().size() << " entries, " << ds.excluded().size()
           << " excluded -> " << out_file.string() << "\n";
    return kExitOk;
  });
}

int cmd_ingest(const fs::path& table, TableSchema schema, const fs::path& out_file, FileFormat format,
               CommandIO io) {
  return guarded(io, "ingest", [&] {
    Dataset ds;
    if (fs::exists(out_file)) ds = load_dataset(out_file);
    const auto text = [&] {
      try {
        return read_text_file(table);
      } catch (const std::exception& e) {
        throw ValidationError(e.what());
      }
    }();
    ingest_table(ds, text, schema);
    if (out_file.has_parent_path()) fs::create_directories(out_file.parent_path());
    save_dataset(out_file, ds, format);
    io.out << "ingest: " << ds.entries().size() << " entries, " << ds.excluded().size() << " excluded, "
           << ds.accuracy_table().size() << " accuracy rows, " << ds.power_budget_table().size()
           << " power budget rows -> " << out_file.string() << "\n";
    return kExitOk;
  });
}

namespace {

Direction parse_direction(const std::string& text) {
  if (text == "min" || text == "minimize") return Direction::Minimize;
  if (text == "max" || text == "maximize") return Direction::Maximize;
  throw ValidationError("direction '" + text + "': expected min or max");
}

MetricId parse_objective(const std::string& text) {
  auto m = parse_metric(text);
  if (!m) throw ValidationError("unknown metric '" + text + "'; allowed: " + allowed_metric_names());
  return *m;
}

// {"constraints": ["peak_power_gen<=45", "total_latency<=40"], "objective": "accuracy", "direction": "max"}
std::vector<Query> read_queries(const fs::path& path) {
  std::vector<Query> out;
  std::istringstream in(read_text_file(path));
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line.starts_with("#")) continue;
    const std::string where = path.filename().string() + " line " + std::to_string(lineno) + ": ";
    try {
      const auto j = nlohmann::json::parse(line);
      Query q;
      for (const auto& c : j.value("constraints", nlohmann::json::array())) q.constraints.push_back(parse_constraint(c.get<std::string>()));
      q.objective = parse_objective(j.at("objective").get<std::string>());
      q.direction = parse_direction(j.value("direction", std::string("max")));
      out.push_back(std::move(q));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(where + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(where + e.what());
    }
  }
  if (out.empty()) throw ValidationError(path.string() + ": no queries");
  return out;
}

}  // namespace

int cmd_recommend(const RecommendArgs& args, CommandIO io) {
  return guarded(io, "recommend", [&] {
    std::vector<Query> queries;
    if (args.query_file) {
      if (!args.constraints.empty() || !args.objective.empty())
        throw ValidationError("--query cannot be combined with --constraint/--objective");
      queries = read_queries(*args.query_file);
    } else {
      if (args.objective.empty()) throw ValidationError("--objective or --query is required");
      Query q;
      for (const auto& c : args.constraints) q.constraints.push_back(parse_constraint(c));
      q.objective = parse_objective(args.objective);
      q.direction = parse_direction(args.direction.empty() ? "max" : args.direction);
      queries.push_back(std::move(q));
    }
    const auto ds = load_dataset(args.dataset);
    const auto rows = use_case_report(ds, queries);
    io.out << render_use_case_table(rows);
    if (args.csv_out) write_text_file(*args.csv_out, render_use_case_csv(rows));
    return kExitOk;
  });
}

int cmd_report(const fs::path& dataset, const std::string& figure, const fs::path& out_dir, FileFormat format,
               long long tokens, CommandIO io) {
  return guarded(io, "report", [&] {
    std::vector<Figure> figures;
    if (figure == "all") {
      figures.assign(std::begin(kAllFigures), std::end(kAllFigures));
    } else {
      auto f = parse_figure(figure);
      if (!f) throw ValidationError("unknown figure '" + figure + "'; allowed: latency, memory, power, energy, tpt, quant_comp, all");
      figures.push_back(*f);
    }
    const auto ds = load_dataset(dataset);
    fs::create_directories(out_dir);
    ReportOptions opts{format, tokens};
    for (auto f : figures) {
      SeriesFile s;
      try {
        s = render_figure(ds, f, opts);
      } catch (const MissingMetricError& e) {
        if (figures.size() == 1) throw;
        io.err << "report: skipping " << to_string(f) << ": " << e.what() << "\n";
        continue;
      }
      write_text_file(out_dir / s.name, s.content);
      io.out << "report: wrote " << (out_dir / s.name).string() << "\n";
    }
    return kExitOk;
  });
}

}  // namespace edgebench
