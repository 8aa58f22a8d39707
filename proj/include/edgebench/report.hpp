#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "edgebench/dataset.hpp"
#include "edgebench/dataset_io.hpp"

namespace edgebench {

enum class Figure { Latency, Memory, Power, Energy, TimePerToken, QuantComp };

inline constexpr Figure kAllFigures[] = {Figure::Latency, Figure::Memory,       Figure::Power,
                                         Figure::Energy,  Figure::TimePerToken, Figure::QuantComp};

// "latency", "memory", "power", "energy", "tpt", "quant_comp"
std::string_view to_string(Figure f);
std::optional<Figure> parse_figure(std::string_view id);

struct ReportOptions {
  FileFormat format = FileFormat::Csv;
  // Token count used to derive time per token from gen latency when the
  // dataset carries neither time_per_token_s nor tokens_generated.
  long long tokens = 512;
};

struct SeriesFile {
  std::string name;  // "tpt.csv", "latency.jsonl", ...
  std::string content;
};

// One series per figure family, every config in sweep order. Excluded configs
// appear with empty values and status "excluded" so surfaces keep their holes.
// Throws ValidationError on an empty dataset, MissingMetricError naming the metric.
SeriesFile render_figure(const Dataset& dataset, Figure figure, const ReportOptions& options = {});

}  // namespace edgebench
