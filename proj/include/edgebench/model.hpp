#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace edgebench {

struct DeviceProfile {
  std::string name;
  std::int64_t cuda_cores = 0;
  std::int64_t memory_mb = 0;
  std::vector<std::string> power_models;  // ordered, first is the highest-budget preset

  friend bool operator==(const DeviceProfile&, const DeviceProfile&) = default;
};

// Int4 sorts before None, matching sweep order.
enum class Quantization { Int4, None };

std::string_view to_string(Quantization q);
std::optional<Quantization> parse_quantization(std::string_view text);

struct ModelSpec {
  std::string id;
  std::int64_t parameter_count = 0;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

// The (device, power model, model, quantization) tuple identifying one cell of the sweep.
struct ConfigPoint {
  std::string device;
  std::string power_model;
  std::string model;
  Quantization quantization = Quantization::None;

  friend bool operator==(const ConfigPoint&, const ConfigPoint&) = default;
  friend auto operator<=>(const ConfigPoint&, const ConfigPoint&) = default;
};

// Human-readable label, e.g. "AGX Orin Devkit, 50W NV power model, pythia-1.4b-deduped, no quantization".
std::string describe(const ConfigPoint& point);

struct SweepPlan {
  std::vector<DeviceProfile> devices;
  std::vector<ModelSpec> models;
  std::vector<Quantization> quantizations{Quantization::Int4, Quantization::None};
  int iterations = 5;
  int token_target = 512;
  double idle_seconds = 15.0;

  friend bool operator==(const SweepPlan&, const SweepPlan&) = default;
};

// Throws ValidationError naming the first violated invariant.
void validate_plan(const SweepPlan& plan);

// Every (device, power model, model, quantization) combination in sweep order:
// plan device order, profile power-model order, ascending parameter count, Int4 before None.
std::vector<ConfigPoint> enumerate_sweep(const SweepPlan& plan);

// std::nullopt when the point belongs to the plan's sweep, otherwise a description of the violation.
std::optional<std::string> validate_config(const ConfigPoint& point, const SweepPlan& plan);

// Rank of a point within the sweep order of a plan; used to order datasets.
class SweepOrder {
 public:
  SweepOrder() = default;
  explicit SweepOrder(const SweepPlan& plan);
  SweepOrder(std::vector<std::string> devices, std::vector<std::vector<std::string>> power_models,
             std::vector<std::string> models);

  // Registers names in first-appearance order. No-op for names already known.
  void observe(const ConfigPoint& point);

  // Strict weak ordering consistent with enumerate_sweep for observed or planned points.
  bool less(const ConfigPoint& a, const ConfigPoint& b) const;

  bool empty() const { return devices_.empty() && models_.empty(); }
  const std::vector<std::string>& devices() const { return devices_; }
  const std::vector<std::vector<std::string>>& power_models() const { return power_models_; }
  const std::vector<std::string>& models() const { return models_; }

 private:
  struct Key {
    std::size_t device, power_model, model;
    int quant;
    auto operator<=>(const Key&) const = default;
  };
  Key key(const ConfigPoint& p) const;

  std::vector<std::string> devices_;
  std::vector<std::vector<std::string>> power_models_;
  std::vector<std::string> models_;
};

}  // namespace edgebench
