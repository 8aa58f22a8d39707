#include "edgebench/model.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "edgebench/errors.hpp"

namespace edgebench {

std::string_view to_string(Quantization q) {
  return q == Quantization::Int4 ? "int4" : "none";
}

std::optional<Quantization> parse_quantization(std::string_view text) {
  if (text == "int4" || text == "4bit" || text == "4-bit") return Quantization::Int4;
  if (text == "none" || text == "no-quant" || text == "fp16") return Quantization::None;
  return std::nullopt;
}

std::string describe(const ConfigPoint& point) {
  std::ostringstream os;
  os << point.device << ", " << point.power_model << " NV power model, " << point.model << ", "
     << (point.quantization == Quantization::Int4 ? "4-bit quantization" : "no quantization");
  return os.str();
}

void validate_plan(const SweepPlan& plan) {
  if (plan.devices.empty()) throw ValidationError("devices: at least one device is required");
  if (plan.models.empty()) throw ValidationError("models: at least one model is required");
  if (plan.quantizations.empty())
    throw ValidationError("quantizations: at least one quantization is required");
  if (plan.iterations < 1) throw ValidationError("iterations: must be >= 1");
  if (plan.token_target < 1) throw ValidationError("token_target: must be >= 1");
  if (!(plan.idle_seconds >= 0.0)) throw ValidationError("idle_seconds: must be >= 0");

  std::set<std::string> names;
  for (std::size_t i = 0; i < plan.devices.size(); ++i) {
    const auto& d = plan.devices[i];
    const std::string where = "devices[" + std::to_string(i) + "]";
    if (d.name.empty()) throw ValidationError(where + ".name: must be non-empty");
    if (!names.insert(d.name).second)
      throw ValidationError(where + ".name: duplicate device '" + d.name + "'");
    if (d.cuda_cores <= 0) throw ValidationError(where + ".cuda_cores: must be > 0");
    if (d.memory_mb <= 0) throw ValidationError(where + ".memory_mb: must be > 0");
    if (d.power_models.empty()) throw ValidationError(where + ".power_models: must be non-empty");
    std::set<std::string> pms(d.power_models.begin(), d.power_models.end());
    if (pms.size() != d.power_models.size())
      throw ValidationError(where + ".power_models: duplicate power model");
  }

  std::set<std::string> ids;
  for (std::size_t i = 0; i < plan.models.size(); ++i) {
    const auto& m = plan.models[i];
    const std::string where = "models[" + std::to_string(i) + "]";
    if (m.id.empty()) throw ValidationError(where + ".id: must be non-empty");
    if (!ids.insert(m.id).second) throw ValidationError(where + ".id: duplicate model '" + m.id + "'");
    if (m.parameter_count <= 0) throw ValidationError(where + ".parameter_count: must be > 0");
  }

  std::set<Quantization> qs(plan.quantizations.begin(), plan.quantizations.end());
  if (qs.size() != plan.quantizations.size())
    throw ValidationError("quantizations: duplicate entry");
}

namespace {

std::vector<ModelSpec> models_by_size(const SweepPlan& plan) {
  auto models = plan.models;
  std::stable_sort(models.begin(), models.end(), [](const ModelSpec& a, const ModelSpec& b) {
    return a.parameter_count < b.parameter_count;
  });
  return models;
}

std::vector<Quantization> quantizations_in_order(const SweepPlan& plan) {
  auto qs = plan.quantizations;
  std::sort(qs.begin(), qs.end());
  return qs;
}

}  // namespace

std::vector<ConfigPoint> enumerate_sweep(const SweepPlan& plan) {
  validate_plan(plan);
  const auto models = models_by_size(plan);
  const auto quants = quantizations_in_order(plan);

  std::vector<ConfigPoint> points;
  for (const auto& device : plan.devices)
    for (const auto& pm : device.power_models)
      for (const auto& model : models)
        for (auto q : quants) points.push_back({device.name, pm, model.id, q});
  return points;
}

std::optional<std::string> validate_config(const ConfigPoint& point, const SweepPlan& plan) {
  auto device = std::find_if(plan.devices.begin(), plan.devices.end(),
                             [&](const DeviceProfile& d) { return d.name == point.device; });
  if (device == plan.devices.end()) return "unknown device '" + point.device + "'";
  if (std::find(device->power_models.begin(), device->power_models.end(), point.power_model) ==
      device->power_models.end())
    return "power model '" + point.power_model + "' is not offered by device '" + point.device + "'";
  if (std::none_of(plan.models.begin(), plan.models.end(),
                   [&](const ModelSpec& m) { return m.id == point.model; }))
    return "unknown model '" + point.model + "'";
  if (std::find(plan.quantizations.begin(), plan.quantizations.end(), point.quantization) ==
      plan.quantizations.end())
    return "quantization '" + std::string(to_string(point.quantization)) + "' is not part of the plan";
  return std::nullopt;
}

SweepOrder::SweepOrder(const SweepPlan& plan) {
  for (const auto& d : plan.devices) {
    devices_.push_back(d.name);
    power_models_.push_back(d.power_models);
  }
  for (const auto& m : models_by_size(plan)) models_.push_back(m.id);
}

SweepOrder::SweepOrder(std::vector<std::string> devices, std::vector<std::vector<std::string>> power_models,
                       std::vector<std::string> models)
    : devices_(std::move(devices)), power_models_(std::move(power_models)), models_(std::move(models)) {
  if (power_models_.size() != devices_.size())
    throw ValidationError("sweep order: one power model list per device expected");
}

void SweepOrder::observe(const ConfigPoint& p) {
  auto d = std::find(devices_.begin(), devices_.end(), p.device);
  std::size_t di = static_cast<std::size_t>(d - devices_.begin());
  if (d == devices_.end()) {
    devices_.push_back(p.device);
    power_models_.emplace_back();
  }
  auto& pms = power_models_[di];
  if (std::find(pms.begin(), pms.end(), p.power_model) == pms.end()) pms.push_back(p.power_model);
  if (std::find(models_.begin(), models_.end(), p.model) == models_.end()) models_.push_back(p.model);
}

SweepOrder::Key SweepOrder::key(const ConfigPoint& p) const {
  constexpr auto npos = static_cast<std::size_t>(-1);
  auto index_of = [](const std::vector<std::string>& v, const std::string& s) {
    auto it = std::find(v.begin(), v.end(), s);
    return it == v.end() ? npos : static_cast<std::size_t>(it - v.begin());
  };
  const std::size_t di = index_of(devices_, p.device);
  const std::size_t pi = di == npos ? npos : index_of(power_models_[di], p.power_model);
  return {di, pi, index_of(models_, p.model), static_cast<int>(p.quantization)};
}

bool SweepOrder::less(const ConfigPoint& a, const ConfigPoint& b) const {
  const Key ka = key(a), kb = key(b);
  if (ka != kb) return ka < kb;
  return a < b;  // unknown names tie on rank; fall back to lexicographic
}

}  // namespace edgebench
