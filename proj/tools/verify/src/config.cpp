#include "verify/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "orthonet/errors.hpp"
#include "orthonet/trainers.hpp"

namespace verify {

using orthonet::InvalidInput;
using nlohmann::json;

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kEquivalence:
      return "equivalence";
    case ExperimentKind::kDepth:
      return "depth";
    case ExperimentKind::kFlow:
      return "flow";
    case ExperimentKind::kConvergence:
      return "convergence";
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(std::string_view name) {
  if (name == "equivalence") return ExperimentKind::kEquivalence;
  if (name == "depth" || name == "depth-independence") return ExperimentKind::kDepth;
  if (name == "flow") return ExperimentKind::kFlow;
  if (name == "convergence") return ExperimentKind::kConvergence;
  throw InvalidInput("unknown experiment '" + std::string(name) + "'");
}

std::string_view to_string(DepthConstruction c) {
  return c == DepthConstruction::kIdentityPadding ? "pad" : "split";
}

DepthConstruction parse_depth_construction(std::string_view name) {
  if (name == "pad" || name == "identity") return DepthConstruction::kIdentityPadding;
  if (name == "split") return DepthConstruction::kSplit;
  throw InvalidInput("unknown depth construction '" + std::string(name) + "'");
}

double ExperimentConfig::step_size() const {
  return eta ? *eta : orthonet::default_step_size(loss.kind);
}

void ExperimentConfig::validate() const {
  if (dims.empty()) throw InvalidInput("config: grid needs at least one p");
  for (long p : dims) {
    if (p < 1) throw InvalidInput("config: p must be positive");
  }
  if (depths.empty()) throw InvalidInput("config: grid needs at least one depth");
  for (std::size_t d : depths) {
    if (d < 1) throw InvalidInput("config: depth must be at least 1");
  }
  if (kind == ExperimentKind::kDepth && depths.size() < 2) {
    throw InvalidInput("config: depth experiment needs two depths, e.g. --depth 2,5");
  }
  const double step = step_size();
  if (!(step > 0.0) || !std::isfinite(step)) throw InvalidInput("config: eta must be positive");
  if (!(threshold > 0.0)) throw InvalidInput("config: threshold must be positive");
  if (record_stride < 1) throw InvalidInput("config: record stride must be positive");
  if (control_dim < 1 || control_depth < 1) throw InvalidInput("config: bad control cell");
  if (kind == ExperimentKind::kFlow) {
    if (flow_etas.size() < 2) throw InvalidInput("config: flow needs at least two step sizes");
    for (std::size_t i = 0; i < flow_etas.size(); ++i) {
      const double e = flow_etas[i];
      if (!(e > 0.0)) throw InvalidInput("config: flow step sizes must be positive");
      if (i > 0 && !(e < flow_etas[i - 1])) {
        throw InvalidInput("config: flow step sizes must decrease");
      }
      const double k = flow_t_end / e;
      if (std::abs(k - std::round(k)) > 1e-9 * std::max(1.0, k)) {
        throw InvalidInput("config: t_end must be a multiple of every flow step size");
      }
    }
    if (!(flow_t_end >= 0.0)) throw InvalidInput("config: t_end must be non-negative");
    if (!(flow_dt > 0.0)) throw InvalidInput("config: dt must be positive");
    if (!(ratio_low < ratio_high)) throw InvalidInput("config: empty ratio window");
  }
}

ExperimentConfig default_config(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  switch (kind) {
    case ExperimentKind::kEquivalence:
      break;
    case ExperimentKind::kDepth:
      c.dims = {8};
      c.depths = {2, 5};
      break;
    case ExperimentKind::kFlow:
      c.dims = {4};
      c.depths = {1};
      break;
    case ExperimentKind::kConvergence:
      c.dims = {4};
      c.depths = {1};
      c.threshold = 1e-6;
      break;
  }
  return c;
}

ExperimentConfig paper_preset(ExperimentKind kind) {
  ExperimentConfig c = default_config(kind);
  c.eta = 0.1;
  c.controls = true;
  switch (kind) {
    case ExperimentKind::kEquivalence:
      c.dims = {2, 4, 16, 64};
      c.depths = {1, 2, 3, 8};
      c.steps = 200;
      break;
    case ExperimentKind::kDepth:
      c.dims = {8};
      c.depths = {2, 5};
      c.steps = 200;
      break;
    case ExperimentKind::kFlow:
      c.dims = {4};
      c.flow_etas = {0.1, 0.05, 0.025};
      break;
    case ExperimentKind::kConvergence:
      c.dims = {3, 8};
      c.loss.kind = orthonet::LossKind::kTrace;
      c.steps = 3000;
      break;
  }
  return c;
}

namespace {

template <typename T>
std::vector<T> as_list(const json& value) {
  if (value.is_array()) return value.get<std::vector<T>>();
  return {value.get<T>()};
}

void merge_loss(ExperimentConfig& config, const json& spec) {
  static const std::set<std::string> kKeys = {"kind",   "seed",    "target", "inputs",
                                              "outputs", "samples", "noise"};
  if (spec.is_string()) {
    config.loss.kind = orthonet::parse_loss_kind(spec.get<std::string>());
    return;
  }
  for (const auto& [key, value] : spec.items()) {
    if (!kKeys.contains(key)) throw InvalidInput("config: unknown loss key '" + key + "'");
  }
  if (spec.contains("kind")) config.loss.kind = orthonet::parse_loss_kind(spec["kind"].get<std::string>());
  if (spec.contains("seed")) config.loss_seed = spec["seed"].get<std::uint64_t>();
  if (spec.contains("target")) config.loss.target_file = spec["target"].get<std::string>();
  if (spec.contains("inputs")) config.loss.inputs_file = spec["inputs"].get<std::string>();
  if (spec.contains("outputs")) config.loss.outputs_file = spec["outputs"].get<std::string>();
  if (spec.contains("samples")) config.loss.samples = spec["samples"].get<long>();
  if (spec.contains("noise")) config.loss.noise = spec["noise"].get<double>();
}

}  // namespace

void merge_config_json(ExperimentConfig& config, std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
  if (!doc.is_object()) throw InvalidInput("config: top level must be an object");

  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "experiment") {
        if (parse_experiment_kind(value.get<std::string>()) != config.kind) {
          throw InvalidInput("config: file is for experiment '" + value.get<std::string>() + "'");
        }
      } else if (key == "p") {
        config.dims = as_list<long>(value);
      } else if (key == "depth") {
        config.depths = as_list<std::size_t>(value);
      } else if (key == "eta") {
        config.eta = value.get<double>();
      } else if (key == "steps") {
        config.steps = value.get<std::size_t>();
      } else if (key == "loss") {
        merge_loss(config, value);
      } else if (key == "retraction") {
        config.retraction = orthonet::parse_retraction(value.get<std::string>());
      } else if (key == "seed") {
        config.seed = value.get<std::uint64_t>();
      } else if (key == "threshold") {
        config.threshold = value.get<double>();
      } else if (key == "record_stride") {
        config.record_stride = value.get<std::size_t>();
      } else if (key == "controls") {
        config.controls = value.get<bool>();
      } else if (key == "construction") {
        config.construction = parse_depth_construction(value.get<std::string>());
      } else if (key == "flow") {
        if (value.contains("etas")) config.flow_etas = as_list<double>(value["etas"]);
        if (value.contains("t_end")) config.flow_t_end = value["t_end"].get<double>();
        if (value.contains("dt")) config.flow_dt = value["dt"].get<double>();
      } else if (key == "out") {
        config.out_dir = value.get<std::string>();
      } else if (key == "checkpoints") {
        config.checkpoints = value.get<bool>();
      } else {
        throw InvalidInput("config: unknown key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
}

void merge_config_file(ExperimentConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  merge_config_json(config, text.str());
}

}  // namespace verify
