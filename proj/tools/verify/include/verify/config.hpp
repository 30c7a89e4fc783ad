#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "orthonet/losses.hpp"
#include "orthonet/manifold.hpp"

namespace verify {

enum class ExperimentKind { kEquivalence, kDepth, kFlow, kConvergence };

std::string_view to_string(ExperimentKind kind);
ExperimentKind parse_experiment_kind(std::string_view name);

/// How depth-independence runs build a deeper network with the same product.
enum class DepthConstruction {
  kIdentityPadding,  // insert identity layers after layer 1 (exact)
  kSplit             // insert Haar layers V_1..V_k with V_k ... V_1 = I
};

std::string_view to_string(DepthConstruction c);
DepthConstruction parse_depth_construction(std::string_view name);

/// Everything an experiment needs. Grid cells are the Cartesian product of
/// `dims` with `depths` (equivalence) or one cell per dim (other kinds).
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kEquivalence;
  std::vector<long> dims{4};
  std::vector<std::size_t> depths{1, 2, 3};
  std::optional<double> eta;  // unset: per-loss default
  std::size_t steps = 200;
  orthonet::LossSpec loss;
  std::optional<std::uint64_t> loss_seed;  // unset: derived from each cell's stream
  orthonet::Retraction retraction = orthonet::Retraction::kExponential;
  std::uint64_t seed = 0;
  double threshold = 1e-8;
  std::size_t record_stride = 1;

  // Equivalence / depth negative controls; on in the named preset.
  bool controls = false;
  long control_dim = 8;
  std::size_t control_depth = 4;
  DepthConstruction construction = DepthConstruction::kIdentityPadding;

  // Flow comparison.
  std::vector<double> flow_etas{0.1, 0.05, 0.025};
  double flow_t_end = 2.0;
  double flow_dt = 1e-3;
  double ratio_low = 1.7;
  double ratio_high = 2.3;

  // Output.
  std::filesystem::path out_dir = "verify-out";
  bool write_trajectories = true;
  bool checkpoints = false;

  /// Step size for this config's loss.
  double step_size() const;
  /// Throws orthonet::InvalidInput on an unusable config.
  void validate() const;
};

ExperimentConfig default_config(ExperimentKind kind);
/// The grids used to certify the library's claims at desk scale.
ExperimentConfig paper_preset(ExperimentKind kind);

/// Overlays keys from a JSON document onto `config`. Recognized keys:
/// p, depth, eta, steps, loss{kind,seed,target,inputs,outputs,samples,noise},
/// retraction, seed, threshold, record_stride, controls, construction,
/// flow{etas,t_end,dt}, out, checkpoints.
void merge_config_json(ExperimentConfig& config, std::string_view json_text);
void merge_config_file(ExperimentConfig& config, const std::filesystem::path& path);

}  // namespace verify
