#pragma once

#include <cstdint>

#include "orthonet/network.hpp"
#include "orthonet/random.hpp"
#include "verify/config.hpp"
#include "verify/report.hpp"

namespace verify {

// Every cell draws from stream_seed(config.seed, cell index); inside a cell,
// sub-stream 0 feeds the loss data and sub-stream 1 the initial weights.
// Controls use cell indices past the end of the grid.

/// Deep vs shallow product trajectories from matched initialization, per
/// (p, L) cell. Optional control: the sequential update on
/// (control_dim, control_depth), expected to exceed the threshold.
ExperimentReport run_equivalence(const ExperimentConfig& config);

/// Networks of depths depths[0] and depths[j] with equal initial products,
/// trained side by side. Optional control: a second network with a different
/// initial product, expected to exceed the threshold by step 1.
ExperimentReport run_depth_independence(const ExperimentConfig& config);

/// Discrete RGD after t_end / eta steps against the RK4 flow at t_end, for
/// each eta in flow_etas. Passes iff consecutive gap ratios fall in
/// [ratio_low, ratio_high].
ExperimentReport run_flow_comparison(const ExperimentConfig& config);

/// Shallow RGD from a start in the minimizer's component; deviation is the
/// final distance to the closed-form minimizer.
ExperimentReport run_convergence(const ExperimentConfig& config);

ExperimentReport run_experiment(const ExperimentConfig& config);

/// Depth-L network of independent Haar layers drawn from `rng`.
orthonet::NetworkWeights haar_network(long p, std::size_t depth, orthonet::Rng& rng);

/// A depth-`target_depth` network whose product equals that of `base`,
/// obtained by inserting layers right after layer 1. Requires
/// target_depth >= base.depth().
orthonet::NetworkWeights equal_product_network(const orthonet::NetworkWeights& base,
                                               std::size_t target_depth,
                                               DepthConstruction construction,
                                               orthonet::Rng& rng);

}  // namespace verify
