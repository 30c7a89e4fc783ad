#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "orthonet/losses.hpp"
#include "orthonet/manifold.hpp"
#include "orthonet/matrix_types.hpp"
#include "orthonet/network.hpp"

namespace orthonet {

/// One logged state of a training run.
struct TrajectoryRecord {
  std::size_t step = 0;
  double time = 0.0;  // step * eta for discrete runs, integration time for flows
  double loss = 0.0;
  OrthogonalMatrix product;
  double generator_norm = 0.0;    // ||Skew(G(Pi) Pi^T)||_F
  double max_layer_defect = 0.0;  // deep runs; equals product_defect for shallow ones
  double product_defect = 0.0;
};

using Trajectory = std::vector<TrajectoryRecord>;

/// A run produced a non-finite value or a loss above 1e12.
class DivergedRun : public std::runtime_error {
 public:
  DivergedRun(const std::string& what, TrajectoryRecord last_good)
      : std::runtime_error(what), last_good_(std::move(last_good)) {}
  const TrajectoryRecord& last_good() const { return last_good_; }

 private:
  TrajectoryRecord last_good_;
};

struct TrainOptions {
  Retraction retraction = Retraction::kExponential;
  /// Record every `record_stride` steps; step 0 and the final step are always kept.
  std::size_t record_stride = 1;
};

/// Parameters of one training run, as carried by experiment configs.
struct TrainConfig {
  Eigen::Index p = 4;
  std::size_t depth = 1;
  double eta = 0.1;
  std::size_t steps = 200;
  LossSpec loss;
  std::uint64_t seed = 0;
  Retraction retraction = Retraction::kExponential;
  std::size_t record_stride = 1;

  /// Throws InvalidInput unless p >= 1, depth >= 1, eta > 0 and finite.
  void validate() const;
};

/// Default step size per loss: 0.1 for procrustes and trace, 0.01 for regression.
double default_step_size(LossKind kind);

/// Riemannian gradient descent on a single orthogonal matrix,
/// Pi <- R(Pi, Skew(G(Pi) Pi^T), eta).
Trajectory shallow_rgd(const OrthogonalMatrix& pi0, const DifferentiableLoss& loss, double eta,
                       std::size_t steps, const TrainOptions& options = {});

enum class DeepUpdate { kSimultaneous, kSequential };

/// Riemannian gradient descent on every layer of a deep factorization; the
/// records carry the product W_L ... W_1 of each iterate.
Trajectory deep_rgd(const NetworkWeights& weights0, const DifferentiableLoss& loss, double eta,
                    std::size_t steps, const TrainOptions& options = {},
                    DeepUpdate update = DeepUpdate::kSimultaneous);

enum class FlowScheme {
  kRk4,      // classical Runge-Kutta in the ambient space + polar re-projection
  kLieEuler  // Pi <- exp(-dt Skew(G(Pi) Pi^T)) Pi
};

/// Integrates dPi/dt = -Skew(G(Pi) Pi^T) Pi from 0 to t_end. The step count
/// is ceil(t_end / dt) and the step is shrunk so the last one lands on t_end.
Trajectory flow_integrate(const OrthogonalMatrix& pi0, const DifferentiableLoss& loss,
                          double t_end, double dt, FlowScheme scheme = FlowScheme::kRk4,
                          std::size_t record_stride = 1);

/// Max over aligned records of ||a[k].product - b[k].product||_F. Both
/// trajectories must have the same length.
struct TrajectoryDeviation {
  double max_deviation = 0.0;
  std::size_t worst_step = 0;
  /// First step whose deviation exceeds the threshold given to the comparison.
  std::optional<std::size_t> first_exceed_step;
};

TrajectoryDeviation compare_trajectories(const Trajectory& a, const Trajectory& b,
                                         double threshold);

}  // namespace orthonet
