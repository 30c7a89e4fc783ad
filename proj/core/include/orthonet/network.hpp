#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "orthonet/losses.hpp"
#include "orthonet/manifold.hpp"
#include "orthonet/matrix_types.hpp"

namespace orthonet {

/// Depth-L orthogonal factorization (W_1, ..., W_L) acting as
/// x -> W_L ... W_1 x.
///
/// Layer indices are 1-based throughout this header: layer(1) is the first
/// factor applied to the input.
class NetworkWeights {
 public:
  static constexpr double kLayerTolerance = 1e-10;

  /// Validates depth >= 1, a shared dimension, and every layer's defect.
  explicit NetworkWeights(std::vector<OrthogonalMatrix> layers);
  /// Checks shape only; used for iterates produced by the library.
  static NetworkWeights trusted(std::vector<OrthogonalMatrix> layers);

  std::size_t depth() const { return layers_.size(); }
  Eigen::Index dim() const { return layers_.front().dim(); }
  const OrthogonalMatrix& layer(std::size_t i) const;
  const std::vector<OrthogonalMatrix>& layers() const { return layers_; }
  double max_layer_defect() const;

 private:
  NetworkWeights() = default;
  static void check_shape(const std::vector<OrthogonalMatrix>& layers);

  std::vector<OrthogonalMatrix> layers_;
};

/// Products above each layer, Pi_i = W_L ... W_{i+1} (Pi_L = I), and the full
/// product Pi = W_L ... W_1. Telescoping: Pi_i W_i = Pi_{i-1}, Pi_0 = Pi.
class PartialProducts {
 public:
  explicit PartialProducts(const NetworkWeights& weights);

  std::size_t depth() const { return above_.size(); }
  /// Pi_i for i in [1, L].
  const Matrix& above(std::size_t i) const;
  const Matrix& full() const { return full_; }

 private:
  friend class DeepStepper;
  PartialProducts() = default;

  std::vector<Matrix> above_;
  Matrix full_;
};

/// W_L ... W_1 x, applying layer 1 first.
Vector forward(const NetworkWeights& weights, const Vector& x);

/// Pi = W_L ... W_1, accumulated right to left; passed through
/// qr_orthonormalize when its defect exceeds 1e-9.
OrthogonalMatrix product(const NetworkWeights& weights);

/// Euclidean gradient of L(W_1..W_L) = l(Pi)/L with respect to W_i:
/// (1/L) Pi_i^T G(Pi) Pi^T Pi_i W_i.
Matrix euclidean_grad_factor(const NetworkWeights& weights, const DifferentiableLoss& loss,
                             std::size_t i);

/// Riemannian gradient generator psi_i = (1/L) Pi_i^T Skew(G(Pi) Pi^T) Pi_i,
/// so that grad_i L = psi_i W_i. Equal to Skew(euclidean_grad_factor * W_i^T).
SkewSymmetricMatrix riemannian_grad_factor(const NetworkWeights& weights,
                                           const DifferentiableLoss& loss, std::size_t i);

/// The same generator with Skew applied after the change of basis:
/// (1/L) Skew(Pi_i^T G(Pi) Pi^T Pi_i).
SkewSymmetricMatrix riemannian_grad_factor_sandwiched(const NetworkWeights& weights,
                                                      const DifferentiableLoss& loss,
                                                      std::size_t i);

/// Every psi_i together with the shallow generator Skew(G(Pi) Pi^T), all at
/// one set of weights.
struct FactorGradients {
  SkewSymmetricMatrix product_generator;
  std::vector<SkewSymmetricMatrix> layer_generators;  // psi_1 .. psi_L
};

FactorGradients factor_gradients(const NetworkWeights& weights, const DifferentiableLoss& loss,
                                 const PartialProducts& products);

struct DeepStepOptions {
  Retraction retraction = Retraction::kExponential;
  /// Layers whose defect exceeds this after the step go through QR.
  double reorthonormalize_above = 1e-9;
};

struct DeepStepResult {
  NetworkWeights weights;
  /// Largest layer defect measured before any re-orthonormalization.
  double max_defect_before_correction = 0.0;
  std::size_t reorthonormalized_layers = 0;
};

/// One simultaneous Riemannian step: every psi_i is evaluated at the incoming
/// weights, then W_i' = R(W_i, psi_i, eta) for all i.
DeepStepResult deep_step(const NetworkWeights& weights, const DifferentiableLoss& loss,
                         double eta, const DeepStepOptions& options = {});

/// Layer-by-layer variant: psi_i is recomputed after layers 1..i-1 have
/// moved. Does not follow the shallow product trajectory; kept as a control.
DeepStepResult deep_step_sequential(const NetworkWeights& weights,
                                    const DifferentiableLoss& loss, double eta,
                                    const DeepStepOptions& options = {});

/// Deep stepping with partial products carried between steps instead of
/// recomputed. With the exponential retraction the products above layer i
/// update as Pi_i' = E^{L-i} Pi_i, E = exp(-(eta/L) Skew(G(Pi) Pi^T)).
/// Every `check_stride` steps the cache is compared against a fresh
/// recomputation and std::logic_error is thrown if they differ by more than
/// `check_tolerance`.
class DeepStepper {
 public:
  DeepStepper(NetworkWeights weights, double check_tolerance = 1e-9,
              std::size_t check_stride = 16);

  const NetworkWeights& weights() const { return weights_; }
  const PartialProducts& products() const { return products_; }
  DeepStepResult step(const DifferentiableLoss& loss, double eta);

 private:
  NetworkWeights weights_;
  PartialProducts products_;
  double check_tolerance_;
  std::size_t check_stride_;
  std::size_t steps_taken_ = 0;
};

// Checkpoint format: a header line `L p`, then the L layers in the matrix text
// format, layer 1 first.
void write_network(std::ostream& out, const NetworkWeights& weights);
NetworkWeights read_network(std::istream& in);
void save_network(const std::filesystem::path& path, const NetworkWeights& weights);
NetworkWeights load_network(const std::filesystem::path& path);

}  // namespace orthonet
