#include "orthonet/network.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "orthonet/errors.hpp"
#include "orthonet/linalg.hpp"
#include "orthonet/matrix_io.hpp"

namespace orthonet {
namespace {

constexpr double kProductReorthonormalizeAbove = 1e-9;

void require_layer_index(std::size_t i, std::size_t depth, const char* what) {
  if (i < 1 || i > depth) {
    throw InvalidInput(std::string(what) + ": layer index " + std::to_string(i) +
                       " outside [1, " + std::to_string(depth) + "]");
  }
}

// Re-orthonormalize drifted layers in place, returning (max defect, count).
std::pair<double, std::size_t> apply_reorthonormalization(std::vector<OrthogonalMatrix>& layers,
                                                          double threshold) {
  double worst = 0.0;
  std::size_t corrected = 0;
  for (auto& layer : layers) {
    const double d = layer.defect();
    worst = std::max(worst, d);
    if (d > threshold) {
      layer = qr_orthonormalize(layer.matrix());
      ++corrected;
    }
  }
  return {worst, corrected};
}

}  // namespace

NetworkWeights::NetworkWeights(std::vector<OrthogonalMatrix> layers) : layers_(std::move(layers)) {
  check_shape(layers_);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (!(layers_[i].defect() <= kLayerTolerance)) {
      throw InvalidInput("NetworkWeights: layer " + std::to_string(i + 1) + " is not orthogonal");
    }
  }
}

NetworkWeights NetworkWeights::trusted(std::vector<OrthogonalMatrix> layers) {
  check_shape(layers);
  NetworkWeights w;
  w.layers_ = std::move(layers);
  return w;
}

void NetworkWeights::check_shape(const std::vector<OrthogonalMatrix>& layers) {
  if (layers.empty()) throw InvalidInput("NetworkWeights: depth must be at least 1");
  const Eigen::Index p = layers.front().dim();
  if (p < 1) throw InvalidInput("NetworkWeights: empty layer");
  for (const auto& layer : layers) {
    if (layer.dim() != p || layer.matrix().cols() != p) {
      throw InvalidInput("NetworkWeights: layers must share one dimension");
    }
  }
}

const OrthogonalMatrix& NetworkWeights::layer(std::size_t i) const {
  require_layer_index(i, depth(), "NetworkWeights::layer");
  return layers_[i - 1];
}

double NetworkWeights::max_layer_defect() const {
  double worst = 0.0;
  for (const auto& layer : layers_) worst = std::max(worst, layer.defect());
  return worst;
}

PartialProducts::PartialProducts(const NetworkWeights& weights) {
  const std::size_t depth = weights.depth();
  const Eigen::Index p = weights.dim();
  above_.resize(depth);
  above_[depth - 1] = Matrix::Identity(p, p);
  for (std::size_t i = depth - 1; i >= 1; --i) {
    // Pi_{i} = Pi_{i+1} W_{i+1}, zero-based storage at i - 1.
    above_[i - 1] = above_[i] * weights.layers()[i].matrix();
  }
  full_ = above_[0] * weights.layers()[0].matrix();
}

const Matrix& PartialProducts::above(std::size_t i) const {
  require_layer_index(i, depth(), "PartialProducts::above");
  return above_[i - 1];
}

Vector forward(const NetworkWeights& weights, const Vector& x) {
  if (x.size() != weights.dim()) throw InvalidInput("forward: input dimension mismatch");
  Vector state = x;
  for (const auto& layer : weights.layers()) state = layer.matrix() * state;
  return state;
}

OrthogonalMatrix product(const NetworkWeights& weights) {
  const auto& layers = weights.layers();
  Matrix acc = layers.back().matrix();
  for (std::size_t k = layers.size() - 1; k-- > 0;) acc = acc * layers[k].matrix();
  if (orthogonality_defect(acc) > kProductReorthonormalizeAbove) return qr_orthonormalize(acc);
  return OrthogonalMatrix::trusted(std::move(acc));
}

Matrix euclidean_grad_factor(const NetworkWeights& weights, const DifferentiableLoss& loss,
                             std::size_t i) {
  require_layer_index(i, weights.depth(), "euclidean_grad_factor");
  // Pi_1 = I and Pi^T Pi = I: the sandwich collapses to G(W_1).
  if (weights.depth() == 1) return loss.gradient(weights.layer(1).matrix());
  const PartialProducts products(weights);
  const Matrix& pi = products.full();
  const Matrix& above = products.above(i);
  const double scale = 1.0 / static_cast<double>(weights.depth());
  return scale * (above.transpose() * loss.gradient(pi) * pi.transpose() * above *
                  weights.layer(i).matrix());
}

SkewSymmetricMatrix riemannian_grad_factor(const NetworkWeights& weights,
                                           const DifferentiableLoss& loss, std::size_t i) {
  require_layer_index(i, weights.depth(), "riemannian_grad_factor");
  const PartialProducts products(weights);
  const Matrix& pi = products.full();
  const Matrix& above = products.above(i);
  const SkewSymmetricMatrix generator = skew_part(loss.gradient(pi) * pi.transpose());
  const double scale = 1.0 / static_cast<double>(weights.depth());
  return skew_part(scale * (above.transpose() * generator.matrix() * above));
}

SkewSymmetricMatrix riemannian_grad_factor_sandwiched(const NetworkWeights& weights,
                                                      const DifferentiableLoss& loss,
                                                      std::size_t i) {
  require_layer_index(i, weights.depth(), "riemannian_grad_factor_sandwiched");
  const PartialProducts products(weights);
  const Matrix& pi = products.full();
  const Matrix& above = products.above(i);
  const double scale = 1.0 / static_cast<double>(weights.depth());
  return scale * skew_part(above.transpose() * loss.gradient(pi) * pi.transpose() * above);
}

FactorGradients factor_gradients(const NetworkWeights& weights, const DifferentiableLoss& loss,
                                 const PartialProducts& products) {
  const Matrix& pi = products.full();
  const Matrix g = loss.gradient(pi);
  if (!g.allFinite()) throw std::domain_error("factor_gradients: non-finite loss gradient");
  FactorGradients out{skew_part(g * pi.transpose()), {}};
  const double scale = 1.0 / static_cast<double>(weights.depth());
  out.layer_generators.reserve(weights.depth());
  for (std::size_t i = 1; i <= weights.depth(); ++i) {
    const Matrix& above = products.above(i);
    out.layer_generators.push_back(
        skew_part(scale * (above.transpose() * out.product_generator.matrix() * above)));
  }
  return out;
}

DeepStepResult deep_step(const NetworkWeights& weights, const DifferentiableLoss& loss,
                         double eta, const DeepStepOptions& options) {
  const PartialProducts products(weights);
  const FactorGradients grads = factor_gradients(weights, loss, products);
  std::vector<OrthogonalMatrix> next;
  next.reserve(weights.depth());
  for (std::size_t i = 0; i < weights.depth(); ++i) {
    next.push_back(
        retract(options.retraction, weights.layers()[i], grads.layer_generators[i], eta));
  }
  const auto [worst, corrected] = apply_reorthonormalization(next, options.reorthonormalize_above);
  return {NetworkWeights::trusted(std::move(next)), worst, corrected};
}

DeepStepResult deep_step_sequential(const NetworkWeights& weights,
                                    const DifferentiableLoss& loss, double eta,
                                    const DeepStepOptions& options) {
  std::vector<OrthogonalMatrix> current = weights.layers();
  for (std::size_t i = 1; i <= current.size(); ++i) {
    const NetworkWeights snapshot = NetworkWeights::trusted(current);
    const SkewSymmetricMatrix psi = riemannian_grad_factor(snapshot, loss, i);
    current[i - 1] = retract(options.retraction, current[i - 1], psi, eta);
  }
  const auto [worst, corrected] =
      apply_reorthonormalization(current, options.reorthonormalize_above);
  return {NetworkWeights::trusted(std::move(current)), worst, corrected};
}

DeepStepper::DeepStepper(NetworkWeights weights, double check_tolerance,
                         std::size_t check_stride)
    : weights_(std::move(weights)),
      products_(weights_),
      check_tolerance_(check_tolerance),
      check_stride_(std::max<std::size_t>(check_stride, 1)) {}

DeepStepResult DeepStepper::step(const DifferentiableLoss& loss, double eta) {
  const std::size_t depth = weights_.depth();
  const FactorGradients grads = factor_gradients(weights_, loss, products_);
  std::vector<OrthogonalMatrix> next;
  next.reserve(depth);
  for (std::size_t i = 0; i < depth; ++i) {
    next.push_back(retract_exponential(weights_.layers()[i], grads.layer_generators[i], eta));
  }
  const auto [worst, corrected] = apply_reorthonormalization(next, kProductReorthonormalizeAbove);

  const double scale = eta / static_cast<double>(depth);
  const Matrix e = matrix_exp_skew(-scale * grads.product_generator).matrix();
  Matrix power = e;
  // above_[depth - 1] = I is unchanged; Pi_i' = E^{L-i} Pi_i.
  for (std::size_t k = depth - 1; k-- > 0;) {
    products_.above_[k] = power * products_.above_[k];
    power = power * e;
  }
  products_.full_ = power * products_.full_;

  weights_ = NetworkWeights::trusted(std::move(next));
  ++steps_taken_;
  if (corrected > 0 || steps_taken_ % check_stride_ == 0) {
    const PartialProducts fresh(weights_);
    double gap = (fresh.full() - products_.full()).norm();
    for (std::size_t i = 1; i <= depth; ++i) {
      gap = std::max(gap, (fresh.above(i) - products_.above(i)).norm());
    }
    if (corrected == 0 && gap > check_tolerance_) {
      throw std::logic_error("DeepStepper: cached partial products drifted by " +
                             std::to_string(gap));
    }
    products_ = fresh;
  }
  return {weights_, worst, corrected};
}

void write_network(std::ostream& out, const NetworkWeights& weights) {
  out << weights.depth() << ' ' << weights.dim() << '\n';
  for (const auto& layer : weights.layers()) write_matrix(out, layer.matrix());
}

NetworkWeights read_network(std::istream& in) {
  long depth = 0;
  long p = 0;
  if (!(in >> depth >> p) || depth < 1 || p < 1) {
    throw InvalidInput("network checkpoint: bad header");
  }
  std::vector<OrthogonalMatrix> layers;
  layers.reserve(static_cast<std::size_t>(depth));
  for (long i = 0; i < depth; ++i) {
    Matrix m = read_matrix(in);
    if (m.rows() != p) throw InvalidInput("network checkpoint: layer dimension mismatch");
    layers.emplace_back(std::move(m));
  }
  return NetworkWeights(std::move(layers));
}

void save_network(const std::filesystem::path& path, const NetworkWeights& weights) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path.string());
  write_network(out, weights);
}

NetworkWeights load_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  return read_network(in);
}

}  // namespace orthonet
