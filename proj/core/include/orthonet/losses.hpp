#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "orthonet/matrix_types.hpp"

namespace orthonet {

/// A differentiable loss l on p x p matrices with Euclidean gradient G(X).
///
/// Evaluation is total on finite matrices, not just orthogonal ones, since
/// finite-difference probes step off the manifold. Implementations are
/// immutable and safe to share across threads.
class DifferentiableLoss {
 public:
  virtual ~DifferentiableLoss() = default;

  virtual Eigen::Index dim() const = 0;
  virtual double value(const Matrix& x) const = 0;
  virtual Matrix gradient(const Matrix& x) const = 0;
  /// Global minimizer of the loss restricted to O(p), when known in closed form.
  virtual std::optional<OrthogonalMatrix> manifold_minimizer() const { return std::nullopt; }
  virtual std::string_view name() const = 0;
};

using LossPtr = std::shared_ptr<const DifferentiableLoss>;

/// l(W) = 1/2 ||W - T||_F^2, G(W) = W - T.
LossPtr procrustes_loss(const OrthogonalMatrix& target);

/// l(W) = 1/2 ||W X - Y||_F^2, G(W) = (W X - Y) X^T, for p x n data X, Y.
LossPtr regression_loss(const Matrix& inputs, const Matrix& outputs);

/// l(W) = <C, W>_F, G(W) = C.
LossPtr linear_trace_loss(const Matrix& c);

/// Central differences: entry (i, j) = (l(W + h E_ij) - l(W - h E_ij)) / (2h).
Matrix finite_diff_gradient(const DifferentiableLoss& loss, const Matrix& w, double h);

enum class LossKind { kProcrustes, kRegression, kTrace };

std::string_view to_string(LossKind kind);
/// Accepts "procrustes", "regression", "trace".
LossKind parse_loss_kind(std::string_view name);

/// How an experiment obtains its loss instance. Without files, the data are
/// drawn from the given seed:
///   procrustes: T Haar on O(p);
///   regression: X standard normal p x n scaled by 1/sqrt(n), Y = T X + noise
///               (noise entries normal, scaled by noise/sqrt(n));
///   trace:      C standard normal p x p scaled by 1/sqrt(p).
/// `target_file` holds T (procrustes) or C (trace); `inputs_file` and
/// `outputs_file` hold X and Y in the `rows cols` data-matrix format.
struct LossSpec {
  LossKind kind = LossKind::kProcrustes;
  std::optional<std::filesystem::path> target_file;
  std::optional<std::filesystem::path> inputs_file;
  std::optional<std::filesystem::path> outputs_file;
  Eigen::Index samples = 0;  // regression n; 0 means 4p
  double noise = 0.1;
};

LossPtr make_loss(const LossSpec& spec, Eigen::Index p, std::uint64_t seed);

}  // namespace orthonet
