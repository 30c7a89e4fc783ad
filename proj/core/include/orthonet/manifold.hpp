#pragma once

#include <string_view>

#include "orthonet/matrix_types.hpp"

namespace orthonet {

class DifferentiableLoss;

/// Tangent vector X = A W at base point W, stored by its skew generator A.
class TangentVector {
 public:
  TangentVector(OrthogonalMatrix base_point, SkewSymmetricMatrix generator);

  const OrthogonalMatrix& base_point() const { return base_; }
  const SkewSymmetricMatrix& generator() const { return generator_; }
  /// Ambient representation A W.
  Matrix ambient() const { return generator_.matrix() * base_.matrix(); }

 private:
  OrthogonalMatrix base_;
  SkewSymmetricMatrix generator_;
};

/// Euclidean projection of B onto T_W: generator Skew(B W^T).
TangentVector project_tangent(const OrthogonalMatrix& w, const Matrix& b);

/// Riemannian gradient of `loss` at W: generator Skew(G(W) W^T).
TangentVector riemannian_grad(const DifferentiableLoss& loss, const OrthogonalMatrix& w);

// Retractions. Each takes the generator A and step eta separately and moves
// along -eta * A W; callers never pre-negate.

/// exp(-eta A) W.
OrthogonalMatrix retract_exponential(const OrthogonalMatrix& w, const SkewSymmetricMatrix& a,
                                     double eta);

/// (I + eta/2 A)^{-1} (I - eta/2 A) W.
OrthogonalMatrix retract_cayley(const OrthogonalMatrix& w, const SkewSymmetricMatrix& a,
                                double eta);

enum class ProjectionMethod { kPolar, kQr };

/// Projection of W - eta A W back onto O(p), by polar factor (default) or by
/// the positive-diagonal QR factor.
OrthogonalMatrix retract_projection(const OrthogonalMatrix& w, const SkewSymmetricMatrix& a,
                                    double eta,
                                    ProjectionMethod method = ProjectionMethod::kPolar);

enum class Retraction { kExponential, kCayley, kProjection };

OrthogonalMatrix retract(Retraction kind, const OrthogonalMatrix& w,
                         const SkewSymmetricMatrix& a, double eta);

std::string_view to_string(Retraction kind);
/// Accepts "exp", "exponential", "cayley", "projection".
Retraction parse_retraction(std::string_view name);

}  // namespace orthonet
