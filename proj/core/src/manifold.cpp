#include "orthonet/manifold.hpp"

#include <cmath>
#include <string>

#include "orthonet/errors.hpp"
#include "orthonet/linalg.hpp"
#include "orthonet/losses.hpp"

namespace orthonet {
namespace {

void require_same_dim(const OrthogonalMatrix& w, const Matrix& b, const char* what) {
  if (b.rows() != w.dim() || b.cols() != w.dim()) {
    throw InvalidInput(std::string(what) + ": dimension mismatch");
  }
}

void require_finite_step(double eta, const char* what) {
  if (!std::isfinite(eta)) throw InvalidInput(std::string(what) + ": non-finite step");
}

}  // namespace

TangentVector::TangentVector(OrthogonalMatrix base_point, SkewSymmetricMatrix generator)
    : base_(std::move(base_point)), generator_(std::move(generator)) {
  if (base_.dim() != generator_.dim()) {
    throw InvalidInput("TangentVector: dimension mismatch");
  }
}

TangentVector project_tangent(const OrthogonalMatrix& w, const Matrix& b) {
  require_same_dim(w, b, "project_tangent");
  return TangentVector(w, skew_part(b * w.matrix().transpose()));
}

TangentVector riemannian_grad(const DifferentiableLoss& loss, const OrthogonalMatrix& w) {
  const Matrix g = loss.gradient(w.matrix());
  if (!g.allFinite()) throw std::domain_error("riemannian_grad: non-finite loss gradient");
  return project_tangent(w, g);
}

OrthogonalMatrix retract_exponential(const OrthogonalMatrix& w, const SkewSymmetricMatrix& a,
                                     double eta) {
  require_same_dim(w, a.matrix(), "retract_exponential");
  require_finite_step(eta, "retract_exponential");
  return matrix_exp_skew(-eta * a) * w;
}

OrthogonalMatrix retract_cayley(const OrthogonalMatrix& w, const SkewSymmetricMatrix& a,
                                double eta) {
  require_same_dim(w, a.matrix(), "retract_cayley");
  require_finite_step(eta, "retract_cayley");
  const Eigen::Index p = w.dim();
  const Matrix half = (0.5 * eta) * a.matrix();
  const Matrix ident = Matrix::Identity(p, p);
  // I + (eta/2) A has eigenvalues 1 + i*lambda, never singular for skew A.
  const Matrix rotation = (ident + half).partialPivLu().solve(ident - half);
  return OrthogonalMatrix::trusted(rotation * w.matrix());
}

OrthogonalMatrix retract_projection(const OrthogonalMatrix& w, const SkewSymmetricMatrix& a,
                                    double eta, ProjectionMethod method) {
  require_same_dim(w, a.matrix(), "retract_projection");
  require_finite_step(eta, "retract_projection");
  const Matrix stepped = w.matrix() - eta * (a.matrix() * w.matrix());
  return method == ProjectionMethod::kPolar ? polar_factor(stepped)
                                            : qr_orthonormalize(stepped);
}

OrthogonalMatrix retract(Retraction kind, const OrthogonalMatrix& w,
                         const SkewSymmetricMatrix& a, double eta) {
  switch (kind) {
    case Retraction::kExponential:
      return retract_exponential(w, a, eta);
    case Retraction::kCayley:
      return retract_cayley(w, a, eta);
    case Retraction::kProjection:
      return retract_projection(w, a, eta);
  }
  throw InvalidInput("retract: unknown retraction");
}

std::string_view to_string(Retraction kind) {
  switch (kind) {
    case Retraction::kExponential:
      return "exp";
    case Retraction::kCayley:
      return "cayley";
    case Retraction::kProjection:
      return "projection";
  }
  return "unknown";
}

Retraction parse_retraction(std::string_view name) {
  if (name == "exp" || name == "exponential") return Retraction::kExponential;
  if (name == "cayley") return Retraction::kCayley;
  if (name == "projection") return Retraction::kProjection;
  throw InvalidInput("unknown retraction '" + std::string(name) + "'");
}

}  // namespace orthonet
