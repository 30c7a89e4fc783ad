#pragma once

#include <cstdint>

#include "orthonet/matrix_types.hpp"
#include "orthonet/random.hpp"

namespace orthonet {

/// Skew(M) = (M - M^T) / 2, evaluated elementwise.
SkewSymmetricMatrix skew_part(const Matrix& m);

/// exp(A) for skew-symmetric A by scaling and squaring with a diagonal Pade
/// approximant of degree 3, 5, 7, 9 or 13 selected from ||A||_1.
///
/// For skew A the Pade approximant r satisfies r(A)^T = r(-A) = r(A)^{-1}, so
/// the result is orthogonal up to rounding for every finite input.
OrthogonalMatrix matrix_exp_skew(const SkewSymmetricMatrix& a);

/// Q factor of M = QR under the convention diag(R) > 0.
/// Throws SingularInput when sigma_min(M) <= 1e-10 * sigma_max(M).
OrthogonalMatrix qr_orthonormalize(const Matrix& m);

/// Nearest orthogonal matrix in Frobenius norm, U V^T from M = U S V^T.
/// Same singularity rule as qr_orthonormalize.
OrthogonalMatrix polar_factor(const Matrix& m);

/// Haar-distributed sample on O(p): QR (positive-diagonal convention) of a
/// matrix of independent standard normals filled in row-major order.
OrthogonalMatrix haar_sample(Eigen::Index p, std::uint64_t seed);
OrthogonalMatrix haar_sample(Eigen::Index p, Rng& rng);

/// Standard-normal p x q matrix, row-major fill order.
Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng);

/// W itself when det W and det reference share a sign, otherwise W with its
/// first row negated. O(p) has two connected components and Riemannian
/// descent never leaves the one it starts in.
OrthogonalMatrix same_component(const OrthogonalMatrix& w, const OrthogonalMatrix& reference);

/// ||W W^T - I||_F.
double orthogonality_defect(const Matrix& w);

}  // namespace orthonet
