#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace orthonet {

/// Dense square real matrix. Element (i, j) is row i, column j.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Frobenius inner product <A, B> = trace(A^T B).
inline double frobenius_inner(const Matrix& a, const Matrix& b) {
  return (a.array() * b.array()).sum();
}

/// Throws InvalidInput unless `m` is square with finite entries.
void require_square_finite(const Matrix& m, const char* what);

/// A p x p matrix A with A^T = -A.
///
/// Construction always symmetrizes away the symmetric part, A <- (A - A^T)/2,
/// so skewness is structural: the diagonal is exactly zero and
/// A(i, j) == -A(j, i) bitwise. An already-skew input passes through unchanged.
class SkewSymmetricMatrix {
 public:
  /// Zero generator of dimension p.
  explicit SkewSymmetricMatrix(Eigen::Index p = 0);
  explicit SkewSymmetricMatrix(const Matrix& m);

  const Matrix& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }
  double norm() const { return m_.norm(); }

  SkewSymmetricMatrix operator-() const;
  friend SkewSymmetricMatrix operator*(double s, const SkewSymmetricMatrix& a);

 private:
  struct Trusted {};
  SkewSymmetricMatrix(Matrix m, Trusted) : m_(std::move(m)) {}

  Matrix m_;
};

/// A p x p matrix W with W W^T = I.
///
/// The public constructor validates the orthogonality defect against
/// kConstructionTolerance. Library code that produces orthogonal matrices by
/// construction (exponentials, retractions, QR factors) uses `trusted`.
class OrthogonalMatrix {
 public:
  static constexpr double kConstructionTolerance = 1e-10;

  OrthogonalMatrix() = default;
  explicit OrthogonalMatrix(Matrix m, double tolerance = kConstructionTolerance);

  static OrthogonalMatrix identity(Eigen::Index p);
  /// Wraps `m` without checking the defect.
  static OrthogonalMatrix trusted(Matrix m);

  const Matrix& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }
  OrthogonalMatrix transpose() const { return trusted(m_.transpose()); }
  double defect() const;

  friend OrthogonalMatrix operator*(const OrthogonalMatrix& a,
                                    const OrthogonalMatrix& b) {
    return trusted(a.m_ * b.m_);
  }

 private:
  Matrix m_;
};

}  // namespace orthonet
