#include "orthonet/matrix_types.hpp"

#include <string>

#include "orthonet/errors.hpp"
#include "orthonet/linalg.hpp"

namespace orthonet {

void require_square_finite(const Matrix& m, const char* what) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw InvalidInput(std::string(what) + ": expected a non-empty square matrix, got " +
                       std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  if (!m.allFinite()) {
    throw InvalidInput(std::string(what) + ": non-finite entry");
  }
}

SkewSymmetricMatrix::SkewSymmetricMatrix(Eigen::Index p) : m_(Matrix::Zero(p, p)) {}

SkewSymmetricMatrix::SkewSymmetricMatrix(const Matrix& m) {
  require_square_finite(m, "SkewSymmetricMatrix");
  m_ = (m - m.transpose()) * 0.5;
}

SkewSymmetricMatrix SkewSymmetricMatrix::operator-() const {
  return SkewSymmetricMatrix(Matrix(-m_), Trusted{});
}

SkewSymmetricMatrix operator*(double s, const SkewSymmetricMatrix& a) {
  // s * a(i, j) and s * (-a(i, j)) are exact negatives, so skewness survives.
  return SkewSymmetricMatrix(Matrix(s * a.m_), SkewSymmetricMatrix::Trusted{});
}

OrthogonalMatrix::OrthogonalMatrix(Matrix m, double tolerance) : m_(std::move(m)) {
  require_square_finite(m_, "OrthogonalMatrix");
  const double d = defect();
  if (!(d <= tolerance)) {
    throw InvalidInput("OrthogonalMatrix: orthogonality defect " + std::to_string(d) +
                       " exceeds tolerance");
  }
}

OrthogonalMatrix OrthogonalMatrix::identity(Eigen::Index p) {
  return trusted(Matrix::Identity(p, p));
}

OrthogonalMatrix OrthogonalMatrix::trusted(Matrix m) {
  OrthogonalMatrix w;
  w.m_ = std::move(m);
  return w;
}

double OrthogonalMatrix::defect() const { return orthogonality_defect(m_); }

}  // namespace orthonet
