#include "orthonet/linalg.hpp"

#include <array>
#include <cmath>
#include <span>

#include "orthonet/errors.hpp"

namespace orthonet {
namespace {

// Diagonal Pade coefficients b_0..b_m and the 1-norm bounds theta_m below
// which the degree-m approximant is accurate to unit roundoff in double
// precision (Higham, "The scaling and squaring method for the matrix
// exponential revisited", 2005).
constexpr std::array<double, 4> kPade3 = {120.0, 60.0, 12.0, 1.0};
constexpr std::array<double, 6> kPade5 = {30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
constexpr std::array<double, 8> kPade7 = {17297280.0, 8648640.0, 1995840.0, 277200.0,
                                          25200.0,    1512.0,    56.0,      1.0};
constexpr std::array<double, 10> kPade9 = {17643225600.0, 8821612800.0, 2075673600.0,
                                           302702400.0,   30270240.0,   2162160.0,
                                           110880.0,      3960.0,       90.0,
                                           1.0};
constexpr std::array<double, 14> kPade13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0,  129060195264000.0,   10559470521600.0,
    670442572800.0,      33522128640.0,       1323241920.0,
    40840800.0,          960960.0,            16380.0,
    182.0,               1.0};

constexpr double kTheta3 = 1.495585217958292e-2;
constexpr double kTheta5 = 2.539398330063230e-1;
constexpr double kTheta7 = 9.504178996162932e-1;
constexpr double kTheta9 = 2.097847961257068e0;
constexpr double kTheta13 = 5.371920351148152e0;

struct PadeTerms {
  Matrix u;  // odd part
  Matrix v;  // even part
};

// Degrees 3..9: accumulate even powers A^0, A^2, ..., A^{m-1}.
PadeTerms pade_low(const Matrix& a, std::span<const double> b) {
  const Eigen::Index p = a.rows();
  const Matrix a2 = a * a;
  Matrix power = Matrix::Identity(p, p);
  Matrix odd = b[1] * power;
  Matrix even = b[0] * power;
  for (std::size_t k = 2; k + 1 < b.size(); k += 2) {
    power = power * a2;
    even += b[k] * power;
    odd += b[k + 1] * power;
  }
  return {a * odd, even};
}

PadeTerms pade13(const Matrix& a) {
  const auto& b = kPade13;
  const Eigen::Index p = a.rows();
  const Matrix ident = Matrix::Identity(p, p);
  const Matrix a2 = a * a;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;
  const Matrix u_inner = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 +
                         b[5] * a4 + b[3] * a2 + b[1] * ident;
  Matrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 +
             b[2] * a2 + b[0] * ident;
  return {a * u_inner, std::move(v)};
}

void require_well_conditioned(const Matrix& m, const char* what) {
  require_square_finite(m, what);
  const Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  const double largest = s(0);
  const double smallest = s(s.size() - 1);
  if (!(smallest > 1e-10 * largest)) {
    throw SingularInput(std::string(what) + ": matrix is numerically rank deficient");
  }
}

}  // namespace

SkewSymmetricMatrix skew_part(const Matrix& m) { return SkewSymmetricMatrix(m); }

OrthogonalMatrix matrix_exp_skew(const SkewSymmetricMatrix& a) {
  const Matrix& m = a.matrix();
  const Eigen::Index p = m.rows();
  if (p == 0) return OrthogonalMatrix::trusted(Matrix(0, 0));

  const double norm1 = m.cwiseAbs().colwise().sum().maxCoeff();
  PadeTerms terms;
  int squarings = 0;
  if (norm1 <= kTheta3) {
    terms = pade_low(m, kPade3);
  } else if (norm1 <= kTheta5) {
    terms = pade_low(m, kPade5);
  } else if (norm1 <= kTheta7) {
    terms = pade_low(m, kPade7);
  } else if (norm1 <= kTheta9) {
    terms = pade_low(m, kPade9);
  } else {
    squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / kTheta13))));
    // Division by a power of two is exact.
    terms = pade13(std::ldexp(1.0, -squarings) * m);
  }

  const Matrix numerator = terms.v + terms.u;
  const Matrix denominator = terms.v - terms.u;
  Matrix result = denominator.partialPivLu().solve(numerator);
  for (int k = 0; k < squarings; ++k) result = result * result;
  return OrthogonalMatrix::trusted(std::move(result));
}

OrthogonalMatrix qr_orthonormalize(const Matrix& m) {
  require_well_conditioned(m, "qr_orthonormalize");
  const Eigen::HouseholderQR<Matrix> qr(m);
  Matrix q = qr.householderQ();
  const Matrix& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return OrthogonalMatrix::trusted(std::move(q));
}

OrthogonalMatrix polar_factor(const Matrix& m) {
  require_square_finite(m, "polar_factor");
  const Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  if (!(s(s.size() - 1) > 1e-10 * s(0))) {
    throw SingularInput("polar_factor: matrix is numerically rank deficient");
  }
  return OrthogonalMatrix::trusted(svd.matrixU() * svd.matrixV().transpose());
}

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix g(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) g(i, j) = rng.gaussian();
  }
  return g;
}

OrthogonalMatrix haar_sample(Eigen::Index p, Rng& rng) {
  if (p < 1) throw InvalidInput("haar_sample: dimension must be positive");
  return qr_orthonormalize(gaussian_matrix(p, p, rng));
}

OrthogonalMatrix haar_sample(Eigen::Index p, std::uint64_t seed) {
  Rng rng(seed);
  return haar_sample(p, rng);
}

OrthogonalMatrix same_component(const OrthogonalMatrix& w, const OrthogonalMatrix& reference) {
  if (w.dim() != reference.dim()) throw InvalidInput("same_component: dimension mismatch");
  if ((w.matrix().determinant() > 0.0) == (reference.matrix().determinant() > 0.0)) return w;
  Matrix flipped = w.matrix();
  flipped.row(0) *= -1.0;
  return OrthogonalMatrix::trusted(std::move(flipped));
}

double orthogonality_defect(const Matrix& w) {
  if (w.rows() != w.cols()) throw InvalidInput("orthogonality_defect: matrix is not square");
  return (w * w.transpose() - Matrix::Identity(w.rows(), w.cols())).norm();
}

}  // namespace orthonet
