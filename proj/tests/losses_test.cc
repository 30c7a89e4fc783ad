#include "orthonet/losses.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "gtest/gtest.h"
#include "orthonet/errors.hpp"
#include "orthonet/linalg.hpp"
#include "orthonet/matrix_io.hpp"
#include "orthonet/trainers.hpp"
#include "support/oracles.hpp"

namespace {

using orthonet::Matrix;
using orthonet::OrthogonalMatrix;
using orthonet::Rng;

// |<G(X), D> - (l(X + hD) - l(X - hD)) / 2h| <= 1e-6 max(1, |l(X)|), ||D||_F = 1.
void expect_directional_fd(const orthonet::DifferentiableLoss& loss, Rng& rng, int points) {
  constexpr double h = 1e-5;
  const long p = loss.dim();
  for (int k = 0; k < points; ++k) {
    const Matrix x = 2.0 * oracle::random_matrix(p, rng);
    Matrix d = oracle::random_matrix(p, rng);
    d /= d.norm();
    const double analytic = orthonet::frobenius_inner(loss.gradient(x), d);
    const double numeric = (loss.value(x + h * d) - loss.value(x - h * d)) / (2 * h);
    EXPECT_LE(std::abs(analytic - numeric), 1e-6 * std::max(1.0, std::abs(loss.value(x))))
        << loss.name() << " p=" << p;
  }
}

TEST(ProcrustesLoss, ZeroAtTarget) {
  const OrthogonalMatrix t = orthonet::haar_sample(5, 1);
  const auto loss = orthonet::procrustes_loss(t);
  EXPECT_EQ(loss->value(t.matrix()), 0.0);
  EXPECT_EQ(loss->gradient(t.matrix()).norm(), 0.0);
}

TEST(ProcrustesLoss, AntipodeValue) {
  // 1/2 ||-T - T||^2 = 2 ||T||^2 = 2p, so 4 for p = 2.
  const OrthogonalMatrix t = orthonet::haar_sample(2, 2);
  EXPECT_NEAR(orthonet::procrustes_loss(t)->value(-t.matrix()), 4.0, 1e-14);
}

TEST(ProcrustesLoss, NonNegativeOnManifold) {
  Rng rng(3);
  const auto loss = orthonet::procrustes_loss(orthonet::haar_sample(6, rng));
  for (int k = 0; k < 50; ++k) EXPECT_GE(loss->value(orthonet::haar_sample(6, rng).matrix()), 0.0);
}

TEST(RegressionLoss, PerfectFitAtIdentity) {
  Rng rng(4);
  const Matrix x = orthonet::gaussian_matrix(3, 7, rng);
  const auto loss = orthonet::regression_loss(x, x);
  EXPECT_EQ(loss->value(Matrix::Identity(3, 3)), 0.0);
}

TEST(RegressionLoss, ReducesToProcrustesWithIdentityInputs) {
  Rng rng(5);
  const OrthogonalMatrix t = orthonet::haar_sample(4, rng);
  const auto regression = orthonet::regression_loss(Matrix::Identity(4, 4), t.matrix());
  const auto procrustes = orthonet::procrustes_loss(t);
  for (int k = 0; k < 5; ++k) {
    const Matrix w = oracle::random_matrix(4, rng);
    EXPECT_NEAR(regression->value(w), procrustes->value(w), 1e-14);
    EXPECT_LE((regression->gradient(w) - procrustes->gradient(w)).norm(), 1e-14);
  }
}

TEST(RegressionLoss, ShapeMismatchRejected) {
  EXPECT_THROW(orthonet::regression_loss(Matrix::Zero(3, 4), Matrix::Zero(3, 5)), orthonet::InvalidInput);
  EXPECT_THROW(orthonet::regression_loss(Matrix::Zero(3, 4), Matrix::Zero(2, 4)), orthonet::InvalidInput);
  const auto loss = orthonet::regression_loss(Matrix::Ones(3, 4), Matrix::Ones(3, 4));
  EXPECT_THROW(loss->value(Matrix::Zero(2, 2)), orthonet::InvalidInput);
}

TEST(RegressionLoss, RandomInstancePassesFiniteDifferences) {
  Rng rng(6);
  const auto loss = orthonet::regression_loss(orthonet::gaussian_matrix(5, 20, rng),
                                              orthonet::gaussian_matrix(5, 20, rng));
  expect_directional_fd(*loss, rng, 20);
}

TEST(LinearTraceLoss, ZeroMatrixMakesEveryPointStationary) {
  const auto loss = orthonet::linear_trace_loss(Matrix::Zero(3, 3));
  Rng rng(7);
  const Matrix w = orthonet::haar_sample(3, rng).matrix();
  EXPECT_EQ(loss->value(w), 0.0);
  EXPECT_EQ(loss->gradient(w).norm(), 0.0);
}

TEST(LinearTraceLoss, NegativeIdentityMinimizedAtIdentity) {
  constexpr long p = 4;
  const auto loss = orthonet::linear_trace_loss(-Matrix::Identity(p, p));
  ASSERT_TRUE(loss->manifold_minimizer());
  EXPECT_LE((loss->manifold_minimizer()->matrix() - Matrix::Identity(p, p)).norm(), 1e-14);
  // Descent from a rotation near the identity converges there with l = -p.
  Rng rng(8);
  const Matrix start = orthonet::matrix_exp_skew(
      orthonet::SkewSymmetricMatrix(oracle::random_skew(p, rng, 2.0))).matrix();
  const auto run = orthonet::shallow_rgd(OrthogonalMatrix(start), *loss, 0.1, 2000,
                                         {orthonet::Retraction::kExponential, 2000});
  EXPECT_NEAR(run.back().loss, -double(p), 1e-10);
  EXPECT_LE((run.back().product.matrix() - Matrix::Identity(p, p)).norm(), 1e-6);
}

TEST(LinearTraceLoss, MinimizerIsPolarFactorOfNegatedCost) {
  Rng rng(9);
  const Matrix c = oracle::random_matrix(5, rng);
  const auto loss = orthonet::linear_trace_loss(c);
  const Matrix best = loss->manifold_minimizer()->matrix();
  for (int k = 0; k < 200; ++k) {
    EXPECT_LE(loss->value(best), loss->value(orthonet::haar_sample(5, rng).matrix()) + 1e-12);
  }
}

TEST(Losses, FiniteDifferenceInvariantOnHundredPoints) {
  Rng rng(10);
  for (long p : {2L, 5L, 16L}) {
    expect_directional_fd(*orthonet::procrustes_loss(orthonet::haar_sample(p, rng)), rng, 100);
    expect_directional_fd(*orthonet::regression_loss(orthonet::gaussian_matrix(p, 3 * p, rng),
                                                     orthonet::gaussian_matrix(p, 3 * p, rng)),
                          rng, 100);
    expect_directional_fd(*orthonet::linear_trace_loss(oracle::random_matrix(p, rng)), rng, 100);
  }
}

TEST(FiniteDiffGradient, LinearLossIsExact) {
  Rng rng(11);
  const Matrix c = oracle::random_matrix(4, rng);
  const auto loss = orthonet::linear_trace_loss(c);
  for (double h : {1e-2, 1e-5, 0.5}) {
    EXPECT_LE((orthonet::finite_diff_gradient(*loss, oracle::random_matrix(4, rng), h) - c).norm(),
              1e-9);
  }
}

TEST(FiniteDiffGradient, ProcrustesAtTargetAndRandomPoints) {
  Rng rng(12);
  const OrthogonalMatrix t = orthonet::haar_sample(5, rng);
  const auto loss = orthonet::procrustes_loss(t);
  EXPECT_LE(orthonet::finite_diff_gradient(*loss, t.matrix(), 1e-5).norm(), 1e-10);
  for (int k = 0; k < 10; ++k) {
    const Matrix w = oracle::random_matrix(5, rng);
    const Matrix fd = orthonet::finite_diff_gradient(*loss, w, 1e-5);
    EXPECT_LE((fd - loss->gradient(w)).norm(), 1e-6);
    EXPECT_LE((fd - oracle::fd_grad(*loss, w, 1e-5)).norm(), 1e-9);
  }
  EXPECT_THROW(orthonet::finite_diff_gradient(*loss, t.matrix(), 0.0), orthonet::InvalidInput);
}

TEST(MakeLoss, SeededInstancesAreReproducible) {
  for (auto kind : {orthonet::LossKind::kProcrustes, orthonet::LossKind::kRegression,
                    orthonet::LossKind::kTrace}) {
    orthonet::LossSpec spec;
    spec.kind = kind;
    const auto a = orthonet::make_loss(spec, 4, 17);
    const auto b = orthonet::make_loss(spec, 4, 17);
    const Matrix probe = Matrix::Identity(4, 4);
    EXPECT_EQ(a->value(probe), b->value(probe));
    EXPECT_EQ(a->name(), orthonet::to_string(kind));
    EXPECT_EQ(orthonet::parse_loss_kind(a->name()), kind);
  }
  EXPECT_THROW(orthonet::parse_loss_kind("hinge"), orthonet::InvalidInput);
}

TEST(MakeLoss, ReadsDataFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "orthonet_losses_test";
  std::filesystem::create_directories(dir);
  const OrthogonalMatrix t = orthonet::haar_sample(3, 5);
  orthonet::save_matrix(dir / "t.txt", t.matrix());

  orthonet::LossSpec procrustes;
  procrustes.target_file = dir / "t.txt";
  EXPECT_EQ(orthonet::make_loss(procrustes, 3, 0)->value(t.matrix()), 0.0);
  EXPECT_THROW(orthonet::make_loss(procrustes, 4, 0), orthonet::InvalidInput);

  Rng rng(6);
  const Matrix x = orthonet::gaussian_matrix(3, 8, rng);
  {
    std::ofstream xs(dir / "x.txt");
    orthonet::write_data_matrix(xs, x);
    std::ofstream ys(dir / "y.txt");
    orthonet::write_data_matrix(ys, t.matrix() * x);
  }
  orthonet::LossSpec regression;
  regression.kind = orthonet::LossKind::kRegression;
  regression.inputs_file = dir / "x.txt";
  regression.outputs_file = dir / "y.txt";
  const auto loss = orthonet::make_loss(regression, 3, 0);
  EXPECT_LE(loss->value(t.matrix()), 1e-28);
  EXPECT_LE((loss->manifold_minimizer()->matrix() - t.matrix()).norm(), 1e-12);

  regression.outputs_file.reset();
  EXPECT_THROW(orthonet::make_loss(regression, 3, 0), orthonet::InvalidInput);
  std::filesystem::remove_all(dir);
}

}  // namespace
