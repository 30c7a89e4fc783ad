#include "orthonet/trainers.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "gtest/gtest.h"
#include "orthonet/errors.hpp"
#include "orthonet/linalg.hpp"
#include "orthonet/trajectory_io.hpp"
#include "support/oracles.hpp"

namespace {

using orthonet::Matrix;
using orthonet::NetworkWeights;
using orthonet::OrthogonalMatrix;
using orthonet::Rng;
using orthonet::Trajectory;

NetworkWeights random_network(long p, std::size_t depth, Rng& rng) {
  std::vector<OrthogonalMatrix> layers;
  for (std::size_t i = 0; i < depth; ++i) layers.push_back(orthonet::haar_sample(p, rng));
  return NetworkWeights(layers);
}

// Finite only at the identity, so any move away from it diverges.
class PinnedLoss final : public orthonet::DifferentiableLoss {
 public:
  explicit PinnedLoss(long p) : p_(p) {}
  Eigen::Index dim() const override { return p_; }
  double value(const Matrix& x) const override {
    return (x - Matrix::Identity(p_, p_)).norm() == 0.0 ? 0.0
                                                        : std::numeric_limits<double>::quiet_NaN();
  }
  Matrix gradient(const Matrix&) const override {
    Matrix c = Matrix::Zero(p_, p_);
    c(0, 1) = 1.0;
    return c;
  }
  std::string_view name() const override { return "pinned"; }

 private:
  long p_;
};

TEST(ShallowRgd, ZeroStepsRecordsTheStart) {
  Rng rng(1);
  const OrthogonalMatrix pi0 = orthonet::haar_sample(4, rng);
  const auto loss = orthonet::procrustes_loss(orthonet::haar_sample(4, rng));
  const Trajectory t = orthonet::shallow_rgd(pi0, *loss, 0.1, 0);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].step, 0u);
  EXPECT_EQ(t[0].product.matrix(), pi0.matrix());
  EXPECT_DOUBLE_EQ(t[0].loss, loss->value(pi0.matrix()));
}

TEST(ShallowRgd, StationaryStartStaysPut) {
  Rng rng(2);
  const OrthogonalMatrix target = orthonet::haar_sample(5, rng);
  const auto loss = orthonet::procrustes_loss(target);
  const Trajectory t = orthonet::shallow_rgd(target, *loss, 0.1, 20);
  ASSERT_EQ(t.size(), 21u);
  for (const auto& r : t) {
    EXPECT_LE((r.product.matrix() - target.matrix()).norm(), 1e-15);
    EXPECT_LE(r.loss, 1e-30);
  }
}

TEST(ShallowRgd, ProcrustesConvergesMonotonically) {
  Rng rng(3);
  const OrthogonalMatrix target = orthonet::haar_sample(4, rng);
  const OrthogonalMatrix start = orthonet::same_component(orthonet::haar_sample(4, rng), target);
  const auto loss = orthonet::procrustes_loss(target);
  const Trajectory t = orthonet::shallow_rgd(start, *loss, 0.1, 200);
  ASSERT_EQ(t.size(), 201u);
  for (std::size_t k = 1; k < t.size(); ++k) {
    EXPECT_LE(t[k].loss, t[k - 1].loss + 1e-15) << "step " << k;
    EXPECT_DOUBLE_EQ(t[k].time, 0.1 * double(k));
  }
  EXPECT_LT(t.back().loss, 1e-8 * t.front().loss);
  EXPECT_LE(t.back().generator_norm, 1e-6);
  EXPECT_LE(t.back().product_defect, 1e-10);
}

TEST(ShallowRgd, OppositeComponentCannotReachTheTarget) {
  Rng rng(4);
  const OrthogonalMatrix target = orthonet::haar_sample(3, rng);
  Matrix flipped = orthonet::same_component(orthonet::haar_sample(3, rng), target).matrix();
  flipped.row(0) *= -1.0;
  const auto loss = orthonet::procrustes_loss(target);
  const Trajectory t = orthonet::shallow_rgd(OrthogonalMatrix(flipped), *loss, 0.1, 500);
  EXPECT_GE(t.back().loss, 2.0 - 1e-9);
}

TEST(ShallowRgd, RejectsBadArguments) {
  const auto loss = orthonet::procrustes_loss(OrthogonalMatrix::identity(3));
  EXPECT_THROW(orthonet::shallow_rgd(OrthogonalMatrix::identity(4), *loss, 0.1, 5),
               orthonet::InvalidInput);
  EXPECT_THROW(orthonet::shallow_rgd(OrthogonalMatrix::identity(3), *loss, -0.1, 5),
               orthonet::InvalidInput);
  EXPECT_THROW(orthonet::shallow_rgd(OrthogonalMatrix::identity(3), *loss,
                                     std::numeric_limits<double>::infinity(), 5),
               orthonet::InvalidInput);
}

TEST(ShallowRgd, DivergenceReportsTheLastGoodRecord) {
  const PinnedLoss loss(3);
  try {
    orthonet::shallow_rgd(OrthogonalMatrix::identity(3), loss, 0.1, 10);
    FAIL() << "expected DivergedRun";
  } catch (const orthonet::DivergedRun& e) {
    EXPECT_EQ(e.last_good().step, 0u);
    EXPECT_EQ(e.last_good().product.matrix(), Matrix::Identity(3, 3));
  }
  EXPECT_THROW(orthonet::deep_rgd(NetworkWeights({OrthogonalMatrix::identity(3),
                                                  OrthogonalMatrix::identity(3)}),
                                  loss, 0.1, 10),
               orthonet::DivergedRun);
}

TEST(ShallowRgd, RecordStrideKeepsEndpoints) {
  Rng rng(5);
  const auto loss = orthonet::procrustes_loss(orthonet::haar_sample(3, rng));
  orthonet::TrainOptions options;
  options.record_stride = 7;
  const Trajectory t = orthonet::shallow_rgd(orthonet::haar_sample(3, rng), *loss, 0.1, 20, options);
  std::vector<std::size_t> steps;
  for (const auto& r : t) steps.push_back(r.step);
  EXPECT_EQ(steps, (std::vector<std::size_t>{0, 7, 14, 20}));
}

TEST(ShallowRgd, IsDeterministic) {
  const auto run = [] {
    Rng rng(6);
    const auto loss = orthonet::regression_loss(orthonet::gaussian_matrix(4, 10, rng),
                                                orthonet::gaussian_matrix(4, 10, rng));
    return orthonet::shallow_rgd(orthonet::haar_sample(4, rng), *loss, 0.01, 50);
  };
  const Trajectory a = run();
  const Trajectory b = run();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k].product.matrix(), b[k].product.matrix());
}

TEST(DeepRgd, DepthOneIsBitwiseShallow) {
  Rng rng(7);
  const OrthogonalMatrix w = orthonet::haar_sample(5, rng);
  const auto loss = orthonet::procrustes_loss(orthonet::haar_sample(5, rng));
  const Trajectory deep = orthonet::deep_rgd(NetworkWeights({w}), *loss, 0.1, 60);
  const Trajectory shallow = orthonet::shallow_rgd(w, *loss, 0.1, 60);
  ASSERT_EQ(deep.size(), shallow.size());
  for (std::size_t k = 0; k < deep.size(); ++k) {
    EXPECT_EQ(deep[k].product.matrix(), shallow[k].product.matrix()) << "step " << k;
  }
}

TEST(DeepRgd, IdentityInitializedNetworkTracksShallowRun) {
  Rng rng(8);
  const auto loss = orthonet::procrustes_loss(orthonet::haar_sample(4, rng));
  const NetworkWeights w(std::vector<OrthogonalMatrix>(3, OrthogonalMatrix::identity(4)));
  const auto deviation = orthonet::compare_trajectories(
      orthonet::deep_rgd(w, *loss, 0.1, 100),
      orthonet::shallow_rgd(OrthogonalMatrix::identity(4), *loss, 0.1, 100), 1e-8);
  EXPECT_LE(deviation.max_deviation, 1e-8);
  EXPECT_FALSE(deviation.first_exceed_step.has_value());
}

TEST(DeepRgd, DeepTrajectoryEqualsShallowTrajectory) {
  Rng rng(9);
  const NetworkWeights w = random_network(8, 5, rng);
  const auto loss = orthonet::procrustes_loss(orthonet::haar_sample(8, rng));
  const Trajectory deep = orthonet::deep_rgd(w, *loss, 0.05, 100);
  const Trajectory shallow = orthonet::shallow_rgd(orthonet::product(w), *loss, 0.05, 100);
  const auto deviation = orthonet::compare_trajectories(deep, shallow, 1e-8);
  EXPECT_LE(deviation.max_deviation, 1e-8);
  for (const auto& r : deep) EXPECT_LE(r.max_layer_defect, 1e-10);
}

TEST(DeepRgd, SequentialUpdateDrifts) {
  Rng rng(10);
  const NetworkWeights w = random_network(8, 4, rng);
  const auto loss = orthonet::procrustes_loss(orthonet::haar_sample(8, rng));
  const auto deviation = orthonet::compare_trajectories(
      orthonet::deep_rgd(w, *loss, 0.1, 200, {}, orthonet::DeepUpdate::kSequential),
      orthonet::shallow_rgd(orthonet::product(w), *loss, 0.1, 200), 1e-4);
  EXPECT_GT(deviation.max_deviation, 1e-4);
  ASSERT_TRUE(deviation.first_exceed_step.has_value());
}

TEST(CompareTrajectories, RequiresEqualLengths) {
  const auto loss = orthonet::procrustes_loss(OrthogonalMatrix::identity(2));
  const Trajectory a = orthonet::shallow_rgd(OrthogonalMatrix::identity(2), *loss, 0.1, 3);
  const Trajectory b = orthonet::shallow_rgd(OrthogonalMatrix::identity(2), *loss, 0.1, 4);
  EXPECT_THROW(orthonet::compare_trajectories(a, b, 1e-8), orthonet::InvalidInput);
  EXPECT_EQ(orthonet::compare_trajectories(a, a, 1e-8).max_deviation, 0.0);
}

TEST(Flow, ZeroHorizonReturnsTheStart) {
  Rng rng(11);
  const OrthogonalMatrix pi0 = orthonet::haar_sample(3, rng);
  const auto loss = orthonet::procrustes_loss(orthonet::haar_sample(3, rng));
  const Trajectory t = orthonet::flow_integrate(pi0, *loss, 0.0, 1e-3);
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].product.matrix(), pi0.matrix());
}

TEST(Flow, StationaryPointIsFixed) {
  Rng rng(12);
  const OrthogonalMatrix target = orthonet::haar_sample(4, rng);
  const auto loss = orthonet::procrustes_loss(target);
  for (auto scheme : {orthonet::FlowScheme::kRk4, orthonet::FlowScheme::kLieEuler}) {
    const Trajectory t = orthonet::flow_integrate(target, *loss, 1.0, 0.01, scheme);
    EXPECT_LE((t.back().product.matrix() - target.matrix()).norm(), 1e-14);
  }
}

TEST(Flow, StepIsShrunkToLandOnTheHorizon) {
  const auto loss = orthonet::procrustes_loss(OrthogonalMatrix::identity(2));
  const Trajectory t = orthonet::flow_integrate(OrthogonalMatrix::identity(2), *loss, 1.0, 0.3);
  ASSERT_EQ(t.size(), 5u);
  EXPECT_DOUBLE_EQ(t.back().time, 1.0);
  EXPECT_DOUBLE_EQ(t[1].time, 0.25);
  EXPECT_THROW(orthonet::flow_integrate(OrthogonalMatrix::identity(2), *loss, 1.0, 0.0),
               orthonet::InvalidInput);
  EXPECT_THROW(orthonet::flow_integrate(OrthogonalMatrix::identity(2), *loss, -1.0, 0.1),
               orthonet::InvalidInput);
}

struct FlowFixture : ::testing::Test {
  FlowFixture() {
    Rng rng(13);
    target = orthonet::haar_sample(4, rng);
    start = orthonet::same_component(orthonet::haar_sample(4, rng), target);
    loss = orthonet::procrustes_loss(target);
  }
  Matrix flow_at(double t_end, double dt, orthonet::FlowScheme scheme) const {
    return orthonet::flow_integrate(start, *loss, t_end, dt, scheme).back().product.matrix();
  }
  OrthogonalMatrix target;
  OrthogonalMatrix start;
  orthonet::LossPtr loss;
};

TEST_F(FlowFixture, GradientDescentIsFirstOrderInTheStepSize) {
  constexpr double t_end = 2.0;
  const Matrix reference = flow_at(t_end, 1e-3, orthonet::FlowScheme::kRk4);
  const auto gap = [&](double eta) {
    const auto steps = static_cast<std::size_t>(std::lround(t_end / eta));
    return (orthonet::shallow_rgd(start, *loss, eta, steps).back().product.matrix() - reference).norm();
  };
  for (double r : oracle::halving_ratios(gap, 0.1, 3)) {
    EXPECT_GE(r, 1.7);
    EXPECT_LE(r, 2.3);
  }
}

TEST_F(FlowFixture, Rk4IsFourthOrder) {
  const Matrix reference = flow_at(1.0, 1e-3, orthonet::FlowScheme::kRk4);
  const auto error = [&](double dt) {
    return (flow_at(1.0, dt, orthonet::FlowScheme::kRk4) - reference).norm();
  };
  for (double r : oracle::halving_ratios(error, 0.2, 3)) {
    EXPECT_GE(r, 10.0);
    EXPECT_LE(r, 22.0);
  }
}

TEST_F(FlowFixture, LieEulerIsFirstOrder) {
  const Matrix reference = flow_at(1.0, 1e-3, orthonet::FlowScheme::kRk4);
  const auto error = [&](double dt) {
    return (flow_at(1.0, dt, orthonet::FlowScheme::kLieEuler) - reference).norm();
  };
  for (double r : oracle::halving_ratios(error, 0.05, 3)) EXPECT_NEAR(r, 2.0, 0.3);
}

TEST_F(FlowFixture, RefinementChangesLittle) {
  const Matrix coarse = flow_at(2.0, 1e-3, orthonet::FlowScheme::kRk4);
  const Matrix fine = flow_at(2.0, 5e-4, orthonet::FlowScheme::kRk4);
  EXPECT_LE((coarse - fine).norm(), 1e-8);
  const Trajectory t = orthonet::flow_integrate(start, *loss, 2.0, 1e-3);
  for (std::size_t k = 1; k < t.size(); ++k) EXPECT_LE(t[k].loss, t[k - 1].loss + 1e-14);
  EXPECT_LE(t.back().product_defect, 1e-12);
}

TEST(TrainConfig, Validation) {
  orthonet::TrainConfig config;
  EXPECT_NO_THROW(config.validate());
  config.eta = 0.0;
  EXPECT_THROW(config.validate(), orthonet::InvalidInput);
  config = {};
  config.depth = 0;
  EXPECT_THROW(config.validate(), orthonet::InvalidInput);
  config = {};
  config.p = 0;
  EXPECT_THROW(config.validate(), orthonet::InvalidInput);
  EXPECT_DOUBLE_EQ(orthonet::default_step_size(orthonet::LossKind::kRegression), 0.01);
  EXPECT_DOUBLE_EQ(orthonet::default_step_size(orthonet::LossKind::kProcrustes), 0.1);
  EXPECT_DOUBLE_EQ(orthonet::default_step_size(orthonet::LossKind::kTrace), 0.1);
}

TEST(TrajectoryCsv, HeaderAndRows) {
  const auto loss = orthonet::procrustes_loss(OrthogonalMatrix::identity(2));
  const Trajectory t =
      orthonet::shallow_rgd(OrthogonalMatrix(oracle::rotation2(0.5)), *loss, 0.1, 2);
  std::ostringstream out;
  orthonet::write_trajectory_csv(out, t);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "step,t,loss,generator_norm,max_layer_defect,product_defect");
  int rows = 0;
  while (std::getline(in, line)) {
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 5);
    ++rows;
  }
  EXPECT_EQ(rows, 3);
  EXPECT_EQ(out.str().substr(out.str().find('\n') + 1, 4), "0,0,");
}

}  // namespace
