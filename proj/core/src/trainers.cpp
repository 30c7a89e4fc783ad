#include "orthonet/trainers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "orthonet/errors.hpp"
#include "orthonet/linalg.hpp"

namespace orthonet {
namespace {

constexpr double kDivergenceLoss = 1e12;
constexpr double kReorthonormalizeAbove = 1e-9;

bool is_recorded(std::size_t step, std::size_t last, std::size_t stride) {
  return step == 0 || step == last || step % stride == 0;
}

TrajectoryRecord make_record(std::size_t step, double time, const DifferentiableLoss& loss,
                             const OrthogonalMatrix& pi, double layer_defect) {
  TrajectoryRecord r;
  r.step = step;
  r.time = time;
  r.loss = loss.value(pi.matrix());
  r.product = pi;
  r.generator_norm = skew_part(loss.gradient(pi.matrix()) * pi.matrix().transpose()).norm();
  r.product_defect = pi.defect();
  r.max_layer_defect = layer_defect < 0.0 ? r.product_defect : layer_defect;
  return r;
}

bool finite_record(const TrajectoryRecord& r) {
  return std::isfinite(r.loss) && std::isfinite(r.generator_norm) &&
         std::isfinite(r.product_defect) && std::isfinite(r.max_layer_defect) &&
         r.loss <= kDivergenceLoss && r.product.matrix().allFinite();
}

[[noreturn]] void diverge(const std::string& who, std::size_t step,
                          const TrajectoryRecord& last_good) {
  throw DivergedRun(who + ": run diverged at step " + std::to_string(step), last_good);
}

// Wraps record keeping and divergence checks shared by all loops.
class Recorder {
 public:
  Recorder(std::string who, std::size_t last_step, std::size_t stride)
      : who_(std::move(who)), last_(last_step), stride_(std::max<std::size_t>(stride, 1)) {}

  // Checks every step (recorded or not); stores it when due.
  void offer(TrajectoryRecord record) {
    if (!finite_record(record)) {
      diverge(who_, record.step, last_good_ ? *last_good_ : record);
    }
    if (is_recorded(record.step, last_, stride_)) out_.push_back(record);
    last_good_ = std::move(record);
  }

  // Cheap check for unrecorded steps: finite product only.
  void check_finite(std::size_t step, const Matrix& m) {
    if (!m.allFinite()) diverge(who_, step, *last_good_);
  }

  bool due(std::size_t step) const { return is_recorded(step, last_, stride_); }
  Trajectory take() { return std::move(out_); }

 private:
  std::string who_;
  std::size_t last_;
  std::size_t stride_;
  Trajectory out_;
  std::optional<TrajectoryRecord> last_good_;
};

OrthogonalMatrix keep_on_manifold(OrthogonalMatrix pi) {
  if (pi.defect() > kReorthonormalizeAbove) return qr_orthonormalize(pi.matrix());
  return pi;
}

Matrix flow_field(const DifferentiableLoss& loss, const Matrix& pi) {
  return -(skew_part(loss.gradient(pi) * pi.transpose()).matrix() * pi);
}

}  // namespace

void TrainConfig::validate() const {
  if (p < 1) throw InvalidInput("TrainConfig: p must be positive");
  if (depth < 1) throw InvalidInput("TrainConfig: depth must be at least 1");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw InvalidInput("TrainConfig: eta must be positive");
  if (record_stride < 1) throw InvalidInput("TrainConfig: record stride must be positive");
}

double default_step_size(LossKind kind) {
  return kind == LossKind::kRegression ? 0.01 : 0.1;
}

Trajectory shallow_rgd(const OrthogonalMatrix& pi0, const DifferentiableLoss& loss, double eta,
                       std::size_t steps, const TrainOptions& options) {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw InvalidInput("shallow_rgd: eta must be positive");
  if (pi0.dim() != loss.dim()) throw InvalidInput("shallow_rgd: dimension mismatch");
  Recorder recorder("shallow_rgd", steps, options.record_stride);
  OrthogonalMatrix pi = pi0;
  recorder.offer(make_record(0, 0.0, loss, pi, -1.0));
  for (std::size_t k = 1; k <= steps; ++k) {
    const Matrix g = loss.gradient(pi.matrix());
    recorder.check_finite(k, g);
    const SkewSymmetricMatrix generator = skew_part(g * pi.matrix().transpose());
    pi = keep_on_manifold(retract(options.retraction, pi, generator, eta));
    recorder.check_finite(k, pi.matrix());
    if (recorder.due(k)) recorder.offer(make_record(k, k * eta, loss, pi, -1.0));
  }
  return recorder.take();
}

Trajectory deep_rgd(const NetworkWeights& weights0, const DifferentiableLoss& loss, double eta,
                    std::size_t steps, const TrainOptions& options, DeepUpdate update) {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw InvalidInput("deep_rgd: eta must be positive");
  if (weights0.dim() != loss.dim()) throw InvalidInput("deep_rgd: dimension mismatch");
  Recorder recorder("deep_rgd", steps, options.record_stride);
  const DeepStepOptions step_options{options.retraction};
  NetworkWeights weights = weights0;
  recorder.offer(make_record(0, 0.0, loss, product(weights), weights.max_layer_defect()));
  for (std::size_t k = 1; k <= steps; ++k) {
    DeepStepResult result = update == DeepUpdate::kSimultaneous
                                ? deep_step(weights, loss, eta, step_options)
                                : deep_step_sequential(weights, loss, eta, step_options);
    weights = std::move(result.weights);
    if (recorder.due(k)) {
      // Log the pre-correction defect so re-orthonormalization cannot hide drift.
      recorder.offer(make_record(k, k * eta, loss, product(weights),
                                 result.max_defect_before_correction));
    } else if (!std::isfinite(result.max_defect_before_correction)) {
      recorder.check_finite(k, Matrix::Constant(1, 1, result.max_defect_before_correction));
    }
  }
  return recorder.take();
}

Trajectory flow_integrate(const OrthogonalMatrix& pi0, const DifferentiableLoss& loss,
                          double t_end, double dt, FlowScheme scheme, std::size_t record_stride) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidInput("flow_integrate: dt must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) {
    throw InvalidInput("flow_integrate: t_end must be non-negative");
  }
  if (pi0.dim() != loss.dim()) throw InvalidInput("flow_integrate: dimension mismatch");

  const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  const double h = steps == 0 ? 0.0 : t_end / static_cast<double>(steps);
  Recorder recorder("flow_integrate", steps, record_stride);
  OrthogonalMatrix pi = pi0;
  recorder.offer(make_record(0, 0.0, loss, pi, -1.0));
  for (std::size_t k = 1; k <= steps; ++k) {
    if (scheme == FlowScheme::kRk4) {
      const Matrix& y = pi.matrix();
      const Matrix k1 = flow_field(loss, y);
      const Matrix k2 = flow_field(loss, y + (0.5 * h) * k1);
      const Matrix k3 = flow_field(loss, y + (0.5 * h) * k2);
      const Matrix k4 = flow_field(loss, y + h * k3);
      const Matrix next = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      recorder.check_finite(k, next);
      pi = polar_factor(next);
    } else {
      const SkewSymmetricMatrix generator =
          skew_part(loss.gradient(pi.matrix()) * pi.matrix().transpose());
      pi = keep_on_manifold(retract_exponential(pi, generator, h));
      recorder.check_finite(k, pi.matrix());
    }
    if (recorder.due(k)) {
      const double t = k == steps ? t_end : static_cast<double>(k) * h;
      recorder.offer(make_record(k, t, loss, pi, -1.0));
    }
  }
  return recorder.take();
}

TrajectoryDeviation compare_trajectories(const Trajectory& a, const Trajectory& b,
                                         double threshold) {
  if (a.size() != b.size()) throw InvalidInput("compare_trajectories: length mismatch");
  TrajectoryDeviation out;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = (a[k].product.matrix() - b[k].product.matrix()).norm();
    if (d > out.max_deviation || k == 0) {
      out.max_deviation = d;
      out.worst_step = a[k].step;
    }
    if (!out.first_exceed_step && !(d <= threshold)) out.first_exceed_step = a[k].step;
  }
  return out;
}

}  // namespace orthonet
