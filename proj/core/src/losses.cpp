#include "orthonet/losses.hpp"

#include <cmath>
#include <string>

#include "orthonet/errors.hpp"
#include "orthonet/linalg.hpp"
#include "orthonet/matrix_io.hpp"
#include "orthonet/random.hpp"

namespace orthonet {
namespace {

void require_dim(const Matrix& x, Eigen::Index p, std::string_view who) {
  if (x.rows() != p || x.cols() != p) {
    throw InvalidInput(std::string(who) + ": expected a " + std::to_string(p) + "x" +
                       std::to_string(p) + " argument");
  }
}

class ProcrustesLoss final : public DifferentiableLoss {
 public:
  explicit ProcrustesLoss(OrthogonalMatrix target) : target_(std::move(target)) {}

  Eigen::Index dim() const override { return target_.dim(); }
  double value(const Matrix& x) const override {
    require_dim(x, dim(), name());
    return 0.5 * (x - target_.matrix()).squaredNorm();
  }
  Matrix gradient(const Matrix& x) const override {
    require_dim(x, dim(), name());
    return x - target_.matrix();
  }
  std::optional<OrthogonalMatrix> manifold_minimizer() const override { return target_; }
  std::string_view name() const override { return "procrustes"; }

 private:
  OrthogonalMatrix target_;
};

class RegressionLoss final : public DifferentiableLoss {
 public:
  RegressionLoss(Matrix inputs, Matrix outputs)
      : inputs_(std::move(inputs)), outputs_(std::move(outputs)) {}

  Eigen::Index dim() const override { return inputs_.rows(); }
  double value(const Matrix& w) const override {
    require_dim(w, dim(), name());
    return 0.5 * (w * inputs_ - outputs_).squaredNorm();
  }
  Matrix gradient(const Matrix& w) const override {
    require_dim(w, dim(), name());
    return (w * inputs_ - outputs_) * inputs_.transpose();
  }
  // On O(p), l(W) = const - <W, Y X^T>, maximized alignment at polar(Y X^T).
  std::optional<OrthogonalMatrix> manifold_minimizer() const override {
    try {
      return polar_factor(outputs_ * inputs_.transpose());
    } catch (const SingularInput&) {
      return std::nullopt;
    }
  }
  std::string_view name() const override { return "regression"; }

 private:
  Matrix inputs_;
  Matrix outputs_;
};

class LinearTraceLoss final : public DifferentiableLoss {
 public:
  explicit LinearTraceLoss(Matrix c) : c_(std::move(c)) {}

  Eigen::Index dim() const override { return c_.rows(); }
  double value(const Matrix& w) const override {
    require_dim(w, dim(), name());
    return frobenius_inner(c_, w);
  }
  Matrix gradient(const Matrix& w) const override {
    require_dim(w, dim(), name());
    return c_;
  }
  // <C, W> over O(p) is smallest at the polar factor of -C.
  std::optional<OrthogonalMatrix> manifold_minimizer() const override {
    try {
      return polar_factor(-c_);
    } catch (const SingularInput&) {
      return std::nullopt;
    }
  }
  std::string_view name() const override { return "trace"; }

 private:
  Matrix c_;
};

}  // namespace

LossPtr procrustes_loss(const OrthogonalMatrix& target) {
  require_square_finite(target.matrix(), "procrustes_loss");
  return std::make_shared<ProcrustesLoss>(target);
}

LossPtr regression_loss(const Matrix& inputs, const Matrix& outputs) {
  if (inputs.rows() != outputs.rows() || inputs.cols() != outputs.cols()) {
    throw InvalidInput("regression_loss: X and Y must have the same shape");
  }
  if (inputs.rows() < 1 || inputs.cols() < 1) {
    throw InvalidInput("regression_loss: need p >= 1 and n >= 1");
  }
  if (!inputs.allFinite() || !outputs.allFinite()) {
    throw InvalidInput("regression_loss: non-finite data");
  }
  return std::make_shared<RegressionLoss>(inputs, outputs);
}

LossPtr linear_trace_loss(const Matrix& c) {
  require_square_finite(c, "linear_trace_loss");
  return std::make_shared<LinearTraceLoss>(c);
}

Matrix finite_diff_gradient(const DifferentiableLoss& loss, const Matrix& w, double h) {
  if (!(h > 0.0)) throw InvalidInput("finite_diff_gradient: step must be positive");
  Matrix grad(w.rows(), w.cols());
  Matrix probe = w;
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      const double saved = probe(i, j);
      probe(i, j) = saved + h;
      const double plus = loss.value(probe);
      probe(i, j) = saved - h;
      const double minus = loss.value(probe);
      probe(i, j) = saved;
      grad(i, j) = (plus - minus) / (2.0 * h);
    }
  }
  return grad;
}

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::kProcrustes:
      return "procrustes";
    case LossKind::kRegression:
      return "regression";
    case LossKind::kTrace:
      return "trace";
  }
  return "unknown";
}

LossKind parse_loss_kind(std::string_view name) {
  if (name == "procrustes") return LossKind::kProcrustes;
  if (name == "regression") return LossKind::kRegression;
  if (name == "trace") return LossKind::kTrace;
  throw InvalidInput("unknown loss kind '" + std::string(name) + "'");
}

LossPtr make_loss(const LossSpec& spec, Eigen::Index p, std::uint64_t seed) {
  if (p < 1) throw InvalidInput("make_loss: dimension must be positive");
  Rng rng(seed);
  auto load_square = [p](const std::filesystem::path& path) {
    Matrix m = load_matrix(path);
    if (m.rows() != p) throw InvalidInput(path.string() + ": dimension does not match p");
    return m;
  };

  switch (spec.kind) {
    case LossKind::kProcrustes: {
      if (spec.target_file) return procrustes_loss(OrthogonalMatrix(load_square(*spec.target_file)));
      return procrustes_loss(haar_sample(p, rng));
    }
    case LossKind::kRegression: {
      if (spec.inputs_file || spec.outputs_file) {
        if (!spec.inputs_file || !spec.outputs_file) {
          throw InvalidInput("regression loss needs both inputs and outputs files");
        }
        Matrix x = load_data_matrix(*spec.inputs_file);
        Matrix y = load_data_matrix(*spec.outputs_file);
        if (x.rows() != p) throw InvalidInput("regression inputs: row count does not match p");
        return regression_loss(x, y);
      }
      const Eigen::Index n = spec.samples > 0 ? spec.samples : 4 * p;
      const double scale = 1.0 / std::sqrt(static_cast<double>(n));
      const OrthogonalMatrix truth = haar_sample(p, rng);
      const Matrix x = scale * gaussian_matrix(p, n, rng);
      const Matrix y = truth.matrix() * x + (spec.noise * scale) * gaussian_matrix(p, n, rng);
      return regression_loss(x, y);
    }
    case LossKind::kTrace: {
      if (spec.target_file) return linear_trace_loss(load_square(*spec.target_file));
      return linear_trace_loss(gaussian_matrix(p, p, rng) / std::sqrt(static_cast<double>(p)));
    }
  }
  throw InvalidInput("make_loss: unknown kind");
}

}  // namespace orthonet
