#include "verify/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "orthonet/errors.hpp"
#include "orthonet/linalg.hpp"
#include "orthonet/trainers.hpp"
#include "orthonet/trajectory_io.hpp"

namespace verify {

using namespace orthonet;

namespace {

constexpr std::uint64_t kLossStream = 0;
constexpr std::uint64_t kInitStream = 1;

class Stopwatch {
 public:
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct CellContext {
  std::uint64_t seed;
  LossPtr loss;
  Rng init_rng;
};

CellContext open_cell(const ExperimentConfig& config, long p, std::size_t index) {
  const std::uint64_t cell_seed = stream_seed(config.seed, index);
  const std::uint64_t loss_seed =
      config.loss_seed ? *config.loss_seed : stream_seed(cell_seed, kLossStream);
  return {cell_seed, make_loss(config.loss, p, loss_seed), Rng(stream_seed(cell_seed, kInitStream))};
}

CellParams make_params(const ExperimentConfig& config, long p, std::size_t depth,
                       std::uint64_t seed) {
  CellParams params;
  params.p = p;
  params.depth = depth;
  params.eta = config.step_size();
  params.steps = config.steps;
  params.loss = std::string(to_string(config.loss.kind));
  params.retraction = std::string(to_string(config.retraction));
  params.seed = seed;
  return params;
}

std::filesystem::path artifact_dir(const ExperimentConfig& config) {
  return config.out_dir / std::string(to_string(config.kind));
}

void save_run(const ExperimentConfig& config, const std::string& name, const Trajectory& run) {
  if (!config.write_trajectories) return;
  const auto dir = artifact_dir(config);
  std::filesystem::create_directories(dir);
  save_trajectory_csv(dir / (name + ".csv"), run);
  if (config.checkpoints) save_trajectory_checkpoints(dir / (name + "_checkpoints"), "product", run);
}

double max_layer_defect(const Trajectory& run) {
  double worst = 0.0;
  for (const auto& r : run) worst = std::max({worst, r.max_layer_defect, r.product_defect});
  return worst;
}

// Fills deviation fields from two product trajectories. Controls pass when
// they exceed the threshold.
void score(CellResult& cell, const Trajectory& a, const Trajectory& b) {
  const TrajectoryDeviation dev = compare_trajectories(a, b, cell.threshold);
  cell.deviation = dev.max_deviation;
  cell.worst_step = dev.worst_step;
  cell.first_exceed_step = dev.first_exceed_step;
  const bool within = dev.max_deviation <= cell.threshold;
  cell.pass = !cell.asserted || (cell.control ? !within : within);
  cell.extra["max_orthogonality_defect"] = std::max(max_layer_defect(a), max_layer_defect(b));
}

template <typename Body>
CellResult run_cell(CellResult cell, Body&& body) {
  const Stopwatch watch;
  try {
    body(cell);
  } catch (const DivergedRun& e) {
    cell.diverged = e.what();
    cell.pass = false;
  }
  cell.runtime_ms = watch.elapsed_ms();
  return cell;
}

}  // namespace

NetworkWeights haar_network(long p, std::size_t depth, Rng& rng) {
  std::vector<OrthogonalMatrix> layers;
  layers.reserve(depth);
  for (std::size_t i = 0; i < depth; ++i) layers.push_back(haar_sample(p, rng));
  return NetworkWeights(std::move(layers));
}

NetworkWeights equal_product_network(const NetworkWeights& base, std::size_t target_depth,
                                     DepthConstruction construction, Rng& rng) {
  if (target_depth < base.depth()) {
    throw InvalidInput("equal_product_network: target depth below base depth");
  }
  const std::size_t extra = target_depth - base.depth();
  const Eigen::Index p = base.dim();
  std::vector<OrthogonalMatrix> inserted;
  if (construction == DepthConstruction::kIdentityPadding || extra == 1) {
    inserted.assign(extra, OrthogonalMatrix::identity(p));
  } else if (extra > 1) {
    Matrix acc = Matrix::Identity(p, p);
    for (std::size_t k = 0; k + 1 < extra; ++k) {
      inserted.push_back(haar_sample(p, rng));
      acc = inserted.back().matrix() * acc;
    }
    inserted.push_back(OrthogonalMatrix::trusted(acc.transpose()));
  }
  std::vector<OrthogonalMatrix> layers;
  layers.reserve(target_depth);
  layers.push_back(base.layers().front());
  layers.insert(layers.end(), inserted.begin(), inserted.end());
  layers.insert(layers.end(), base.layers().begin() + 1, base.layers().end());
  return NetworkWeights(std::move(layers));
}

ExperimentReport run_equivalence(const ExperimentConfig& config) {
  config.validate();
  ExperimentReport report{config, {}, {}};
  const TrainOptions options{config.retraction, config.record_stride};
  const double eta = config.step_size();
  // Only the exponential retraction carries an exact product identity.
  const bool asserted = config.retraction == Retraction::kExponential;

  std::size_t index = 0;
  for (long p : config.dims) {
    for (std::size_t depth : config.depths) {
      const std::size_t cell_index = index++;
      CellResult seed_cell;
      seed_cell.threshold = config.threshold;
      seed_cell.asserted = asserted;
      report.cells.push_back(run_cell(std::move(seed_cell), [&](CellResult& cell) {
        CellContext ctx = open_cell(config, p, cell_index);
        cell.label = "p=" + std::to_string(p) + " L=" + std::to_string(depth);
        cell.params = make_params(config, p, depth, ctx.seed);
        const NetworkWeights weights = haar_network(p, depth, ctx.init_rng);
        const Trajectory deep = deep_rgd(weights, *ctx.loss, eta, config.steps, options);
        const Trajectory shallow = shallow_rgd(product(weights), *ctx.loss, eta, config.steps, options);
        score(cell, deep, shallow);
        const std::string stem = "cell_" + std::to_string(cell_index);
        save_run(config, stem + "_deep", deep);
        save_run(config, stem + "_shallow", shallow);
      }));
    }
  }

  if (config.controls) {
    const std::size_t cell_index = index;
    const long p = config.control_dim;
    const std::size_t depth = config.control_depth;
    CellResult seed_cell;
    seed_cell.threshold = config.threshold;
    seed_cell.control = true;
    seed_cell.asserted = asserted;
    report.controls.push_back(run_cell(std::move(seed_cell), [&](CellResult& cell) {
      CellContext ctx = open_cell(config, p, cell_index);
      cell.label = "sequential-update control p=" + std::to_string(p) + " L=" + std::to_string(depth);
      cell.params = make_params(config, p, depth, ctx.seed);
      const NetworkWeights weights = haar_network(p, depth, ctx.init_rng);
      const Trajectory sequential =
          deep_rgd(weights, *ctx.loss, eta, config.steps, options, DeepUpdate::kSequential);
      const Trajectory shallow = shallow_rgd(product(weights), *ctx.loss, eta, config.steps, options);
      score(cell, sequential, shallow);
      save_run(config, "control_sequential", sequential);
      save_run(config, "control_shallow", shallow);
    }));
  }
  return report;
}

ExperimentReport run_depth_independence(const ExperimentConfig& config) {
  config.validate();
  ExperimentReport report{config, {}, {}};
  const TrainOptions options{config.retraction, config.record_stride};
  const double eta = config.step_size();
  const bool asserted = config.retraction == Retraction::kExponential;
  const std::size_t base_depth = config.depths.front();

  std::size_t index = 0;
  for (long p : config.dims) {
    for (std::size_t j = 1; j < config.depths.size(); ++j) {
      const std::size_t other_depth = config.depths[j];
      const std::size_t cell_index = index++;
      CellResult seed_cell;
      seed_cell.threshold = config.threshold;
      seed_cell.asserted = asserted;
      report.cells.push_back(run_cell(std::move(seed_cell), [&](CellResult& cell) {
        CellContext ctx = open_cell(config, p, cell_index);
        cell.label = "p=" + std::to_string(p) + " L=" + std::to_string(base_depth) +
                     " vs L'=" + std::to_string(other_depth);
        cell.params = make_params(config, p, base_depth, ctx.seed);
        cell.params.other_depth = other_depth;
        cell.extra["construction"] = std::string(to_string(config.construction));
        const std::size_t shallower = std::min(base_depth, other_depth);
        const std::size_t deeper = std::max(base_depth, other_depth);
        const NetworkWeights small = haar_network(p, shallower, ctx.init_rng);
        const NetworkWeights large =
            equal_product_network(small, deeper, config.construction, ctx.init_rng);
        const Trajectory a = deep_rgd(small, *ctx.loss, eta, config.steps, options);
        const Trajectory b = deep_rgd(large, *ctx.loss, eta, config.steps, options);
        score(cell, a, b);
        const std::string stem = "cell_" + std::to_string(cell_index);
        save_run(config, stem + "_L" + std::to_string(shallower), a);
        save_run(config, stem + "_L" + std::to_string(deeper), b);
      }));
    }
  }

  if (config.controls) {
    const std::size_t cell_index = index;
    const long p = config.dims.front();
    const std::size_t other_depth = config.depths[1];
    CellResult seed_cell;
    seed_cell.threshold = config.threshold;
    seed_cell.control = true;
    report.controls.push_back(run_cell(std::move(seed_cell), [&](CellResult& cell) {
      CellContext ctx = open_cell(config, p, cell_index);
      cell.label = "mismatched-product control p=" + std::to_string(p) + " L=" +
                   std::to_string(base_depth) + " vs L'=" + std::to_string(other_depth);
      cell.params = make_params(config, p, base_depth, ctx.seed);
      cell.params.other_depth = other_depth;
      const NetworkWeights a_weights = haar_network(p, base_depth, ctx.init_rng);
      const NetworkWeights b_weights = haar_network(p, other_depth, ctx.init_rng);
      const Trajectory a = deep_rgd(a_weights, *ctx.loss, eta, config.steps, options);
      const Trajectory b = deep_rgd(b_weights, *ctx.loss, eta, config.steps, options);
      score(cell, a, b);
      // The dependence is on the product, so the gap must show immediately.
      cell.pass = cell.pass && cell.first_exceed_step && *cell.first_exceed_step <= 1;
      save_run(config, "control_a", a);
      save_run(config, "control_b", b);
    }));
  }
  return report;
}

ExperimentReport run_flow_comparison(const ExperimentConfig& config) {
  config.validate();
  ExperimentReport report{config, {}, {}};
  // Gaps this small carry no order information (stationary start, t_end = 0).
  constexpr double kNegligibleGap = 1e-12;

  std::size_t index = 0;
  for (long p : config.dims) {
    const std::size_t cell_index = index++;
    CellResult seed_cell;
    seed_cell.threshold = config.threshold;
    report.cells.push_back(run_cell(std::move(seed_cell), [&](CellResult& cell) {
      CellContext ctx = open_cell(config, p, cell_index);
      char t_end[32];
      std::snprintf(t_end, sizeof t_end, "%g", config.flow_t_end);
      cell.label = "p=" + std::to_string(p) + " t_end=" + t_end;
      cell.params = make_params(config, p, 1, ctx.seed);
      cell.params.eta = config.flow_etas.back();
      const OrthogonalMatrix pi0 = haar_sample(p, ctx.init_rng);
      const Trajectory flow =
          flow_integrate(pi0, *ctx.loss, config.flow_t_end, config.flow_dt, FlowScheme::kRk4,
                         config.record_stride);
      const Matrix& flow_end = flow.back().product.matrix();
      save_run(config, "cell_" + std::to_string(cell_index) + "_flow", flow);

      std::vector<double> gaps;
      for (double eta : config.flow_etas) {
        const auto steps = static_cast<std::size_t>(std::llround(config.flow_t_end / eta));
        const Trajectory rgd = shallow_rgd(pi0, *ctx.loss, eta, steps,
                                           {config.retraction, config.record_stride});
        gaps.push_back((rgd.back().product.matrix() - flow_end).norm());
      }
      std::vector<double> ratios;
      bool ratios_ok = true;
      const bool negligible = *std::max_element(gaps.begin(), gaps.end()) <= kNegligibleGap;
      for (std::size_t i = 1; i < gaps.size(); ++i) {
        const double r = gaps[i] > 0.0 ? gaps[i - 1] / gaps[i] : 0.0;
        ratios.push_back(r);
        ratios_ok = ratios_ok && r >= config.ratio_low && r <= config.ratio_high;
      }
      // Refinement check on the reference flow itself.
      const Matrix half_dt = flow_integrate(pi0, *ctx.loss, config.flow_t_end,
                                            0.5 * config.flow_dt, FlowScheme::kRk4,
                                            std::numeric_limits<std::size_t>::max())
                                 .back()
                                 .product.matrix();
      cell.deviation = gaps.back();
      cell.pass = negligible || ratios_ok;
      cell.extra["etas"] = config.flow_etas;
      cell.extra["gaps"] = gaps;
      cell.extra["ratios"] = ratios;
      cell.extra["ratio_window"] = {config.ratio_low, config.ratio_high};
      cell.extra["flow_refinement_gap"] = (half_dt - flow_end).norm();
      cell.extra["flow_endpoint_defect"] = flow.back().product_defect;
    }));
  }
  return report;
}

ExperimentReport run_convergence(const ExperimentConfig& config) {
  config.validate();
  ExperimentReport report{config, {}, {}};
  const double eta = config.step_size();

  std::size_t index = 0;
  for (long p : config.dims) {
    const std::size_t cell_index = index++;
    CellResult seed_cell;
    seed_cell.threshold = config.threshold;
    report.cells.push_back(run_cell(std::move(seed_cell), [&](CellResult& cell) {
      CellContext ctx = open_cell(config, p, cell_index);
      cell.label = "p=" + std::to_string(p) + " loss=" + std::string(to_string(config.loss.kind));
      cell.params = make_params(config, p, 1, ctx.seed);
      const auto minimizer = ctx.loss->manifold_minimizer();
      OrthogonalMatrix pi0 = haar_sample(p, ctx.init_rng);
      if (minimizer) pi0 = same_component(pi0, *minimizer);
      const Trajectory run =
          shallow_rgd(pi0, *ctx.loss, eta, config.steps, {config.retraction, config.record_stride});
      save_run(config, "cell_" + std::to_string(cell_index), run);

      bool monotone = true;
      for (std::size_t k = 1; k < run.size(); ++k) {
        const double slack = 1e-12 * std::max(1.0, std::abs(run[k - 1].loss));
        monotone = monotone && run[k].loss <= run[k - 1].loss + slack;
      }
      const TrajectoryRecord& last = run.back();
      cell.deviation = minimizer ? (last.product.matrix() - minimizer->matrix()).norm()
                                 : last.generator_norm;
      cell.worst_step = last.step;
      cell.pass = monotone && cell.deviation <= cell.threshold;
      cell.extra["metric"] = minimizer ? "distance_to_minimizer" : "final_generator_norm";
      cell.extra["monotone_loss"] = monotone;
      cell.extra["initial_loss"] = run.front().loss;
      cell.extra["final_loss"] = last.loss;
      cell.extra["final_generator_norm"] = last.generator_norm;
      cell.extra["max_orthogonality_defect"] = max_layer_defect(run);
    }));
  }
  return report;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  switch (config.kind) {
    case ExperimentKind::kEquivalence:
      return run_equivalence(config);
    case ExperimentKind::kDepth:
      return run_depth_independence(config);
    case ExperimentKind::kFlow:
      return run_flow_comparison(config);
    case ExperimentKind::kConvergence:
      return run_convergence(config);
  }
  throw InvalidInput("run_experiment: unknown experiment");
}

}  // namespace verify
