#include "verify/cli.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "orthonet/errors.hpp"
#include "verify/config.hpp"
#include "verify/experiments.hpp"
#include "verify/report.hpp"

namespace verify {
namespace {

constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

// Flag values as given on the command line; unset ones leave the config alone.
struct Flags {
  std::string config_file;
  std::string preset;
  std::vector<long> dims;
  std::vector<std::size_t> depths;
  std::optional<double> eta;
  std::optional<std::size_t> steps;
  std::string loss;
  std::string retraction;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<double> threshold;
  std::vector<double> flow_etas;
  std::optional<double> t_end;
  std::optional<double> dt;
  std::string construction;
  std::optional<std::size_t> record_stride;
  bool controls = false;
  bool no_controls = false;
  bool checkpoints = false;
};

void add_flags(CLI::App& cmd, Flags& f) {
  cmd.add_option("--config", f.config_file, "JSON config file; flags override its values");
  cmd.add_option("--preset", f.preset, "Named grid (paper)")->check(CLI::IsMember({"paper"}));
  cmd.add_option("--p", f.dims, "Comma-separated matrix dimensions")->delimiter(',');
  cmd.add_option("--depth", f.depths, "Comma-separated network depths")->delimiter(',');
  cmd.add_option("--eta", f.eta, "Step size");
  cmd.add_option("--steps", f.steps, "Number of descent steps");
  cmd.add_option("--loss", f.loss, "procrustes|regression|trace");
  cmd.add_option("--retraction", f.retraction, "exp|cayley|projection");
  cmd.add_option("--seed", f.seed, "Master seed");
  cmd.add_option("--out", f.out, "Output directory");
  cmd.add_option("--threshold", f.threshold, "Pass threshold on the deviation");
  cmd.add_option("--etas", f.flow_etas, "Flow: decreasing step sizes")->delimiter(',');
  cmd.add_option("--t-end", f.t_end, "Flow: integration horizon");
  cmd.add_option("--dt", f.dt, "Flow: RK4 reference step");
  cmd.add_option("--construction", f.construction, "Depth: pad|split");
  cmd.add_option("--record-stride", f.record_stride, "Record every N steps");
  cmd.add_flag("--controls", f.controls, "Run negative controls (default with --preset paper)");
  cmd.add_flag("--no-controls", f.no_controls, "Skip negative-control runs");
  cmd.add_flag("--checkpoint", f.checkpoints, "Write product matrices per recorded step");
}

ExperimentConfig build_config(ExperimentKind kind, const Flags& f) {
  ExperimentConfig c = f.preset == "paper" ? paper_preset(kind) : default_config(kind);
  if (!f.config_file.empty()) merge_config_file(c, f.config_file);
  if (!f.dims.empty()) c.dims = f.dims;
  if (!f.depths.empty()) c.depths = f.depths;
  if (f.eta) c.eta = *f.eta;
  if (f.steps) c.steps = *f.steps;
  if (!f.loss.empty()) c.loss.kind = orthonet::parse_loss_kind(f.loss);
  if (!f.retraction.empty()) c.retraction = orthonet::parse_retraction(f.retraction);
  if (f.seed) c.seed = *f.seed;
  if (!f.out.empty()) c.out_dir = f.out;
  if (f.threshold) c.threshold = *f.threshold;
  if (!f.flow_etas.empty()) c.flow_etas = f.flow_etas;
  if (f.t_end) c.flow_t_end = *f.t_end;
  if (f.dt) c.flow_dt = *f.dt;
  if (!f.construction.empty()) c.construction = parse_depth_construction(f.construction);
  if (f.record_stride) c.record_stride = *f.record_stride;
  if (f.controls) c.controls = true;
  if (f.no_controls) c.controls = false;
  if (f.checkpoints) c.checkpoints = true;
  c.validate();
  return c;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Certify deep-vs-shallow training equivalence on the orthogonal group", "verify"};
  app.require_subcommand(1);
  Flags flags;
  const std::vector<std::pair<ExperimentKind, std::string>> commands = {
      {ExperimentKind::kEquivalence, "Deep vs shallow product trajectories"},
      {ExperimentKind::kDepth, "Equal-product networks of different depths"},
      {ExperimentKind::kFlow, "Discrete descent against the gradient flow"},
      {ExperimentKind::kConvergence, "Shallow descent to the closed-form minimizer"},
  };
  for (const auto& [kind, description] : commands) {
    add_flags(*app.add_subcommand(std::string(to_string(kind)), description), flags);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << app.help();
    return kExitUsage;
  }

  ExperimentKind kind = ExperimentKind::kEquivalence;
  for (const auto& [k, description] : commands) {
    if (app.got_subcommand(std::string(to_string(k)))) kind = k;
  }

  ExperimentConfig config;
  try {
    config = build_config(kind, flags);
  } catch (const orthonet::InvalidInput& e) {
    err << "verify: " << e.what() << '\n';
    return kExitUsage;
  }

  ExperimentReport report;
  try {
    report = run_experiment(config);
    save_report(config.out_dir / "report.json", report);
  } catch (const orthonet::InvalidInput& e) {
    err << "verify: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "verify: " << e.what() << '\n';
    return kExitFail;
  }

  print_summary(out, report);
  out << "report: " << (config.out_dir / "report.json").string() << '\n';
  return report.all_pass() && !report.any_diverged() ? 0 : kExitFail;
}

}  // namespace verify
