#include "verify/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "orthonet/errors.hpp"

namespace verify {

using nlohmann::json;

namespace {

json optional_json(const std::optional<std::size_t>& v) {
  return v ? json(*v) : json(nullptr);
}

json cell_json(const CellResult& cell) {
  json params = {{"p", cell.params.p},
                 {"L", cell.params.depth},
                 {"eta", cell.params.eta},
                 {"steps", cell.params.steps},
                 {"loss", cell.params.loss},
                 {"retraction", cell.params.retraction},
                 {"seed", cell.params.seed}};
  if (cell.params.other_depth) params["L_other"] = *cell.params.other_depth;
  json out = {{"label", cell.label},
              {"params", params},
              {"deviation", cell.deviation},
              {"threshold", cell.threshold},
              {"pass", cell.pass},
              {"control", cell.control},
              {"asserted", cell.asserted},
              {"worst_step", optional_json(cell.worst_step)},
              {"first_exceed_step", optional_json(cell.first_exceed_step)},
              {"runtime_ms", cell.runtime_ms}};
  if (cell.diverged) out["diverged"] = *cell.diverged;
  for (const auto& [key, value] : cell.extra.items()) out[key] = value;
  return out;
}

json grid_json(const ExperimentConfig& c) {
  json grid = {{"p", c.dims},
               {"depth", c.depths},
               {"eta", c.step_size()},
               {"steps", c.steps},
               {"loss", std::string(orthonet::to_string(c.loss.kind))},
               {"retraction", std::string(orthonet::to_string(c.retraction))},
               {"seed", c.seed},
               {"threshold", c.threshold}};
  if (c.kind == ExperimentKind::kFlow) {
    grid["flow"] = {{"etas", c.flow_etas}, {"t_end", c.flow_t_end}, {"dt", c.flow_dt}};
  }
  if (c.kind == ExperimentKind::kDepth) {
    grid["construction"] = std::string(to_string(c.construction));
  }
  return grid;
}

void print_cell(std::ostream& out, std::string_view experiment, const CellResult& cell) {
  char line[512];
  if (cell.extra.contains("ratios")) {
    // Flow cells are judged on the gap ratios, not on a deviation threshold.
    std::snprintf(line, sizeof line, "%s %s %s max_gap=%.3e ratios=", cell.pass ? "PASS" : "FAIL",
                  std::string(experiment).c_str(), cell.label.c_str(), cell.deviation);
    out << line;
    const auto& ratios = cell.extra["ratios"];
    for (std::size_t i = 0; i < ratios.size(); ++i) {
      std::snprintf(line, sizeof line, "%s%.3f", i ? "," : "", ratios[i].get<double>());
      out << line;
    }
    const auto& window = cell.extra["ratio_window"];
    std::snprintf(line, sizeof line, " window=[%.2f, %.2f]", window[0].get<double>(),
                  window[1].get<double>());
  } else {
    std::snprintf(line, sizeof line, "%s %s %s deviation=%.3e threshold=%.1e",
                  cell.pass ? "PASS" : "FAIL", std::string(experiment).c_str(),
                  cell.label.c_str(), cell.deviation, cell.threshold);
  }
  out << line;
  if (cell.control) out << (cell.pass ? " (control exceeded threshold as expected)" : " (control did not exceed threshold)");
  if (!cell.asserted) out << " (reported only)";
  if (cell.diverged) out << " diverged: " << *cell.diverged;
  if (!cell.control && cell.first_exceed_step) out << " first_exceed_step=" << *cell.first_exceed_step;
  out << '\n';
}

}  // namespace

bool ExperimentReport::all_pass() const {
  const auto ok = [](const CellResult& c) { return c.pass; };
  return std::all_of(cells.begin(), cells.end(), ok) &&
         std::all_of(controls.begin(), controls.end(), ok);
}

bool ExperimentReport::any_diverged() const {
  const auto bad = [](const CellResult& c) { return c.diverged.has_value(); };
  return std::any_of(cells.begin(), cells.end(), bad) ||
         std::any_of(controls.begin(), controls.end(), bad);
}

json to_json(const ExperimentReport& report) {
  json cells = json::array();
  for (const auto& c : report.cells) cells.push_back(cell_json(c));
  json controls = json::array();
  for (const auto& c : report.controls) controls.push_back(cell_json(c));
  return {{"experiment", std::string(to_string(report.config.kind))},
          {"grid", grid_json(report.config)},
          {"cells", cells},
          {"controls", controls},
          {"all_pass", report.all_pass()}};
}

void save_report(const std::filesystem::path& path, const ExperimentReport& report) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw orthonet::InvalidInput("cannot write " + path.string());
  out << to_json(report).dump(2) << '\n';
}

void print_summary(std::ostream& out, const ExperimentReport& report) {
  const auto name = to_string(report.config.kind);
  for (const auto& cell : report.cells) print_cell(out, name, cell);
  for (const auto& cell : report.controls) print_cell(out, name, cell);
  std::size_t passed = 0;
  for (const auto& c : report.cells) passed += c.pass ? 1 : 0;
  out << name << ": " << passed << "/" << report.cells.size() << " cells passed";
  if (!report.controls.empty()) {
    std::size_t ok = 0;
    for (const auto& c : report.controls) ok += c.pass ? 1 : 0;
    out << ", " << ok << "/" << report.controls.size() << " controls behaved as expected";
  }
  out << '\n';
}

}  // namespace verify
