#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "verify/config.hpp"

namespace verify {

struct CellParams {
  long p = 0;
  std::size_t depth = 1;
  std::optional<std::size_t> other_depth;  // depth experiment: the compared depth
  double eta = 0.0;
  std::size_t steps = 0;
  std::string loss;
  std::string retraction;
  std::uint64_t seed = 0;
};

/// Result of one grid cell or control run.
struct CellResult {
  std::string label;
  CellParams params;
  double deviation = 0.0;
  double threshold = 0.0;
  /// Controls are expected to exceed the threshold; `pass` accounts for that.
  bool control = false;
  /// False when the deviation is reported but not held to the threshold.
  bool asserted = true;
  bool pass = false;
  std::optional<std::size_t> worst_step;
  std::optional<std::size_t> first_exceed_step;
  double runtime_ms = 0.0;
  std::optional<std::string> diverged;
  nlohmann::json extra = nlohmann::json::object();
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<CellResult> cells;
  std::vector<CellResult> controls;

  bool all_pass() const;
  bool any_diverged() const;
};

nlohmann::json to_json(const ExperimentReport& report);
void save_report(const std::filesystem::path& path, const ExperimentReport& report);

/// One line per cell and control: PASS/FAIL, parameters, deviation, and the
/// first step over threshold for failures.
void print_summary(std::ostream& out, const ExperimentReport& report);

}  // namespace verify
