#include "verify/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gtest/gtest.h"

namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "verify");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = verify::cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("orthonet_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  return nlohmann::json::parse(in);
}

TEST(Cli, EquivalencePassesAndWritesReport) {
  const fs::path out = scratch_dir("equivalence");
  const CliRun r = run({"equivalence", "--p", "2,3", "--depth", "1,2", "--steps", "20",
                        "--out", out.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("4/4 cells passed"), std::string::npos) << r.out;
  const auto report = read_json(out / "report.json");
  EXPECT_EQ(report["experiment"], "equivalence");
  EXPECT_EQ(report["cells"].size(), 4u);
  EXPECT_TRUE(report["all_pass"].get<bool>());
  EXPECT_EQ(report["grid"]["steps"], 20);
}

TEST(Cli, ZeroStepsIsTrivialPass) {
  const fs::path out = scratch_dir("zero_steps");
  const CliRun r = run({"equivalence", "--p", "2", "--depth", "1", "--steps", "0", "--out",
                        out.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_json(out / "report.json")["cells"][0]["deviation"], 0.0);
}

TEST(Cli, FailingCellExitsOne) {
  // A threshold of zero cannot be met once rounding enters a deep run.
  const fs::path out = scratch_dir("failing");
  const CliRun r = run({"equivalence", "--p", "6", "--depth", "4", "--steps", "30",
                        "--threshold", "1e-300", "--out", out.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("FAIL"), std::string::npos);
  EXPECT_NE(r.out.find("first_exceed_step="), std::string::npos);
  EXPECT_FALSE(read_json(out / "report.json")["all_pass"].get<bool>());
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"equivalence", "--bogus"}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"equivalence", "--retraction", "newton"}).code, 2);
  EXPECT_EQ(run({"equivalence", "--loss", "hinge"}).code, 2);
  EXPECT_EQ(run({"equivalence", "--eta", "-0.1"}).code, 2);
  EXPECT_EQ(run({"depth", "--depth", "3"}).code, 2);
  EXPECT_EQ(run({"equivalence", "--preset", "desk"}).code, 2);
  EXPECT_EQ(run({"equivalence", "--config", "/nonexistent.json"}).code, 2);
  const CliRun r = run({"equivalence", "--steps", "many"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--steps"), std::string::npos);
}

TEST(Cli, ConfigFileWithFlagOverride) {
  const fs::path out = scratch_dir("config");
  const fs::path config = out / "config.json";
  std::ofstream(config) << R"({"p": [3], "depth": [2], "steps": 50, "seed": 4})";
  const CliRun r = run({"equivalence", "--config", config.string(), "--steps", "10", "--out",
                        out.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  const auto report = read_json(out / "report.json");
  EXPECT_EQ(report["grid"]["steps"], 10);
  EXPECT_EQ(report["grid"]["seed"], 4);
  EXPECT_EQ(report["cells"].size(), 1u);
}

TEST(Cli, DepthAndFlowAndConvergence) {
  const fs::path out = scratch_dir("kinds");
  EXPECT_EQ(run({"depth", "--steps", "40", "--controls", "--out", (out / "d").string()}).code, 0);
  EXPECT_EQ(read_json(out / "d" / "report.json")["controls"].size(), 1u);
  EXPECT_EQ(run({"flow", "--out", (out / "f").string()}).code, 0);
  EXPECT_EQ(run({"convergence", "--out", (out / "c").string()}).code, 0);
}

TEST(Cli, CheckpointsAreWritten) {
  const fs::path out = scratch_dir("checkpoints");
  ASSERT_EQ(run({"equivalence", "--p", "2", "--depth", "2", "--steps", "4", "--checkpoint",
                 "--out", out.string()}).code, 0);
  std::size_t text_files = 0;
  for (const auto& entry : fs::recursive_directory_iterator(out)) {
    if (entry.path().extension() == ".txt") ++text_files;
  }
  EXPECT_GE(text_files, 5u);
}

}  // namespace
