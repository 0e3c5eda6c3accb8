// Copyright 2026 The tpf Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>

#include "helpers.hpp"
#include "tpf/tpf.hpp"

namespace tpf {
namespace {

namespace fs = std::filesystem;

const std::string kSmall = "--resolution 16 --iterations 60 --grid-n 24 --samples 2000 --voxel-res 24";

int run(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + TPF_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, UsageErrorsExitTwo) {
  const fs::path dir = test::temp_dir("cli_usage");
  EXPECT_EQ(run("", dir / "log"), 2);
  EXPECT_EQ(run("frobnicate", dir / "log"), 2);
  EXPECT_EQ(run("fit --shape nosuchshape --out " + (dir / "a.tpln").string(), dir / "log"), 2);
  EXPECT_NE(detail::read_file(dir / "log").find("nosuchshape"), std::string::npos);
  EXPECT_EQ(run("filter --kernel median --in x --out y", dir / "log"), 2);
  EXPECT_EQ(run("fit --shape sphere --iterations 0 --out " + (dir / "a.tpln").string(), dir / "log"), 2);
  EXPECT_EQ(run("--help", dir / "log"), 0);
}

TEST(Cli, MissingInputExitsOne) {
  const fs::path dir = test::temp_dir("cli_missing");
  EXPECT_EQ(run("filter --in " + (dir / "none.tpln").string() + " --out " + (dir / "b.tpln").string(), dir / "log"),
            1);
}

TEST(Cli, FitIsDeterministicAndLogged) {
  const fs::path dir = test::temp_dir("cli_fit");
  const std::string base = "fit --shape sphere --seed 3 " + kSmall + " --out ";
  ASSERT_EQ(run(base + (dir / "a.tpln").string(), dir / "log"), 0) << detail::read_file(dir / "log");
  ASSERT_EQ(run(base + (dir / "b.tpln").string(), dir / "log"), 0);
  EXPECT_EQ(detail::read_file(dir / "a.tpln"), detail::read_file(dir / "b.tpln"));
  const FieldModel m = read_container(dir / "a.tpln");
  EXPECT_EQ(m.triplane.resolution(), 16);
  const auto log = nlohmann::json::parse(detail::read_file(dir / "a.fit.json"));
  EXPECT_EQ(log["shape"], "sphere");
  EXPECT_EQ(log["iterations"], 60);
  EXPECT_EQ(log["seed"], 3);
  EXPECT_TRUE(log["sdf_rmse"].is_number());
}

TEST(Cli, FileCommandsChain) {
  const fs::path dir = test::temp_dir("cli_chain");
  const auto p = [&](const char* name) { return (dir / name).string(); };
  ASSERT_EQ(run("fit --shape torus " + kSmall + " --out " + p("fit.tpln"), dir / "log"), 0);
  ASSERT_EQ(run("corrupt --in " + p("fit.tpln") + " --out " + p("bad.tpln") + " --amplitude 0.5 --radius 4",
                dir / "log"),
            0)
      << detail::read_file(dir / "log");
  const auto corrupt = nlohmann::json::parse(detail::read_file(dir / "bad.corrupt.json"));
  EXPECT_GT(corrupt["laplacian_energy_after"].get<double>(), corrupt["laplacian_energy_before"].get<double>());
  ASSERT_EQ(run("filter --in " + p("bad.tpln") + " --out " + p("good.tpln") + " --kernel gaussian --ksize 5",
                dir / "log"),
            0);
  const auto filtered = nlohmann::json::parse(detail::read_file(dir / "good.filter.json"));
  EXPECT_LT(filtered["laplacian_energy_after"].get<double>(), filtered["laplacian_energy_before"].get<double>());
  ASSERT_EQ(run("extract --in " + p("bad.tpln") + " --out " + p("mesh.ply") + " --kernel bilateral --grid-n 24",
                dir / "log"),
            0)
      << detail::read_file(dir / "log");
  const TriMesh mesh = import_mesh(dir / "mesh.ply");
  EXPECT_FALSE(mesh.faces.empty());
  EXPECT_EQ(mesh.colors.size(), mesh.vertices.size());
  ASSERT_EQ(run("eval --candidate " + p("mesh.ply") + " --shape torus --grid-n 24 --samples 2000 --voxel-res 24 --out " +
                    p("report.json"),
                dir / "log"),
            0)
      << detail::read_file(dir / "log");
  const auto report = nlohmann::json::parse(detail::read_file(dir / "report.json"));
  EXPECT_GT(report["volume_iou"].get<double>(), 0.0);
  EXPECT_LE(report["volume_iou"].get<double>(), 1.0);
  EXPECT_EQ(run("extract --in " + p("bad.tpln") + " --out " + p("mesh.stl"), dir / "log"), 2);
}

TEST(Cli, PipelineWritesManifest) {
  const fs::path dir = test::temp_dir("cli_pipeline");
  ASSERT_EQ(run("pipeline --config " + std::string(TPF_CONFIG_DIR) + "/quick.json --out " + (dir / "run").string(),
                dir / "log"),
            0)
      << detail::read_file(dir / "log");
  const auto manifest = nlohmann::json::parse(detail::read_file(dir / "run" / "manifest.json"));
  EXPECT_TRUE(manifest["complete"].get<bool>());
  EXPECT_EQ(manifest["config"]["shape"], "torus");
  for (const auto& f : manifest["files"]) EXPECT_TRUE(fs::exists(dir / "run" / f["path"].get<std::string>()));
  EXPECT_TRUE(fs::exists(dir / "run" / "summary.csv"));
}

TEST(Cli, FailedPipelineMarksManifestIncomplete) {
  // Underfit: the field stays negative at the lattice boundary, so a mesh is open.
  const fs::path dir = test::temp_dir("cli_pipeline_fail");
  ASSERT_EQ(run("pipeline --config " + std::string(TPF_CONFIG_DIR) + "/quick.json " + kSmall + " --out " +
                    (dir / "run").string(),
                dir / "log"),
            1);
  const auto manifest = nlohmann::json::parse(detail::read_file(dir / "run" / "manifest.json"));
  EXPECT_FALSE(manifest["complete"].get<bool>());
  EXPECT_NE(manifest["error"].get<std::string>().find("watertight"), std::string::npos);
}

TEST(Cli, AblateWritesTable) {
  const fs::path dir = test::temp_dir("cli_ablate");
  ASSERT_EQ(run("ablate --shape sphere --axis kernel-size " + kSmall + " --out " + dir.string(), dir / "log"), 0)
      << detail::read_file(dir / "log");
  const std::string csv = detail::read_file(dir / "ablation.csv");
  EXPECT_EQ(csv.rfind("shape,variant,volume_iou,chamfer_x1e3,ncs_percent\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
  EXPECT_NE(csv.find("sphere,bilateral_k15,"), std::string::npos);
}

TEST(Cli, BenchReportsJson) {
  const fs::path dir = test::temp_dir("cli_bench");
  ASSERT_EQ(run("bench --quick --repeats 1 --out " + (dir / "bench.json").string(), dir / "log"), 0)
      << detail::read_file(dir / "log");
  const auto j = nlohmann::json::parse(detail::read_file(dir / "bench.json"));
  EXPECT_EQ(j["bilateral"].size(), 4u);
  EXPECT_GT(j["nearest"]["kdtree_queries_per_s"].get<double>(), 0.0);
}

}  // namespace
}  // namespace tpf
