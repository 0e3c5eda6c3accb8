// Copyright 2026 The tpf Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: fit, corrupt, filter, extract, eval, pipeline,
// ablate, bench. Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "tpf/tpf.hpp"

namespace fs = std::filesystem;
using tpf::PipelineConfig;

namespace {

/// Bad flags, unknown names or invalid configuration; maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const fs::path kDefaultCorpus = fs::path(TPF_DATA_DIR) / "corpus.json";

struct Options {
  CLI::App* app = nullptr;
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  std::string in;
  std::string shape;
  std::string shape_file;
  std::string kernel;
  int ksize = 3;
  double sigma_s = 0.0;
  double sigma_r = 0.0;
  int factor = 2;
  int grid_n = 128;
  std::string format;
  double iso = 0.0;
  int iterations = 0;
  int resolution = 0;
  double amplitude = 0.0;
  int patches = 0;
  double radius = 0.0;
  std::uint64_t noise_seed = 0;
  int samples = 0;
  int voxel_res = 0;

  bool has(const std::string& name) const {
    const CLI::Option* o = app->get_option_no_throw(name);
    return o != nullptr && o->count() > 0;
  }
};

void add_config_flags(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "JSON config file; flags override its values")->check(CLI::ExistingFile);
  sub->add_option("--seed", o.seed, "Global seed (fit, noise and metrics)");
  sub->add_option("--shape-file", o.shape_file, "Shape library (default: bundled corpus)")->check(CLI::ExistingFile);
  sub->add_option("--iterations", o.iterations, "Fit iterations");
  sub->add_option("--resolution", o.resolution, "Triplane resolution R");
  sub->add_option("--grid-n", o.grid_n, "Marching-cubes lattice size n");
  sub->add_option("--iso", o.iso, "Iso level");
  sub->add_option("--format", o.format, "Mesh format")->check(CLI::IsMember({"obj", "ply"}));
  sub->add_option("--samples", o.samples, "Surface samples per mesh for Chamfer/NCS");
  sub->add_option("--voxel-res", o.voxel_res, "Volume IoU lattice resolution");
}

void add_kernel_flags(CLI::App* sub, Options& o, bool allow_none) {
  std::vector<std::string> kinds = {"bilinear", "gaussian", "bilateral"};
  if (allow_none) kinds.push_back("none");
  sub->add_option("--kernel", o.kernel, "Filter kind")->check(CLI::IsMember(kinds));
  sub->add_option("--ksize", o.ksize, "Odd kernel size k");
  sub->add_option("--sigma-s", o.sigma_s, "Spatial sigma in texels (default k/3)");
  sub->add_option("--sigma-r", o.sigma_r, "Range sigma (default half the channel std)");
  sub->add_option("--factor", o.factor, "Bilinear downscale factor");
}

void add_noise_flags(CLI::App* sub, Options& o) {
  sub->add_option("--amplitude", o.amplitude, "Artifact amplitude in units of plane std");
  sub->add_option("--patches", o.patches, "Artifact patches per plane");
  sub->add_option("--radius", o.radius, "Artifact patch radius in texels");
  sub->add_option("--noise-seed", o.noise_seed, "Seed of the artifact noise only");
}

/// Config file, then flags on top.
PipelineConfig build_config(const Options& o) {
  PipelineConfig c;
  try {
    if (!o.config.empty()) c = tpf::load_config(o.config);
  } catch (const tpf::Error& e) {
    throw UsageError(e.what());
  }
  if (o.has("--seed")) {
    c.seed = o.seed;
    c.fit.seed = c.noise.seed = c.metrics.seed = o.seed;
  }
  if (o.has("--shape")) c.shape = o.shape;
  if (o.has("--shape-file")) c.shape_file = o.shape_file;
  if (o.has("--iterations")) c.fit.iterations = o.iterations;
  if (o.has("--resolution")) c.triplane.resolution = o.resolution;
  if (o.has("--grid-n")) c.grid_n = o.grid_n;
  if (o.has("--iso")) c.iso = o.iso;
  if (o.has("--format")) c.format = tpf::parse_mesh_format(o.format);
  if (o.has("--samples")) c.metrics.samples = o.samples;
  if (o.has("--voxel-res")) c.metrics.voxel_res = o.voxel_res;
  if (o.has("--kernel") && o.kernel != "none") c.kernel.kind = tpf::parse_filter_kind(o.kernel);
  if (o.has("--ksize")) c.kernel.size = o.ksize;
  if (o.has("--sigma-s")) c.kernel.sigma_spatial = o.sigma_s;
  if (o.has("--sigma-r")) c.kernel.sigma_range = o.sigma_r;
  if (o.has("--factor")) c.kernel.factor = o.factor;
  if (o.has("--amplitude")) c.noise.amplitude = o.amplitude;
  if (o.has("--patches")) c.noise.patch_count = o.patches;
  if (o.has("--radius")) c.noise.patch_radius = o.radius;
  if (o.has("--noise-seed")) c.noise.seed = o.noise_seed;
  try {
    c.validate();
  } catch (const tpf::InvalidArgument& e) {
    throw UsageError(std::string("invalid configuration: ") + e.what());
  }
  return c;
}

tpf::ShapeLibrary load_library(const PipelineConfig& c) {
  try {
    return tpf::load_shape_library(c.shape_file.empty() ? kDefaultCorpus : c.shape_file);
  } catch (const tpf::Error& e) {
    throw UsageError(e.what());
  }
}

tpf::AnalyticShape lookup_shape(const tpf::ShapeLibrary& lib, const std::string& name) {
  const tpf::AnalyticShape* s = tpf::find_shape(lib, name);
  if (s == nullptr) {
    std::string names;
    for (const auto& [n, shape] : lib) names += (names.empty() ? "" : ", ") + n;
    throw UsageError("unknown shape \"" + name + "\" (available: " + names + ")");
  }
  return *s;
}

/// Shapes selected by --shape; "all" expands to the whole library.
std::vector<std::pair<std::string, tpf::AnalyticShape>> select_shapes(const PipelineConfig& c) {
  const auto lib = load_library(c);
  if (c.shape == "all") return lib;
  return {{c.shape, lookup_shape(lib, c.shape)}};
}

tpf::FieldModel read_model(const std::string& path) {
  if (path.empty()) throw UsageError("--in is required");
  return tpf::read_container(path);
}

fs::path sidecar(const fs::path& out, const std::string& tag) {
  fs::path p = out;
  return p.replace_extension("." + tag + ".json");
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) { tpf::detail::write_file(path, j.dump(2) + "\n"); }

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

nlohmann::ordered_json files_json(std::initializer_list<std::pair<std::string, std::string>> files) {
  nlohmann::ordered_json a = nlohmann::ordered_json::array();
  for (const auto& [path, kind] : files) a.push_back({{"path", path}, {"kind", kind}});
  return a;
}

// ---------------------------------------------------------------------------

int cmd_fit(const Options& o) {
  const PipelineConfig c = build_config(o);
  const tpf::AnalyticShape shape = lookup_shape(load_library(c), c.shape);
  const fs::path out = o.out;
  ensure_parent(out);
  const tpf::FitResult fit = tpf::fit_triplane(shape, c.fit, c.triplane);
  tpf::write_container(out, fit.triplane, fit.decoder);
  const double rmse = tpf::sdf_fit_error(fit.triplane, fit.decoder, shape, 100000, c.fit.seed);
  nlohmann::ordered_json log;
  log["command"] = "fit";
  log["shape"] = c.shape;
  log["iterations"] = fit.iterations;
  log["seed"] = c.fit.seed;
  log["final_loss"] = fit.final_loss;
  log["final_batch_sdf_rmse"] = fit.final_sdf_rmse;
  log["sdf_rmse"] = rmse;
  log["config"] = tpf::to_json(c);
  const fs::path log_path = sidecar(out, "fit");
  log["files"] = files_json({{out.filename().string(), "container"}, {log_path.filename().string(), "log"}});
  write_json(log_path, log);
  std::cout << c.shape << ": sdf rmse " << rmse << " after " << fit.iterations << " iterations -> " << out.string()
            << "\n";
  return 0;
}

int cmd_corrupt(const Options& o) {
  const PipelineConfig c = build_config(o);
  const tpf::FieldModel m = read_model(o.in);
  const tpf::Triplane out_tp = tpf::inject_artifacts(m.triplane, c.noise);
  const fs::path out = o.out;
  ensure_parent(out);
  tpf::write_container(out, out_tp, m.decoder);
  nlohmann::ordered_json log;
  log["command"] = "corrupt";
  log["input"] = o.in;
  log["noise"] = tpf::to_json(c)["noise"];
  log["laplacian_energy_before"] = tpf::laplacian_energy(m.triplane);
  log["laplacian_energy_after"] = tpf::laplacian_energy(out_tp);
  const fs::path log_path = sidecar(out, "corrupt");
  log["files"] = files_json({{out.filename().string(), "container"}, {log_path.filename().string(), "log"}});
  write_json(log_path, log);
  std::cout << log.dump(2) << "\n";
  return 0;
}

int cmd_filter(const Options& o) {
  const PipelineConfig c = build_config(o);
  const tpf::FieldModel m = read_model(o.in);
  const tpf::Triplane out_tp = tpf::modulate_triplane(m.triplane, c.kernel);
  const fs::path out = o.out;
  ensure_parent(out);
  tpf::write_container(out, out_tp, m.decoder);
  nlohmann::ordered_json log;
  log["command"] = "filter";
  log["input"] = o.in;
  log["kernel"] = tpf::to_json(c)["kernel"];
  log["laplacian_energy_before"] = tpf::laplacian_energy(m.triplane);
  log["laplacian_energy_after"] = tpf::laplacian_energy(out_tp);
  const fs::path log_path = sidecar(out, "filter");
  log["files"] = files_json({{out.filename().string(), "container"}, {log_path.filename().string(), "log"}});
  write_json(log_path, log);
  std::cout << log.dump(2) << "\n";
  return 0;
}

int cmd_extract(const Options& o, const std::string& color_source) {
  PipelineConfig c = build_config(o);
  const tpf::FieldModel m = read_model(o.in);
  const fs::path out = o.out;
  tpf::MeshFormat format = c.format;
  if (o.has("--format")) format = tpf::parse_mesh_format(o.format);
  else if (out.has_extension()) {
    try {
      format = tpf::mesh_format_from_path(out);
    } catch (const tpf::InvalidArgument& e) {
      throw UsageError(e.what());
    }
  }
  std::optional<tpf::KernelSpec> spec;
  if (o.has("--kernel") && o.kernel != "none") spec = c.kernel;
  const tpf::ExtractOptions opts{c.grid_n, c.iso,
                                 color_source == "filtered" ? tpf::ColorSource::Filtered : tpf::ColorSource::Unfiltered};
  const tpf::TriMesh mesh = tpf::extract_mesh(m.triplane, m.decoder, spec, opts);
  ensure_parent(out);
  tpf::export_mesh(mesh, format, out);
  nlohmann::ordered_json log;
  log["command"] = "extract";
  log["input"] = o.in;
  log["grid_n"] = c.grid_n;
  log["iso"] = c.iso;
  log["kernel"] = spec ? tpf::to_json(c)["kernel"] : nlohmann::ordered_json();
  log["color_source"] = color_source;
  log["vertices"] = mesh.vertices.size();
  log["faces"] = mesh.faces.size();
  log["watertight"] = tpf::is_watertight(mesh);
  const fs::path log_path = sidecar(out, "extract");
  log["files"] = files_json({{out.filename().string(), "mesh"}, {log_path.filename().string(), "log"}});
  write_json(log_path, log);
  std::cout << mesh.vertices.size() << " vertices, " << mesh.faces.size() << " faces -> " << out.string() << "\n";
  return 0;
}

int cmd_eval(const Options& o, const std::string& candidate, const std::string& truth_path) {
  const PipelineConfig c = build_config(o);
  const tpf::TriMesh cand = tpf::import_mesh(candidate);
  tpf::TriMesh truth;
  if (!truth_path.empty()) truth = tpf::import_mesh(truth_path);
  else if (o.has("--shape")) truth = tpf::extract_analytic(lookup_shape(load_library(c), c.shape), c.grid_n);
  else throw UsageError("eval needs --truth or --shape");
  nlohmann::ordered_json j = tpf::to_json(tpf::evaluate_pair(cand, truth, c.metrics));
  if (!o.out.empty()) {
    ensure_parent(o.out);
    write_json(o.out, j);
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

/// One pipeline run into `dir`; the manifest is marked incomplete on failure.
tpf::PipelineResult run_one(const PipelineConfig& c, const tpf::AnalyticShape& shape, const fs::path& dir) {
  tpf::OutputLog log(dir);
  try {
    tpf::PipelineResult r = tpf::run_pipeline(c, shape);
    tpf::write_pipeline_outputs(r, c, log);
    log.write_manifest("pipeline", tpf::to_json(c), true);
    return r;
  } catch (const std::exception& e) {
    log.write_manifest("pipeline", tpf::to_json(c), false, e.what());
    throw;
  }
}

int cmd_pipeline(const Options& o) {
  const PipelineConfig c = build_config(o);
  const auto shapes = select_shapes(c);
  const fs::path out = o.out;
  if (c.shape != "all") {
    const auto t0 = std::chrono::steady_clock::now();
    const tpf::PipelineResult r = run_one(c, shapes.front().second, out);
    std::cout << tpf::summary_csv(r.stages);
    std::cerr << "pipeline finished in "
              << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s\n";
    return 0;
  }
  tpf::OutputLog top(out);
  std::string csv = std::string("shape,stage,") + tpf::kMetricsCsvHeader + "\n";
  try {
    for (const auto& [name, shape] : shapes) {
      PipelineConfig sc = c;
      sc.shape = name;
      const tpf::PipelineResult r = run_one(sc, shape, out / name);
      for (const auto& s : r.stages) csv += name + "," + s.name + "," + tpf::to_csv_row(s.report) + "\n";
      top.add(name + "/manifest.json", "manifest");
    }
    top.write_text("corpus_summary.csv", "summary", csv);
    top.write_manifest("pipeline", tpf::to_json(c), true);
  } catch (const std::exception& e) {
    top.write_manifest("pipeline", tpf::to_json(c), false, e.what());
    throw;
  }
  std::cout << csv;
  return 0;
}

int cmd_ablate(const Options& o, const std::string& axis) {
  const PipelineConfig c = build_config(o);
  const auto shapes = select_shapes(c);
  tpf::OutputLog log(o.out);
  std::string csv = std::string("shape,variant,") + tpf::kMetricsCsvHeader + "\n";
  try {
    for (const auto& [name, shape] : shapes) {
      const tpf::FitResult fit = tpf::fit_triplane(shape, c.fit, c.triplane);
      const tpf::Triplane corrupted = tpf::inject_artifacts(fit.triplane, c.noise);
      const tpf::TriMesh truth = tpf::extract_analytic(shape, c.grid_n, c.triplane.extent);
      std::vector<std::pair<std::string, std::optional<tpf::KernelSpec>>> variants = {{"none", std::nullopt}};
      if (axis == "filter-kind") {
        for (tpf::FilterKind kind : {tpf::FilterKind::Bilinear, tpf::FilterKind::Gaussian, tpf::FilterKind::Bilateral}) {
          tpf::KernelSpec s = c.kernel;
          s.kind = kind;
          variants.emplace_back(tpf::to_string(kind), s);
        }
      } else {
        for (int k : {1, 3, 5, 9, 15}) {
          tpf::KernelSpec s = c.kernel;
          s.kind = tpf::FilterKind::Bilateral;
          s.size = k;
          variants.emplace_back("bilateral_k" + std::to_string(k), s);
        }
      }
      for (const auto& [variant, spec] : variants) {
        const tpf::StageResult r = tpf::run_variant(variant, corrupted, fit.decoder, spec, truth, c);
        csv += name + "," + variant + "," + tpf::to_csv_row(r.report) + "\n";
        std::cerr << name << " " << variant << ": ncs " << r.report.ncs_percent() << "%\n";
      }
    }
    log.write_text("ablation.csv", "summary", csv);
    nlohmann::ordered_json cfg = tpf::to_json(c);
    cfg["axis"] = axis;
    log.write_manifest("ablate", cfg, true);
  } catch (const std::exception& e) {
    log.write_manifest("ablate", tpf::to_json(c), false, e.what());
    throw;
  }
  std::cout << csv;
  return 0;
}

template <typename F>
double median_seconds(int repeats, F&& f) {
  std::vector<double> t;
  for (int i = 0; i < repeats; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    t.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  std::sort(t.begin(), t.end());
  return t[t.size() / 2];
}

int cmd_bench(const Options& o, int repeats, bool quick) {
  if (repeats < 1) throw UsageError("--repeats must be >= 1");
  const int channels = 8;
  nlohmann::ordered_json j;
  j["threads"] = tpf::thread_count();
  j["repeats"] = repeats;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  const std::vector<int> resolutions = quick ? std::vector<int>{32, 64} : std::vector<int>{64, 128, 256};
  for (int R : resolutions)
    for (int k : {3, 9}) {
      tpf::Rng rng(static_cast<std::uint64_t>(R * 100 + k), 30);
      tpf::Plane p(R, channels);
      for (double& v : p.data) v = rng.normal();
      const tpf::KernelSpec spec = tpf::KernelSpec::bilateral(k);
      volatile double sink = 0.0;
      const double ref = median_seconds(repeats, [&] { sink = sink + tpf::filter_bilateral_reference(p, spec).data[0]; });
      const double opt = median_seconds(repeats, [&] { sink = sink + tpf::filter_bilateral(p, spec).data[0]; });
      const double texels = static_cast<double>(R) * R * channels;
      rows.push_back({{"resolution", R},
                      {"kernel", k},
                      {"channels", channels},
                      {"reference_s", ref},
                      {"optimized_s", opt},
                      {"speedup", ref / opt},
                      {"reference_texels_per_s", texels / ref},
                      {"optimized_texels_per_s", texels / opt}});
    }
  j["bilateral"] = rows;

  const int points = quick ? 10000 : 100000;
  const int brute_queries = quick ? 200 : 1000;
  tpf::Rng rng(7, 31);
  std::vector<tpf::Vec3> pts(static_cast<std::size_t>(points)), queries(static_cast<std::size_t>(points));
  for (auto& p : pts) p = {rng.uniform(), rng.uniform(), rng.uniform()};
  for (auto& q : queries) q = {rng.uniform(), rng.uniform(), rng.uniform()};
  std::optional<tpf::KdTree> tree;
  const double build = median_seconds(repeats, [&] { tree.emplace(pts); });
  volatile double sink = 0.0;
  const double query = median_seconds(repeats, [&] {
    for (const auto& q : queries) sink = sink + tree->nearest(q).dist2;
  });
  const double brute = median_seconds(repeats, [&] {
    for (int i = 0; i < brute_queries; ++i) sink = sink + tpf::nearest_brute_force(pts, queries[i]).dist2;
  });
  const double kd_qps = points / query, brute_qps = brute_queries / brute;
  j["nearest"] = {{"points", points},
                  {"queries", points},
                  {"kdtree_build_s", build},
                  {"kdtree_query_s", query},
                  {"kdtree_queries_per_s", kd_qps},
                  {"brute_force_queries", brute_queries},
                  {"brute_force_s", brute},
                  {"brute_force_queries_per_s", brute_qps},
                  {"speedup", kd_qps / brute_qps}};
  const std::string text = j.dump(2) + "\n";
  if (!o.out.empty()) {
    ensure_parent(o.out);
    tpf::detail::write_file(o.out, text);
  }
  std::cout << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Triplane frequency filtering: fit, corrupt, filter, extract and evaluate analytic shapes"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "tpf 1.0.0");

  Options fit, corrupt, filter, extract, eval, pipeline, ablate, bench;
  std::string color_source = "unfiltered", candidate, truth, axis = "filter-kind";
  int repeats = 3;
  bool quick = false;

  CLI::App* s_fit = app.add_subcommand("fit", "Fit a triplane to a corpus shape and write a container");
  fit.app = s_fit;
  add_config_flags(s_fit, fit);
  s_fit->add_option("--shape", fit.shape, "Shape name");
  s_fit->add_option("--out", fit.out, "Output container (.tpln)")->required();

  CLI::App* s_corrupt = app.add_subcommand("corrupt", "Inject local high-frequency artifacts into a container");
  corrupt.app = s_corrupt;
  add_config_flags(s_corrupt, corrupt);
  add_noise_flags(s_corrupt, corrupt);
  s_corrupt->add_option("--in", corrupt.in, "Input container")->required();
  s_corrupt->add_option("--out", corrupt.out, "Output container")->required();

  CLI::App* s_filter = app.add_subcommand("filter", "Filter every channel of a container's planes");
  filter.app = s_filter;
  add_config_flags(s_filter, filter);
  add_kernel_flags(s_filter, filter, false);
  s_filter->add_option("--in", filter.in, "Input container")->required();
  s_filter->add_option("--out", filter.out, "Output container")->required();

  CLI::App* s_extract = app.add_subcommand("extract", "Extract a colored mesh (geometry optionally filtered)");
  extract.app = s_extract;
  add_config_flags(s_extract, extract);
  add_kernel_flags(s_extract, extract, true);
  s_extract->add_option("--in", extract.in, "Input container")->required();
  s_extract->add_option("--out", extract.out, "Output mesh (.obj or .ply)")->required();
  s_extract->add_option("--color-source", color_source, "Triplane queried for vertex colors")
      ->check(CLI::IsMember({"unfiltered", "filtered"}));

  CLI::App* s_eval = app.add_subcommand("eval", "Compare a mesh to a reference mesh or analytic shape");
  eval.app = s_eval;
  add_config_flags(s_eval, eval);
  s_eval->add_option("--candidate", candidate, "Mesh to evaluate")->required()->check(CLI::ExistingFile);
  s_eval->add_option("--truth", truth, "Reference mesh")->check(CLI::ExistingFile);
  s_eval->add_option("--shape", eval.shape, "Reference shape (marching cubes at --grid-n)");
  s_eval->add_option("--out", eval.out, "Report JSON path");

  CLI::App* s_pipeline = app.add_subcommand("pipeline", "Fit, corrupt, filter, extract and evaluate");
  pipeline.app = s_pipeline;
  add_config_flags(s_pipeline, pipeline);
  add_kernel_flags(s_pipeline, pipeline, false);
  add_noise_flags(s_pipeline, pipeline);
  s_pipeline->add_option("--shape", pipeline.shape, "Shape name or \"all\"");
  s_pipeline->add_option("--out", pipeline.out, "Output directory")->required();

  CLI::App* s_ablate = app.add_subcommand("ablate", "Compare filter kinds or bilateral kernel sizes");
  ablate.app = s_ablate;
  add_config_flags(s_ablate, ablate);
  add_kernel_flags(s_ablate, ablate, false);
  add_noise_flags(s_ablate, ablate);
  s_ablate->add_option("--shape", ablate.shape, "Shape name or \"all\"");
  s_ablate->add_option("--axis", axis, "Ablation axis")->check(CLI::IsMember({"filter-kind", "kernel-size"}));
  s_ablate->add_option("--out", ablate.out, "Output directory")->required();

  CLI::App* s_bench = app.add_subcommand("bench", "Time bilateral filters and nearest-neighbor search");
  bench.app = s_bench;
  s_bench->add_option("--out", bench.out, "Also write the JSON report here");
  s_bench->add_option("--repeats", repeats, "Timed repetitions (median reported)");
  s_bench->add_flag("--quick", quick, "Smaller problem sizes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (s_fit->parsed()) return cmd_fit(fit);
    if (s_corrupt->parsed()) return cmd_corrupt(corrupt);
    if (s_filter->parsed()) return cmd_filter(filter);
    if (s_extract->parsed()) return cmd_extract(extract, color_source);
    if (s_eval->parsed()) return cmd_eval(eval, candidate, truth);
    if (s_pipeline->parsed()) return cmd_pipeline(pipeline);
    if (s_ablate->parsed()) return cmd_ablate(ablate, axis);
    if (s_bench->parsed()) return cmd_bench(bench, repeats, quick);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\nRun with --help for usage.\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
