// Copyright 2026 The tpf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

/// End-to-end runs: fit, corrupt, filter, extract and evaluate, plus the
/// configuration tree shared by the command-line tool.
///
/// Configuration is a JSON object; every key is optional and unknown keys are
/// rejected:
///   shape, shape_file, seed, grid_n, iso, format,
///   triplane {resolution, channels, hidden, extent},
///   fit {iterations, step_size, decoder_step_size, batch_size,
///        surface_band_fraction, surface_band, color_weight, decay_start,
///        decay_floor, init_scale, seed},
///   noise {patch_count, patch_radius, amplitude, highpass_sigma, seed},
///   kernel {kind, size, sigma_spatial, sigma_range, factor},
///   metrics {samples, voxel_res, seed}
/// `seed` is the global seed; fit, noise and metrics use it unless their own
/// section sets one.

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tpf/artifacts.hpp"
#include "tpf/container.hpp"
#include "tpf/error.hpp"
#include "tpf/extract.hpp"
#include "tpf/filters.hpp"
#include "tpf/fit.hpp"
#include "tpf/mesh_io.hpp"
#include "tpf/metrics.hpp"
#include "tpf/shapes.hpp"
#include "tpf/triplane.hpp"

namespace tpf {

struct PipelineConfig {
  std::string shape = "sphere";
  std::filesystem::path shape_file;  // empty: the bundled corpus
  std::uint64_t seed = 0;
  TriplaneConfig triplane;
  FitConfig fit;
  NoiseSpec noise;
  KernelSpec kernel = KernelSpec::bilateral(3);
  int grid_n = 128;
  double iso = 0.0;
  MetricsConfig metrics;
  MeshFormat format = MeshFormat::Obj;

  void validate() const {
    detail::require(triplane.resolution >= 2 && triplane.channels >= 1 && triplane.hidden >= 0 &&
                        triplane.extent > 0.0,
                    "invalid triplane configuration");
    fit.validate();
    noise.validate();
    kernel.validate();
    detail::require(grid_n >= 2, "grid_n must be >= 2");
    detail::require(std::isfinite(iso), "iso must be finite");
    detail::require(metrics.samples >= 1 && metrics.voxel_res >= 1, "metric budgets must be >= 1");
  }
};

namespace detail {

template <typename T>
void read_key(const nlohmann::json& obj, const char* key, T& out) {
  if (obj.contains(key) && !obj.at(key).is_null()) out = obj.at(key).get<T>();
}

inline void check_keys(const nlohmann::json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) throw ParseError("config: \"" + where + "\" must be an object");
  std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : obj.items())
    if (!allowed.count(k)) throw ParseError("config: unknown key \"" + (where.empty() ? k : where + "." + k) + "\"");
}

}  // namespace detail

/// Applies the keys present in `j` on top of `cfg`.
inline void apply_config_json(PipelineConfig& cfg, const nlohmann::json& j) {
  using detail::check_keys;
  using detail::read_key;
  try {
    check_keys(j, "", {"shape", "shape_file", "seed", "grid_n", "iso", "format", "triplane", "fit", "noise", "kernel",
                       "metrics"});
    read_key(j, "shape", cfg.shape);
    if (j.contains("shape_file")) cfg.shape_file = j.at("shape_file").get<std::string>();
    if (j.contains("seed")) {
      cfg.seed = j.at("seed").get<std::uint64_t>();
      cfg.fit.seed = cfg.noise.seed = cfg.metrics.seed = cfg.seed;
    }
    read_key(j, "grid_n", cfg.grid_n);
    read_key(j, "iso", cfg.iso);
    if (j.contains("format")) cfg.format = parse_mesh_format(j.at("format").get<std::string>());
    if (j.contains("triplane")) {
      const auto& t = j.at("triplane");
      check_keys(t, "triplane", {"resolution", "channels", "hidden", "extent"});
      read_key(t, "resolution", cfg.triplane.resolution);
      read_key(t, "channels", cfg.triplane.channels);
      read_key(t, "hidden", cfg.triplane.hidden);
      read_key(t, "extent", cfg.triplane.extent);
    }
    if (j.contains("fit")) {
      const auto& f = j.at("fit");
      check_keys(f, "fit", {"iterations", "step_size", "decoder_step_size", "batch_size", "surface_band_fraction",
                            "surface_band", "color_weight", "decay_start", "decay_floor", "init_scale", "seed"});
      read_key(f, "iterations", cfg.fit.iterations);
      read_key(f, "step_size", cfg.fit.step_size);
      read_key(f, "decoder_step_size", cfg.fit.decoder_step_size);
      read_key(f, "batch_size", cfg.fit.batch_size);
      read_key(f, "surface_band_fraction", cfg.fit.surface_band_fraction);
      read_key(f, "surface_band", cfg.fit.surface_band);
      read_key(f, "color_weight", cfg.fit.color_weight);
      read_key(f, "decay_start", cfg.fit.decay_start);
      read_key(f, "decay_floor", cfg.fit.decay_floor);
      read_key(f, "init_scale", cfg.fit.init_scale);
      read_key(f, "seed", cfg.fit.seed);
    }
    if (j.contains("noise")) {
      const auto& n = j.at("noise");
      check_keys(n, "noise", {"patch_count", "patch_radius", "amplitude", "highpass_sigma", "seed"});
      read_key(n, "patch_count", cfg.noise.patch_count);
      read_key(n, "patch_radius", cfg.noise.patch_radius);
      read_key(n, "amplitude", cfg.noise.amplitude);
      read_key(n, "highpass_sigma", cfg.noise.highpass_sigma);
      read_key(n, "seed", cfg.noise.seed);
    }
    if (j.contains("kernel")) {
      const auto& k = j.at("kernel");
      check_keys(k, "kernel", {"kind", "size", "sigma_spatial", "sigma_range", "factor"});
      if (k.contains("kind")) cfg.kernel.kind = parse_filter_kind(k.at("kind").get<std::string>());
      read_key(k, "size", cfg.kernel.size);
      if (k.contains("sigma_spatial"))
        cfg.kernel.sigma_spatial =
            k.at("sigma_spatial").is_null() ? std::nullopt : std::optional<double>(k.at("sigma_spatial").get<double>());
      if (k.contains("sigma_range"))
        cfg.kernel.sigma_range =
            k.at("sigma_range").is_null() ? std::nullopt : std::optional<double>(k.at("sigma_range").get<double>());
      read_key(k, "factor", cfg.kernel.factor);
    }
    if (j.contains("metrics")) {
      const auto& m = j.at("metrics");
      check_keys(m, "metrics", {"samples", "voxel_res", "seed"});
      read_key(m, "samples", cfg.metrics.samples);
      read_key(m, "voxel_res", cfg.metrics.voxel_res);
      read_key(m, "seed", cfg.metrics.seed);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
}

inline PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  apply_config_json(base, j);
  return base;
}

inline nlohmann::ordered_json to_json(const PipelineConfig& c) {
  nlohmann::ordered_json j;
  j["shape"] = c.shape;
  j["shape_file"] = c.shape_file.string();
  j["seed"] = c.seed;
  j["grid_n"] = c.grid_n;
  j["iso"] = c.iso;
  j["format"] = to_string(c.format);
  j["triplane"] = {{"resolution", c.triplane.resolution},
                   {"channels", c.triplane.channels},
                   {"hidden", c.triplane.hidden},
                   {"extent", c.triplane.extent}};
  j["fit"] = {{"iterations", c.fit.iterations},
              {"step_size", c.fit.step_size},
              {"decoder_step_size", c.fit.decoder_step_size},
              {"batch_size", c.fit.batch_size},
              {"surface_band_fraction", c.fit.surface_band_fraction},
              {"surface_band", c.fit.surface_band},
              {"color_weight", c.fit.color_weight},
              {"decay_start", c.fit.decay_start},
              {"decay_floor", c.fit.decay_floor},
              {"init_scale", c.fit.init_scale},
              {"seed", c.fit.seed}};
  j["noise"] = {{"patch_count", c.noise.patch_count},
                {"patch_radius", c.noise.patch_radius},
                {"amplitude", c.noise.amplitude},
                {"highpass_sigma", c.noise.highpass_sigma},
                {"seed", c.noise.seed}};
  nlohmann::ordered_json k;
  k["kind"] = to_string(c.kernel.kind);
  k["size"] = c.kernel.size;
  k["sigma_spatial"] = c.kernel.sigma_spatial ? nlohmann::ordered_json(*c.kernel.sigma_spatial) : nlohmann::ordered_json();
  k["sigma_range"] = c.kernel.sigma_range ? nlohmann::ordered_json(*c.kernel.sigma_range) : nlohmann::ordered_json();
  k["factor"] = c.kernel.factor;
  j["kernel"] = k;
  j["metrics"] = {{"samples", c.metrics.samples}, {"voxel_res", c.metrics.voxel_res}, {"seed", c.metrics.seed}};
  return j;
}

/// Shape by name from the configured shape file.
inline AnalyticShape resolve_shape(const PipelineConfig& cfg, const std::filesystem::path& default_library) {
  const auto lib = load_shape_library(cfg.shape_file.empty() ? default_library : cfg.shape_file);
  const AnalyticShape* s = find_shape(lib, cfg.shape);
  if (!s) throw InvalidArgument("unknown shape \"" + cfg.shape + "\"");
  return *s;
}

inline constexpr std::array<const char*, 4> kStageNames = {"clean", "corrupted", "filtered", "filtered_both"};

struct StageResult {
  std::string name;
  TriMesh mesh;
  MetricsReport report;
};

struct PipelineResult {
  FitResult fit;
  Triplane corrupted;
  TriMesh truth;
  std::vector<StageResult> stages;  // kStageNames order
};

/// Stages: (a) clean fit, (b) corrupted, (c) corrupted with filtered geometry
/// and unfiltered colors, (d) corrupted with both paths filtered. Each is
/// compared to marching cubes of the analytic SDF at the same grid_n.
/// `prefit`, when given, replaces the fitting step.
inline PipelineResult run_pipeline(const PipelineConfig& cfg, const AnalyticShape& shape,
                                   const FitResult* prefit = nullptr) {
  cfg.validate();
  PipelineResult r;
  r.fit = prefit ? *prefit : fit_triplane(shape, cfg.fit, cfg.triplane);
  r.corrupted = inject_artifacts(r.fit.triplane, cfg.noise);
  r.truth = extract_analytic(shape, cfg.grid_n, cfg.triplane.extent);
  const FieldDecoder& dec = r.fit.decoder;
  ExtractOptions opts{cfg.grid_n, cfg.iso, ColorSource::Unfiltered};
  ExtractOptions both = opts;
  both.color_source = ColorSource::Filtered;
  std::array<TriMesh, 4> meshes = {extract_mesh(r.fit.triplane, dec, std::nullopt, opts),
                                   extract_mesh(r.corrupted, dec, std::nullopt, opts),
                                   extract_mesh(r.corrupted, dec, cfg.kernel, opts),
                                   extract_mesh(r.corrupted, dec, cfg.kernel, both)};
  for (int s = 0; s < 4; ++s) {
    MetricsReport rep = evaluate_pair(meshes[s], r.truth, cfg.metrics);
    r.stages.push_back({kStageNames[s], std::move(meshes[s]), rep});
  }
  return r;
}

/// Single-variant run used by the ablations: corrupted triplane, optional
/// filter on the geometry path.
inline StageResult run_variant(const std::string& name, const Triplane& corrupted, const FieldDecoder& dec,
                               const std::optional<KernelSpec>& spec, const TriMesh& truth,
                               const PipelineConfig& cfg) {
  TriMesh mesh = extract_mesh(corrupted, dec, spec, {cfg.grid_n, cfg.iso, ColorSource::Unfiltered});
  MetricsReport rep = evaluate_pair(mesh, truth, cfg.metrics);
  return {name, std::move(mesh), rep};
}

/// Records produced files for the manifest.
class OutputLog {
 public:
  explicit OutputLog(std::filesystem::path dir) : dir_(std::move(dir)) { std::filesystem::create_directories(dir_); }

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path path(const std::string& name) const { return dir_ / name; }

  void add(const std::string& name, const std::string& kind) { files_.push_back({{"path", name}, {"kind", kind}}); }

  void write_text(const std::string& name, const std::string& kind, const std::string& text) {
    detail::write_file(path(name), text);
    add(name, kind);
  }

  void write_json(const std::string& name, const std::string& kind, const nlohmann::ordered_json& j) {
    write_text(name, kind, j.dump(2) + "\n");
  }

  void write_mesh(const std::string& stem, const TriMesh& mesh, MeshFormat format) {
    const std::string name = stem + "." + to_string(format);
    export_mesh(mesh, format, path(name));
    add(name, "mesh");
  }

  /// Writes manifest.json listing every file recorded so far.
  void write_manifest(const std::string& command, const nlohmann::ordered_json& config, bool complete,
                      const std::string& error = "") const {
    nlohmann::ordered_json m;
    m["command"] = command;
    m["complete"] = complete;
    if (!error.empty()) m["error"] = error;
    m["config"] = config;
    m["files"] = files_;
    detail::write_file(dir_ / "manifest.json", m.dump(2) + "\n");
  }

 private:
  std::filesystem::path dir_;
  nlohmann::ordered_json files_ = nlohmann::ordered_json::array();
};

inline std::string summary_csv(const std::vector<StageResult>& stages, const char* first_column = "stage") {
  std::string out = std::string(first_column) + "," + kMetricsCsvHeader + "\n";
  for (const auto& s : stages) out += s.name + "," + to_csv_row(s.report) + "\n";
  return out;
}

/// Writes containers, meshes, per-stage reports and summary.csv into `log`.
inline void write_pipeline_outputs(const PipelineResult& r, const PipelineConfig& cfg, OutputLog& log) {
  const auto fitted = encode_container(r.fit.triplane, r.fit.decoder);
  log.write_text("fit.tpln", "container", std::string(fitted.begin(), fitted.end()));
  const auto corrupted = encode_container(r.corrupted, r.fit.decoder);
  log.write_text("corrupted.tpln", "container", std::string(corrupted.begin(), corrupted.end()));
  log.write_mesh("truth", r.truth, cfg.format);
  for (const auto& s : r.stages) {
    log.write_mesh(s.name, s.mesh, cfg.format);
    log.write_json(s.name + ".json", "report", to_json(s.report));
  }
  log.write_text("summary.csv", "summary", summary_csv(r.stages));
}

}  // namespace tpf
