// Copyright 2026 The tpf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

/// Dual-path mesh extraction: geometry from the (optionally) filtered triplane,
/// vertex colors from the unfiltered one.

#include <optional>
#include <vector>

#include "tpf/error.hpp"
#include "tpf/filters.hpp"
#include "tpf/marching_cubes.hpp"
#include "tpf/mesh.hpp"
#include "tpf/parallel.hpp"
#include "tpf/shapes.hpp"
#include "tpf/triplane.hpp"

namespace tpf {

/// Which triplane vertex colors are decoded from.
enum class ColorSource { Unfiltered, Filtered };

struct ExtractOptions {
  int grid_n = 128;
  double iso = 0.0;
  ColorSource color_source = ColorSource::Unfiltered;
};

/// Decodes vertex colors of `mesh` from `tp`.
inline void color_vertices(TriMesh& mesh, const Triplane& tp, const FieldDecoder& dec) {
  mesh.colors.assign(mesh.vertices.size(), Rgb{});
  parallel_for(0, mesh.vertices.size(), [&](std::size_t i) {
    std::vector<double> f(static_cast<std::size_t>(tp.channels())), h(static_cast<std::size_t>(dec.hidden()));
    detail::eval_features_into(tp, mesh.vertices[i], f);
    mesh.colors[i] = detail::color_head(detail::head_input(f, dec, h), dec);
  });
}

/// Mesh of the decoded field. With a spec, geometry comes from
/// modulate_triplane(tp, spec); colors come from `tp` unless
/// opts.color_source asks for the filtered planes. Without a spec both paths
/// use `tp`.
inline TriMesh extract_mesh(const Triplane& tp, const FieldDecoder& dec, const std::optional<KernelSpec>& spec,
                            const ExtractOptions& opts = {}) {
  const Triplane filtered = spec ? modulate_triplane(tp, *spec) : tp;
  TriMesh mesh = marching_cubes(eval_sdf_grid(filtered, dec, opts.grid_n), opts.iso);
  color_vertices(mesh, opts.color_source == ColorSource::Unfiltered ? tp : filtered, dec);
  return compute_vertex_normals(std::move(mesh));
}

/// analytic_sdf sampled on the same lattice as eval_sdf_grid.
inline Grid3 analytic_sdf_grid(const AnalyticShape& shape, int n, double extent = 0.5) {
  detail::require(n >= 2, "analytic_sdf_grid: n must be >= 2");
  Grid3 g(n, extent);
  parallel_for(0, static_cast<std::size_t>(n), [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) g.at(i, j, k) = analytic_sdf(shape, g.point(i, j, k));
  });
  return g;
}

/// Ground-truth mesh: marching cubes on the analytic SDF with analytic colors.
inline TriMesh extract_analytic(const AnalyticShape& shape, int n, double extent = 0.5) {
  TriMesh mesh = marching_cubes(analytic_sdf_grid(shape, n, extent), 0.0);
  mesh.colors.resize(mesh.vertices.size());
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) mesh.colors[i] = analytic_color(shape, mesh.vertices[i]);
  return compute_vertex_normals(std::move(mesh));
}

}  // namespace tpf
