// Copyright 2026 The tpf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

/// Marching cubes over a Grid3.
///
/// Corner layout of cell (i, j, k), with corner c at offsets (dx, dy, dz):
///   0 (0,0,0)  1 (1,0,0)  2 (1,1,0)  3 (0,1,0)
///   4 (0,0,1)  5 (1,0,1)  6 (1,1,1)  7 (0,1,1)
/// Cell edges 0-3 run around the bottom face, 4-7 around the top face and
/// 8-11 are the verticals 0-4, 1-5, 2-6, 3-7.
///
/// A lattice point is inside when value < iso; a value equal to iso counts as
/// outside. Each output vertex sits on one lattice edge, identified by
/// 3 * (index of its lower endpoint) + axis, and vertices are stored in
/// increasing edge-id order.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "tpf/detail/mc_tables.hpp"
#include "tpf/error.hpp"
#include "tpf/mesh.hpp"
#include "tpf/triplane.hpp"

namespace tpf {

namespace detail {

inline constexpr std::array<std::array<int, 3>, 8> kCornerOffset = {{
    {{0, 0, 0}}, {{1, 0, 0}}, {{1, 1, 0}}, {{0, 1, 0}}, {{0, 0, 1}}, {{1, 0, 1}}, {{1, 1, 1}}, {{0, 1, 1}},
}};

inline constexpr std::array<std::array<int, 2>, 12> kEdgeCorners = {{
    {{0, 1}}, {{1, 2}}, {{3, 2}}, {{0, 3}}, {{4, 5}}, {{5, 6}}, {{7, 6}}, {{4, 7}}, {{0, 4}}, {{1, 5}}, {{2, 6}}, {{3, 7}},
}};

}  // namespace detail

inline TriMesh marching_cubes(const Grid3& grid, double iso = 0.0) {
  const int n = grid.n;
  detail::require(n >= 2, "marching_cubes: grid resolution must be >= 2");
  detail::require(grid.values.size() == static_cast<std::size_t>(n) * n * n, "marching_cubes: grid size mismatch");
  detail::require(std::isfinite(iso), "marching_cubes: iso must be finite");
  for (double v : grid.values)
    if (!std::isfinite(v)) throw InvalidArgument("marching_cubes: grid contains a non-finite value");

  const auto inside = [&](std::size_t idx) { return grid.values[idx] < iso; };
  const std::size_t stride[3] = {static_cast<std::size_t>(n) * n, static_cast<std::size_t>(n), 1};

  // Pass 1: one vertex per crossing lattice edge, in edge-id order.
  TriMesh mesh;
  std::vector<std::uint64_t> edge_ids;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const std::size_t a = grid.index(i, j, k);
        const int ijk[3] = {i, j, k};
        for (int axis = 0; axis < 3; ++axis) {
          if (ijk[axis] + 1 >= n) continue;
          const std::size_t b = a + stride[axis];
          if (inside(a) == inside(b)) continue;
          const double va = grid.values[a], vb = grid.values[b];
          const double t = (iso - va) / (vb - va);
          Vec3 p = grid.point(i, j, k);
          const double step = grid.coord(ijk[axis] + 1) - grid.coord(ijk[axis]);
          p[axis] += t * step;
          edge_ids.push_back(3 * static_cast<std::uint64_t>(a) + axis);
          mesh.vertices.push_back(p);
        }
      }

  const auto vertex_of = [&](std::uint64_t id) {
    const auto it = std::lower_bound(edge_ids.begin(), edge_ids.end(), id);
    return static_cast<std::uint32_t>(it - edge_ids.begin());
  };

  // Pass 2: triangles per cell in (i, j, k) order.
  for (int i = 0; i + 1 < n; ++i)
    for (int j = 0; j + 1 < n; ++j)
      for (int k = 0; k + 1 < n; ++k) {
        std::array<std::size_t, 8> corner{};
        int cube = 0;
        for (int c = 0; c < 8; ++c) {
          const auto& o = detail::kCornerOffset[c];
          corner[c] = grid.index(i + o[0], j + o[1], k + o[2]);
          if (inside(corner[c])) cube |= 1 << c;
        }
        if (cube == 0 || cube == 255) continue;
        const auto& tri = detail::kTriangleTable[cube];
        std::array<std::uint32_t, 12> ev{};
        for (int e = 0; e < 12; ++e) {
          const auto& ec = detail::kEdgeCorners[e];
          if (((cube >> ec[0]) & 1) == ((cube >> ec[1]) & 1)) continue;
          const auto& o0 = detail::kCornerOffset[ec[0]];
          const auto& o1 = detail::kCornerOffset[ec[1]];
          const int axis = o0[0] != o1[0] ? 0 : (o0[1] != o1[1] ? 1 : 2);
          ev[e] = vertex_of(3 * static_cast<std::uint64_t>(corner[ec[0]]) + axis);
        }
        for (int t = 0; tri[t] >= 0; t += 3)
          mesh.faces.push_back({ev[tri[t]], ev[tri[t + 2]], ev[tri[t + 1]]});
      }
  return mesh;
}

}  // namespace tpf
