// Copyright 2026 The tpf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tpf/error.hpp"
#include "tpf/vec3.hpp"

namespace tpf {

using Face = std::array<std::uint32_t, 3>;

/// Indexed triangle mesh. Faces wind counter-clockwise seen from outside.
/// `colors` and `normals` are either empty or one entry per vertex.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;
  std::vector<Rgb> colors;
  std::vector<Vec3> normals;

  bool empty() const { return faces.empty(); }
  bool has_colors() const { return !colors.empty(); }
  bool has_normals() const { return !normals.empty(); }

  friend bool operator==(const TriMesh&, const TriMesh&) = default;
};

inline Vec3 face_cross(const TriMesh& m, const Face& f) {
  return cross(m.vertices[f[1]] - m.vertices[f[0]], m.vertices[f[2]] - m.vertices[f[0]]);
}

inline double face_area(const TriMesh& m, const Face& f) { return 0.5 * norm(face_cross(m, f)); }

inline double surface_area(const TriMesh& m) {
  double a = 0.0;
  for (const auto& f : m.faces) a += face_area(m, f);
  return a;
}

/// Throws InvalidArgument describing the first violated mesh invariant.
inline void validate_mesh(const TriMesh& m) {
  const std::size_t nv = m.vertices.size();
  for (std::size_t i = 0; i < nv; ++i)
    if (!is_finite(m.vertices[i])) throw InvalidArgument("vertex " + std::to_string(i) + " is not finite");
  for (std::size_t i = 0; i < m.faces.size(); ++i) {
    const Face& f = m.faces[i];
    for (auto v : f)
      if (v >= nv)
        throw InvalidArgument("face " + std::to_string(i) + " references vertex " + std::to_string(v) +
                              " but the mesh has " + std::to_string(nv) + " vertices");
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2])
      throw InvalidArgument("face " + std::to_string(i) + " repeats a vertex index");
  }
  if (m.has_colors() && m.colors.size() != nv) throw InvalidArgument("color count does not match vertex count");
  if (m.has_normals()) {
    if (m.normals.size() != nv) throw InvalidArgument("normal count does not match vertex count");
    for (std::size_t i = 0; i < nv; ++i)
      if (std::abs(norm(m.normals[i]) - 1.0) > 1e-6)
        throw InvalidArgument("normal " + std::to_string(i) + " is not unit length");
  }
}

inline constexpr Vec3 kFallbackNormal{0.0, 0.0, 1.0};

/// Area-weighted vertex normals. Vertices with no incident area receive
/// kFallbackNormal; their indices are appended to `flagged` when given.
inline TriMesh compute_vertex_normals(TriMesh mesh, std::vector<std::uint32_t>* flagged = nullptr) {
  std::vector<Vec3> acc(mesh.vertices.size());
  for (const auto& f : mesh.faces) {
    const Vec3 n = face_cross(mesh, f);  // length = 2 * area
    for (auto v : f) acc[v] += n;
  }
  mesh.normals.resize(acc.size());
  for (std::size_t i = 0; i < acc.size(); ++i) {
    const double len = norm(acc[i]);
    if (len > 0.0 && std::isfinite(len)) {
      mesh.normals[i] = acc[i] * (1.0 / len);
    } else {
      mesh.normals[i] = kFallbackNormal;
      if (flagged) flagged->push_back(static_cast<std::uint32_t>(i));
    }
  }
  return mesh;
}

/// Reverses every face winding and negates stored normals.
inline TriMesh flip_faces(TriMesh mesh) {
  for (auto& f : mesh.faces) std::swap(f[1], f[2]);
  for (auto& n : mesh.normals) n = -n;
  return mesh;
}

/// Undirected edge used by more or fewer than two faces.
struct OpenEdge {
  std::uint32_t a;
  std::uint32_t b;
  int face_count;
};

/// First edge (in sorted order) not shared by exactly two faces, if any.
inline std::optional<OpenEdge> find_open_edge(const TriMesh& m) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  edges.reserve(m.faces.size() * 3);
  for (const auto& f : m.faces)
    for (int k = 0; k < 3; ++k) {
      const auto a = f[k], b = f[(k + 1) % 3];
      edges.emplace_back(std::min(a, b), std::max(a, b));
    }
  std::sort(edges.begin(), edges.end());
  for (std::size_t i = 0; i < edges.size();) {
    std::size_t j = i;
    while (j < edges.size() && edges[j] == edges[i]) ++j;
    if (j - i != 2) return OpenEdge{edges[i].first, edges[i].second, static_cast<int>(j - i)};
    i = j;
  }
  return std::nullopt;
}

inline bool is_watertight(const TriMesh& m) { return !m.empty() && !find_open_edge(m).has_value(); }

/// Axis-aligned bounds of the vertices; requires a non-empty vertex list.
inline std::pair<Vec3, Vec3> bounding_box(const TriMesh& m) {
  detail::require(!m.vertices.empty(), "bounding box of an empty mesh");
  Vec3 lo = m.vertices.front(), hi = lo;
  for (const auto& v : m.vertices)
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], v[a]);
      hi[a] = std::max(hi[a], v[a]);
    }
  return {lo, hi};
}

}  // namespace tpf
