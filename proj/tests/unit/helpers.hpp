// Copyright 2026 The tpf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tpf/fit.hpp"
#include "tpf/mesh.hpp"
#include "tpf/rng.hpp"
#include "tpf/shapes.hpp"
#include "tpf/triplane.hpp"

namespace tpf::test {

inline Plane random_plane(int R, int C, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed, 99);
  Plane p(R, C);
  for (double& v : p.data) v = scale * rng.normal();
  return p;
}

inline Triplane random_triplane(int R, int C, std::uint64_t seed, double scale = 1.0) {
  return Triplane({random_plane(R, C, seed, scale), random_plane(R, C, seed + 1000, scale),
                   random_plane(R, C, seed + 2000, scale)},
                  0.5);
}

inline FieldDecoder random_decoder(int C, int H, std::uint64_t seed) {
  Rng rng(seed, 98);
  FieldDecoder d(C, H);
  for (double& v : d.params()) v = 0.5 * rng.normal();
  return d;
}

inline std::filesystem::path corpus_path() { return std::filesystem::path(TPF_DATA_DIR) / "corpus.json"; }

inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("tpf_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Small, fast fit configuration for tests that only need a plausible field.
inline FitConfig quick_fit(int iterations = 300) {
  FitConfig f;
  f.iterations = iterations;
  f.batch_size = 1024;
  return f;
}

inline TriplaneConfig small_triplane(int R = 32) {
  TriplaneConfig t;
  t.resolution = R;
  t.channels = 4;
  t.hidden = 8;
  return t;
}

/// Unit-radius icosphere with `levels` midpoint subdivisions, outward faces.
inline TriMesh icosphere(int levels) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  TriMesh m;
  m.vertices = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& v : m.vertices) v = normalized(v);
  m.faces = {{0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
             {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8},
             {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};
  for (int l = 0; l < levels; ++l) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> mid;
    const auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
      const auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      m.vertices.push_back(normalized(m.vertices[a] + m.vertices[b]));
      const auto id = static_cast<std::uint32_t>(m.vertices.size() - 1);
      mid.emplace(key, id);
      return id;
    };
    std::vector<Face> next;
    for (const Face& f : m.faces) {
      const std::uint32_t a = midpoint(f[0], f[1]), b = midpoint(f[1], f[2]), c = midpoint(f[2], f[0]);
      next.push_back({f[0], a, c});
      next.push_back({f[1], b, a});
      next.push_back({f[2], c, b});
      next.push_back({a, b, c});
    }
    m.faces = std::move(next);
  }
  return m;
}

/// Axis-aligned closed box mesh with outward faces.
inline TriMesh box_mesh(Vec3 lo, Vec3 hi) {
  TriMesh m;
  for (int i = 0; i < 8; ++i)
    m.vertices.push_back({(i & 1) ? hi.x : lo.x, (i & 2) ? hi.y : lo.y, (i & 4) ? hi.z : lo.z});
  m.faces = {{0, 2, 3}, {0, 3, 1}, {4, 5, 7}, {4, 7, 6}, {0, 1, 5}, {0, 5, 4},
             {2, 6, 7}, {2, 7, 3}, {0, 4, 6}, {0, 6, 2}, {1, 3, 7}, {1, 7, 5}};
  return m;
}

}  // namespace tpf::test
