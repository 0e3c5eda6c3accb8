// Copyright 2026 The tpf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

/// Mesh comparison metrics: normalization, surface sampling, Chamfer distance
/// (mean squared nearest-neighbor distance, summed over both directions),
/// normal consistency and lattice Volume IoU.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tpf/error.hpp"
#include "tpf/kdtree.hpp"
#include "tpf/mesh.hpp"
#include "tpf/parallel.hpp"
#include "tpf/rng.hpp"

namespace tpf {

/// Translates the bounding-box center to the origin and scales uniformly so the
/// largest side is 1. A mesh that is already normalized to within 1e-12 is
/// returned unchanged, which makes the operation idempotent.
inline TriMesh normalize_mesh(TriMesh mesh) {
  detail::require(!mesh.vertices.empty(), "normalize_mesh: empty mesh");
  const auto [lo, hi] = bounding_box(mesh);
  const Vec3 center = (lo + hi) * 0.5;
  const double side = std::max({hi.x - lo.x, hi.y - lo.y, hi.z - lo.z});
  detail::require(side > 0.0 && std::isfinite(side), "normalize_mesh: degenerate bounding box");
  if (std::abs(side - 1.0) <= 1e-12 && std::abs(center.x) <= 1e-12 && std::abs(center.y) <= 1e-12 &&
      std::abs(center.z) <= 1e-12)
    return mesh;
  for (auto& v : mesh.vertices) v = (v - center) * (1.0 / side);
  return mesh;
}

struct SurfaceSamples {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;  // unit face normals
};

/// n area-weighted samples: a face is chosen with probability proportional to
/// its area, then a point uniformly inside it (r1 = sqrt(u1), weights
/// (1 - r1, r1 (1 - u2), r1 u2)). Uses Rng(seed, 20).
inline SurfaceSamples sample_surface(const TriMesh& mesh, int n, std::uint64_t seed) {
  detail::require(n >= 1, "sample_surface: n must be >= 1");
  detail::require(!mesh.empty(), "sample_surface: empty mesh");
  std::vector<double> cumulative(mesh.faces.size());
  std::vector<Vec3> face_normal(mesh.faces.size());
  double total = 0.0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const Vec3 c = face_cross(mesh, mesh.faces[f]);
    const double a = 0.5 * norm(c);
    face_normal[f] = a > 0.0 ? c * (0.5 / a) : Vec3{};
    total += a;
    cumulative[f] = total;
  }
  if (!(total > 0.0)) throw InvalidArgument("sample_surface: mesh has zero area");
  Rng rng(seed, 20);
  SurfaceSamples s;
  s.points.reserve(static_cast<std::size_t>(n));
  s.normals.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double target = rng.uniform() * total;
    std::size_t f = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), target) -
                                             cumulative.begin());
    f = std::min(f, cumulative.size() - 1);
    const double r1 = std::sqrt(rng.uniform());
    const double r2 = rng.uniform();
    const Face& tri = mesh.faces[f];
    s.points.push_back(mesh.vertices[tri[0]] * (1.0 - r1) + mesh.vertices[tri[1]] * (r1 * (1.0 - r2)) +
                       mesh.vertices[tri[2]] * (r1 * r2));
    s.normals.push_back(face_normal[f]);
  }
  return s;
}

namespace detail {

inline std::vector<Nearest> nearest_all(const KdTree& tree, const std::vector<Vec3>& queries) {
  std::vector<Nearest> out(queries.size());
  parallel_for(0, queries.size(), [&](std::size_t i) { out[i] = tree.nearest(queries[i]); });
  return out;
}

inline double mean_dist2(const std::vector<Nearest>& nn) {
  double s = 0.0;
  for (const auto& x : nn) s += x.dist2;
  return s / static_cast<double>(nn.size());
}

inline double cosine(const Vec3& a, const Vec3& b) {
  const double den = std::sqrt(dot(a, a) * dot(b, b));
  if (!(den > 0.0)) return 0.0;
  return std::clamp(dot(a, b) / den, -1.0, 1.0);
}

inline double mean_cosine(const SurfaceSamples& from, const SurfaceSamples& to, const std::vector<Nearest>& nn) {
  double s = 0.0;
  for (std::size_t i = 0; i < nn.size(); ++i) s += cosine(from.normals[i], to.normals[nn[i].index]);
  return s / static_cast<double>(nn.size());
}

}  // namespace detail

/// Symmetric Chamfer distance of two sample sets.
inline double chamfer_distance(const SurfaceSamples& a, const SurfaceSamples& b) {
  const KdTree ta(a.points), tb(b.points);
  return detail::mean_dist2(detail::nearest_all(tb, a.points)) + detail::mean_dist2(detail::nearest_all(ta, b.points));
}

inline double chamfer_distance(const TriMesh& a, const TriMesh& b, int n, std::uint64_t seed_a, std::uint64_t seed_b) {
  detail::require(n >= 1, "chamfer_distance: n must be >= 1");
  return chamfer_distance(sample_surface(a, n, seed_a), sample_surface(b, n, seed_b));
}

inline double chamfer_distance(const TriMesh& a, const TriMesh& b, int n, std::uint64_t seed) {
  return chamfer_distance(a, b, n, seed, seed);
}

/// Normal consistency: average of the two directed mean cosines between a
/// sample's normal and the normal of its nearest sample on the other mesh.
inline double normal_consistency(const SurfaceSamples& a, const SurfaceSamples& b) {
  const KdTree ta(a.points), tb(b.points);
  return 0.5 * (detail::mean_cosine(a, b, detail::nearest_all(tb, a.points)) +
                detail::mean_cosine(b, a, detail::nearest_all(ta, b.points)));
}

inline double normal_consistency(const TriMesh& a, const TriMesh& b, int n, std::uint64_t seed_a,
                                 std::uint64_t seed_b) {
  detail::require(n >= 1, "normal_consistency: n must be >= 1");
  return normal_consistency(sample_surface(a, n, seed_a), sample_surface(b, n, seed_b));
}

inline double normal_consistency(const TriMesh& a, const TriMesh& b, int n, std::uint64_t seed) {
  return normal_consistency(a, b, n, seed, seed);
}

inline void require_watertight(const TriMesh& m, const char* which) {
  if (m.empty()) throw InvalidArgument(std::string("volume_iou: ") + which + " mesh is empty");
  if (const auto e = find_open_edge(m))
    throw InvalidArgument(std::string("volume_iou: ") + which + " mesh is not watertight: edge (" +
                          std::to_string(e->a) + ", " + std::to_string(e->b) + ") is used by " +
                          std::to_string(e->face_count) + " face(s)");
}

namespace detail {

/// Lattice occupancy by +x ray parity over one axis-aligned cube.
class OccupancyGrid {
 public:
  OccupancyGrid(const TriMesh& mesh, const Vec3& origin, double side, int res)
      : mesh_(mesh), origin_(origin), h_(side / res), res_(res) {
    // Bin faces by the (y, z) columns their projection may touch, one column
    // of slack for perturbed rays.
    start_.assign(static_cast<std::size_t>(res) * res + 1, 0);
    const auto span = [&](const Face& f, int axis, int& lo, int& hi) {
      double mn = mesh.vertices[f[0]][axis], mx = mn;
      for (int t = 1; t < 3; ++t) {
        mn = std::min(mn, mesh.vertices[f[t]][axis]);
        mx = std::max(mx, mesh.vertices[f[t]][axis]);
      }
      lo = std::max(0, static_cast<int>(std::floor((mn - origin_[axis]) / h_ - 0.5)) - 1);
      hi = std::min(res - 1, static_cast<int>(std::ceil((mx - origin_[axis]) / h_ - 0.5)) + 1);
    };
    for (int pass = 0; pass < 2; ++pass) {
      std::vector<std::size_t> fill;
      if (pass == 1) {
        for (std::size_t c = 1; c < start_.size(); ++c) start_[c] += start_[c - 1];
        faces_.resize(start_.back());
        fill.assign(start_.begin(), start_.end() - 1);
      }
      for (std::size_t fi = 0; fi < mesh.faces.size(); ++fi) {
        int j0, j1, k0, k1;
        span(mesh.faces[fi], 1, j0, j1);
        span(mesh.faces[fi], 2, k0, k1);
        for (int j = j0; j <= j1; ++j)
          for (int k = k0; k <= k1; ++k) {
            const std::size_t c = static_cast<std::size_t>(j) * res + k;
            if (pass == 0) ++start_[c + 1];
            else faces_[fill[c]++] = static_cast<std::uint32_t>(fi);
          }
      }
    }
  }

  double center(int i, int axis) const { return origin_[axis] + (i + 0.5) * h_; }

  /// Occupancy of the res lattice points of column (j, k), written to `out`.
  void column(int j, int k, std::vector<std::uint8_t>& out) const {
    out.assign(static_cast<std::size_t>(res_), 0);
    std::vector<double> xs;
    double y = center(j, 1), z = center(k, 2);
    for (int attempt = 0;; ++attempt) {
      if (attempt > 16) throw Error("volume_iou: ray casting kept hitting degenerate configurations");
      if (attempt > 0) {
        // Deterministic small offsets along irrational directions.
        y = center(j, 1) + h_ * 1e-7 * attempt * 0.7548776662466927;
        z = center(k, 2) + h_ * 1e-7 * attempt * 0.5698402909980532;
      }
      if (crossings(j, k, y, z, xs)) break;
    }
    std::sort(xs.begin(), xs.end());
    for (int i = 0; i < res_; ++i) {
      const double x = center(i, 0);
      const auto above = xs.end() - std::upper_bound(xs.begin(), xs.end(), x);
      out[i] = static_cast<std::uint8_t>(above & 1);
    }
  }

 private:
  /// Edge function of the projected edge (a -> b) at (y, z), computed with the
  /// endpoints in index order so adjacent faces get exactly opposite values.
  double edge(std::uint32_t a, std::uint32_t b, double y, double z) const {
    const bool swap = b < a;
    const Vec3& p = mesh_.vertices[swap ? b : a];
    const Vec3& q = mesh_.vertices[swap ? a : b];
    const double e = (q.y - p.y) * (z - p.z) - (q.z - p.z) * (y - p.y);
    return swap ? -e : e;
  }

  /// Collects ray/face intersection x values; false on a degenerate hit.
  bool crossings(int j, int k, double y, double z, std::vector<double>& xs) const {
    xs.clear();
    const std::size_t c = static_cast<std::size_t>(j) * res_ + k;
    for (std::size_t t = start_[c]; t < start_[c + 1]; ++t) {
      const Face& f = mesh_.faces[faces_[t]];
      const double e0 = edge(f[1], f[2], y, z);
      const double e1 = edge(f[2], f[0], y, z);
      const double e2 = edge(f[0], f[1], y, z);
      const bool pos = e0 > 0 && e1 > 0 && e2 > 0;
      const bool neg = e0 < 0 && e1 < 0 && e2 < 0;
      if (pos || neg) {
        const double s = e0 + e1 + e2;
        xs.push_back((e0 * mesh_.vertices[f[0]].x + e1 * mesh_.vertices[f[1]].x + e2 * mesh_.vertices[f[2]].x) / s);
        continue;
      }
      // On an edge or vertex of this projected face: ambiguous parity.
      const bool any_zero = e0 == 0 || e1 == 0 || e2 == 0;
      const bool others_agree = (e0 >= 0 && e1 >= 0 && e2 >= 0) || (e0 <= 0 && e1 <= 0 && e2 <= 0);
      if (any_zero && others_agree) return false;
    }
    return true;
  }

  const TriMesh& mesh_;
  Vec3 origin_;
  double h_;
  int res_;
  std::vector<std::size_t> start_;
  std::vector<std::uint32_t> faces_;
};

}  // namespace detail

/// IoU of the occupied lattice points of two watertight meshes. The lattice
/// has res^3 cell-centered points over the joint bounding cube (padded by 1%).
inline double volume_iou(const TriMesh& a, const TriMesh& b, int res) {
  detail::require(res >= 1, "volume_iou: res must be >= 1");
  require_watertight(a, "first");
  require_watertight(b, "second");
  const auto [la, ha] = bounding_box(a);
  const auto [lb, hb] = bounding_box(b);
  Vec3 lo, hi;
  for (int k = 0; k < 3; ++k) {
    lo[k] = std::min(la[k], lb[k]);
    hi[k] = std::max(ha[k], hb[k]);
  }
  const Vec3 center = (lo + hi) * 0.5;
  double side = std::max({hi.x - lo.x, hi.y - lo.y, hi.z - lo.z});
  if (!(side > 0.0)) side = 1.0;
  side *= 1.01;
  const Vec3 origin = center - Vec3{side, side, side} * 0.5;
  const detail::OccupancyGrid ga(a, origin, side, res), gb(b, origin, side, res);
  std::vector<std::uint64_t> inter(static_cast<std::size_t>(res), 0), uni(static_cast<std::size_t>(res), 0);
  parallel_for(0, static_cast<std::size_t>(res), [&](std::size_t jj) {
    std::vector<std::uint8_t> ca, cb;
    const int j = static_cast<int>(jj);
    for (int k = 0; k < res; ++k) {
      ga.column(j, k, ca);
      gb.column(j, k, cb);
      for (int i = 0; i < res; ++i) {
        inter[jj] += ca[i] & cb[i];
        uni[jj] += ca[i] | cb[i];
      }
    }
  });
  std::uint64_t I = 0, U = 0;
  for (int j = 0; j < res; ++j) {
    I += inter[j];
    U += uni[j];
  }
  return U == 0 ? 1.0 : static_cast<double>(I) / static_cast<double>(U);
}

struct MetricsConfig {
  int samples = 100000;
  int voxel_res = 128;
  std::uint64_t seed = 0;
};

struct MetricsReport {
  double volume_iou = 0.0;
  double chamfer = 0.0;  // squared-distance convention, unit-box units
  double ncs = 0.0;      // in [-1, 1]
  int samples = 0;
  int voxel_res = 0;
  std::uint64_t seed = 0;

  double chamfer_x1e3() const { return chamfer * 1e3; }
  double ncs_percent() const { return ncs * 100.0; }

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

inline nlohmann::ordered_json to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["volume_iou"] = r.volume_iou;
  j["chamfer_x1e3"] = r.chamfer_x1e3();
  j["ncs_percent"] = r.ncs_percent();
  j["samples"] = r.samples;
  j["voxel_res"] = r.voxel_res;
  j["seed"] = r.seed;
  return j;
}

inline constexpr const char* kMetricsCsvHeader = "volume_iou,chamfer_x1e3,ncs_percent";

inline std::string format_real(double v) {
  return nlohmann::json(v).dump();
}

inline std::string to_csv_row(const MetricsReport& r) {
  return format_real(r.volume_iou) + "," + format_real(r.chamfer_x1e3()) + "," + format_real(r.ncs_percent());
}

/// Normalizes both meshes, then computes all three metrics. Both sides are
/// sampled with the same seed; Chamfer and NCS share samples and neighbors.
inline MetricsReport evaluate_pair(const TriMesh& candidate, const TriMesh& truth, const MetricsConfig& cfg = {}) {
  detail::require(cfg.samples >= 1 && cfg.voxel_res >= 1, "evaluate_pair: invalid metric budgets");
  const TriMesh a = normalize_mesh(candidate);
  const TriMesh b = normalize_mesh(truth);
  const SurfaceSamples sa = sample_surface(a, cfg.samples, cfg.seed);
  const SurfaceSamples sb = sample_surface(b, cfg.samples, cfg.seed);
  const KdTree ta(sa.points), tb(sb.points);
  const auto ab = detail::nearest_all(tb, sa.points);
  const auto ba = detail::nearest_all(ta, sb.points);
  MetricsReport r;
  r.chamfer = detail::mean_dist2(ab) + detail::mean_dist2(ba);
  r.ncs = 0.5 * (detail::mean_cosine(sa, sb, ab) + detail::mean_cosine(sb, sa, ba));
  r.volume_iou = volume_iou(a, b, cfg.voxel_res);
  r.samples = cfg.samples;
  r.voxel_res = cfg.voxel_res;
  r.seed = cfg.seed;
  return r;
}

}  // namespace tpf
