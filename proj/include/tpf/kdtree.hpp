// Copyright 2026 The tpf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "tpf/error.hpp"
#include "tpf/vec3.hpp"

namespace tpf {

/// Nearest point: index into the indexed set and squared distance.
struct Nearest {
  std::uint32_t index = 0;
  double dist2 = std::numeric_limits<double>::infinity();
};

namespace detail {

/// True when (d, i) should replace the current best; equal distances keep the
/// lower index.
inline bool closer(double d, std::uint32_t i, const Nearest& best) {
  return d < best.dist2 || (d == best.dist2 && i < best.index);
}

}  // namespace detail

/// Exhaustive nearest-neighbor search.
inline Nearest nearest_brute_force(std::span<const Vec3> points, const Vec3& q) {
  detail::require(!points.empty(), "nearest neighbor of an empty set");
  Nearest best;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double d = squared_distance(points[i], q);
    if (detail::closer(d, static_cast<std::uint32_t>(i), best)) best = {static_cast<std::uint32_t>(i), d};
  }
  return best;
}

/// Static 3-d tree returning the same neighbor as nearest_brute_force: the
/// minimum squared distance, ties broken toward the lower index.
class KdTree {
 public:
  explicit KdTree(std::vector<Vec3> points) : points_(std::move(points)) {
    detail::require(!points_.empty(), "k-d tree needs at least one point");
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0u);
    axis_.assign(points_.size(), 0);
    build(0, order_.size());
  }

  std::size_t size() const { return points_.size(); }
  const std::vector<Vec3>& points() const { return points_; }

  Nearest nearest(const Vec3& q) const {
    Nearest best;
    search(0, order_.size(), q, best);
    return best;
  }

 private:
  static constexpr std::size_t kLeaf = 8;

  void build(std::size_t lo, std::size_t hi) {
    if (hi - lo <= kLeaf) return;
    Vec3 mn = points_[order_[lo]], mx = mn;
    for (std::size_t i = lo; i < hi; ++i)
      for (int a = 0; a < 3; ++a) {
        mn[a] = std::min(mn[a], points_[order_[i]][a]);
        mx[a] = std::max(mx[a], points_[order_[i]][a]);
      }
    int axis = 0;
    for (int a = 1; a < 3; ++a)
      if (mx[a] - mn[a] > mx[axis] - mn[axis]) axis = a;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(lo), order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(hi), [&](std::uint32_t a, std::uint32_t b) {
                       const double va = points_[a][axis], vb = points_[b][axis];
                       return va < vb || (va == vb && a < b);
                     });
    axis_[mid] = static_cast<std::uint8_t>(axis);
    build(lo, mid);
    build(mid + 1, hi);
  }

  void visit(std::uint32_t i, const Vec3& q, Nearest& best) const {
    const double d = squared_distance(points_[i], q);
    if (detail::closer(d, i, best)) best = {i, d};
  }

  void search(std::size_t lo, std::size_t hi, const Vec3& q, Nearest& best) const {
    if (hi - lo <= kLeaf) {
      for (std::size_t i = lo; i < hi; ++i) visit(order_[i], q, best);
      return;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    const int axis = axis_[mid];
    const std::uint32_t pivot = order_[mid];
    visit(pivot, q, best);
    const double diff = q[axis] - points_[pivot][axis];
    const bool left_first = diff <= 0.0;
    if (left_first) search(lo, mid, q, best);
    else search(mid + 1, hi, q, best);
    // Points on the far side are at least |diff| away along `axis`; an equal
    // distance may still win the index tie-break, hence <=.
    if (diff * diff <= best.dist2) {
      if (left_first) search(mid + 1, hi, q, best);
      else search(lo, mid, q, best);
    }
  }

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<std::uint8_t> axis_;
};

}  // namespace tpf
