// Copyright 2026 The tpf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

/// Seeded local high-frequency perturbations of a triplane.
///
/// For every plane and patch, each channel receives its own field
///   amplitude * std(plane) * mask(d) * (n - blur_sigma(n))
/// where n is white Gaussian noise over the whole plane, blur_sigma is the
/// clamp-renormalized Gaussian blur of filters.hpp, d is the distance from the
/// texel center to the patch center (in texels) and
/// mask(d) = (1 + cos(pi d / radius)) / 2 for d < radius, 0 beyond.
/// std(plane) is taken over all channels of the input plane.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <utility>
#include <vector>

#include "tpf/error.hpp"
#include "tpf/filters.hpp"
#include "tpf/rng.hpp"
#include "tpf/triplane.hpp"

namespace tpf {

struct NoiseSpec {
  int patch_count = 4;
  double patch_radius = 12.0;  // texels
  double amplitude = 0.3;      // in units of the plane's feature std
  double highpass_sigma = 1.0;  // texels
  std::uint64_t seed = 0;

  void validate() const {
    detail::require(patch_count >= 0, "noise: patch count must be >= 0");
    detail::require(patch_radius >= 1.0, "noise: patch radius must be >= 1");
    detail::require(std::isfinite(amplitude) && amplitude >= 0.0, "noise: amplitude must be >= 0");
    detail::require(highpass_sigma > 0.0, "noise: high-pass sigma must be > 0");
  }
};

/// Patch centers (col, row) in continuous texel units, per plane.
inline std::array<std::vector<std::pair<double, double>>, 3> artifact_patch_centers(const NoiseSpec& spec,
                                                                                   int resolution) {
  Rng rng(spec.seed, 10);
  std::array<std::vector<std::pair<double, double>>, 3> out;
  for (auto& plane : out)
    for (int k = 0; k < spec.patch_count; ++k) {
      const double cx = rng.uniform() * resolution;
      const double cy = rng.uniform() * resolution;
      plane.emplace_back(cx, cy);
    }
  return out;
}

inline double artifact_mask(double d, double radius) {
  return d < radius ? 0.5 * (1.0 + std::cos(std::numbers::pi * d / radius)) : 0.0;
}

inline Triplane inject_artifacts(const Triplane& tp, const NoiseSpec& spec) {
  spec.validate();
  Triplane out = tp;
  if (spec.amplitude == 0.0 || spec.patch_count == 0) return out;
  const int R = tp.resolution();
  const int C = tp.channels();
  const auto centers = artifact_patch_centers(spec, R);
  const int k = 2 * static_cast<int>(std::ceil(3.0 * spec.highpass_sigma)) + 1;
  KernelSpec blur = KernelSpec::gaussian(k);
  blur.sigma_spatial = spec.highpass_sigma;
  Rng rng(spec.seed, 11);
  for (int a = 0; a < 3; ++a) {
    const Plane& src = tp.plane(a);
    const double scale = spec.amplitude * detail::stddev(src.data);
    Plane& dst = out.plane(a);
    for (const auto& [cx, cy] : centers[a]) {
      Plane noise(R, C);
      for (double& v : noise.data) v = rng.normal();
      const Plane low = filter_gaussian(noise, blur);
      for (int row = 0; row < R; ++row)
        for (int col = 0; col < R; ++col) {
          const double m = artifact_mask(std::hypot(col + 0.5 - cx, row + 0.5 - cy), spec.patch_radius);
          if (m == 0.0) continue;
          for (int c = 0; c < C; ++c) {
            const std::size_t i = noise.index(row, col, c);
            dst.data[i] += scale * m * (noise.data[i] - low.data[i]);
          }
        }
    }
  }
  return out;
}

}  // namespace tpf
