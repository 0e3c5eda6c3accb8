// Copyright 2026 The tpf Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "helpers.hpp"
#include "tpf/artifacts.hpp"
#include "tpf/filters.hpp"

namespace tpf {
namespace {

double max_abs_diff(const Plane& a, const Plane& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) m = std::max(m, std::abs(a.data[i] - b.data[i]));
  return m;
}

// Direct 2D convolution with a Gaussian window, renormalized over in-bounds taps.
Plane naive_gaussian(const Plane& p, int k, double sigma) {
  const int R = p.resolution, C = p.channels, r = k / 2;
  Plane out(R, C);
  for (int c = 0; c < C; ++c)
    for (int y = 0; y < R; ++y)
      for (int x = 0; x < R; ++x) {
        double num = 0, den = 0;
        for (int dy = -r; dy <= r; ++dy)
          for (int dx = -r; dx <= r; ++dx) {
            if (y + dy < 0 || y + dy >= R || x + dx < 0 || x + dx >= R) continue;
            const double w = std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
            num += w * p.at(y + dy, x + dx, c);
            den += w;
          }
        out.at(y, x, c) = num / den;
      }
  return out;
}

Plane transpose(const Plane& p) {
  Plane t(p.resolution, p.channels);
  for (int y = 0; y < p.resolution; ++y)
    for (int x = 0; x < p.resolution; ++x)
      for (int c = 0; c < p.channels; ++c) t.at(x, y, c) = p.at(y, x, c);
  return t;
}

Plane rotate180(const Plane& p) {
  const int R = p.resolution;
  Plane t(R, p.channels);
  for (int y = 0; y < R; ++y)
    for (int x = 0; x < R; ++x)
      for (int c = 0; c < p.channels; ++c) t.at(R - 1 - y, R - 1 - x, c) = p.at(y, x, c);
  return t;
}

std::vector<KernelSpec> all_specs() {
  KernelSpec b = KernelSpec::bilateral(5);
  b.sigma_range = 0.7;
  return {KernelSpec::gaussian(3), KernelSpec::gaussian(9), KernelSpec::bilateral(3), KernelSpec::bilateral(9), b,
          KernelSpec::bilinear(2),  KernelSpec::bilinear(4)};
}

TEST(GaussianKernel, Degenerate) {
  EXPECT_EQ(gaussian_kernel_1d(1, 0.3), std::vector<double>{1.0});
  EXPECT_EQ(gaussian_kernel_1d(1, 5.0), std::vector<double>{1.0});
}

TEST(GaussianKernel, ThreeTaps) {
  const auto w = gaussian_kernel_1d(3, 1.0);
  ASSERT_EQ(w.size(), 3u);
  EXPECT_NEAR(w[0], 0.27406, 1e-5);
  EXPECT_NEAR(w[1], 0.45186, 1e-5);
  EXPECT_NEAR(w[2], 0.27406, 1e-5);
}

TEST(GaussianKernel, NineTapsSymmetricUnimodal) {
  const auto w = gaussian_kernel_1d(9, 3.0);
  double sum = 0;
  for (double v : w) sum += v;
  EXPECT_NEAR(sum, 1.0, 1e-15);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(w[i], w[8 - i]);
    EXPECT_LT(w[i], w[i + 1]);
  }
}

TEST(GaussianKernel, RejectsBadArguments) {
  EXPECT_THROW(gaussian_kernel_1d(4, 1.0), InvalidArgument);
  EXPECT_THROW(gaussian_kernel_1d(3, 0.0), InvalidArgument);
  EXPECT_THROW(gaussian_kernel_1d(0, 1.0), InvalidArgument);
}

TEST(FilterGaussian, ImpulseResponseIsKernelOuterProduct) {
  Plane p(9, 1);
  p.at(4, 4, 0) = 1.0;
  KernelSpec s = KernelSpec::gaussian(3);
  s.sigma_spatial = 1.0;
  const Plane out = filter_gaussian(p, s);
  const auto w = gaussian_kernel_1d(3, 1.0);
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 9; ++x) {
      const bool in = std::abs(y - 4) <= 1 && std::abs(x - 4) <= 1;
      const double expect = in ? w[y - 3] * w[x - 3] : 0.0;
      EXPECT_NEAR(out.at(y, x, 0), expect, 1e-15);
    }
}

TEST(FilterGaussian, MatchesNaiveConvolution) {
  for (int k : {3, 5, 9}) {
    const Plane p = test::random_plane(32, 2, 100 + k);
    const Plane out = filter_gaussian(p, KernelSpec::gaussian(k));
    EXPECT_LE(max_abs_diff(out, naive_gaussian(p, k, k / 3.0)), 1e-6) << "k=" << k;
  }
}

TEST(FilterGaussian, SmoothingReducesLaplacianEnergy) {
  for (std::uint64_t seed = 0; seed < 10; ++seed)
    for (int k : {3, 5, 9}) {
      const Plane p = test::random_plane(24, 2, seed);
      EXPECT_LE(laplacian_energy(filter_gaussian(p, KernelSpec::gaussian(k))), laplacian_energy(p));
    }
}

TEST(FilterGaussian, RejectsWrongKind) {
  EXPECT_THROW(filter_gaussian(Plane(4, 1), KernelSpec::bilateral(3)), InvalidArgument);
  EXPECT_THROW(filter_bilateral(Plane(4, 1), KernelSpec::gaussian(3)), InvalidArgument);
  EXPECT_THROW(filter_plane(Plane(4, 1), KernelSpec::gaussian(4)), InvalidArgument);
}

TEST(FilterBilateral, StepEdgeIsPreserved) {
  Plane p(32, 1);
  for (int y = 0; y < 32; ++y)
    for (int x = 16; x < 32; ++x) p.at(y, x, 0) = 10.0;
  KernelSpec s = KernelSpec::bilateral(9);
  s.sigma_range = 0.1;
  EXPECT_LE(max_abs_diff(filter_bilateral(p, s), p), 1e-3);
}

TEST(FilterBilateral, HugeRangeSigmaIsGaussian) {
  for (int k : {3, 9}) {
    const Plane p = test::random_plane(32, 3, 7 + k);
    KernelSpec b = KernelSpec::bilateral(k);
    b.sigma_range = 1e6;
    EXPECT_LE(max_abs_diff(filter_bilateral(p, b), filter_gaussian(p, KernelSpec::gaussian(k))), 1e-6);
  }
}

TEST(FilterBilateral, MatchesReference) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Plane p = test::random_plane(32, 4, seed);
    for (int k : {3, 9}) {
      const KernelSpec s = KernelSpec::bilateral(k);
      EXPECT_LE(max_abs_diff(filter_bilateral(p, s), filter_bilateral_reference(p, s)), 1e-6)
          << "seed=" << seed << " k=" << k;
    }
  }
}

TEST(FilterBilateral, SizeOneIsIdentity) {
  const Plane p = test::random_plane(16, 3, 1);
  EXPECT_EQ(filter_bilateral(p, KernelSpec::bilateral(1)).data, p.data);
  EXPECT_EQ(filter_bilateral_reference(p, KernelSpec::bilateral(1)).data, p.data);
  EXPECT_EQ(filter_gaussian(p, KernelSpec::gaussian(1)).data, p.data);
}

TEST(FilterBilateral, IndependentOfThreadCount) {
  const Plane p = test::random_plane(40, 5, 3);
  setenv("TPF_THREADS", "1", 1);
  const Plane a = filter_bilateral(p, KernelSpec::bilateral(5));
  setenv("TPF_THREADS", "4", 1);
  const Plane b = filter_bilateral(p, KernelSpec::bilateral(5));
  unsetenv("TPF_THREADS");
  EXPECT_EQ(a.data, b.data);
}

TEST(ExpNonpositive, MatchesStdExp) {
  for (double x = -750.0; x <= 0.0; x += 0.0137) {
    const double e = std::exp(x);
    EXPECT_NEAR(detail::exp_nonpositive(x), e, 1e-15 * e + (x < -708.0 ? 1e-300 : 0.0)) << x;
  }
  EXPECT_EQ(detail::exp_nonpositive(0.0), 1.0);
}

TEST(FilterBilinear, HandEvaluatedRow) {
  Plane p(4, 1);
  for (int y = 0; y < 4; ++y) {
    p.at(y, 2, 0) = 4;
    p.at(y, 3, 0) = 4;
  }
  const Plane out = filter_bilinear_resample(p, 2);
  for (int y = 0; y < 4; ++y) {
    EXPECT_DOUBLE_EQ(out.at(y, 0, 0), 0.0);
    EXPECT_DOUBLE_EQ(out.at(y, 1, 0), 1.0);
    EXPECT_DOUBLE_EQ(out.at(y, 2, 0), 3.0);
    EXPECT_DOUBLE_EQ(out.at(y, 3, 0), 4.0);
  }
}

TEST(FilterBilinear, FullFactorGivesGlobalMean) {
  const Plane p = test::random_plane(8, 2, 5);
  const Plane out = filter_bilinear_resample(p, 8);
  for (int c = 0; c < 2; ++c) {
    double mean = 0;
    for (int t = 0; t < 64; ++t) mean += p.data[t * 2 + c];
    mean /= 64;
    for (int t = 0; t < 64; ++t) EXPECT_NEAR(out.data[t * 2 + c], mean, 1e-14);
  }
}

TEST(FilterBilinear, RejectsNonDividingFactor) {
  EXPECT_THROW(filter_bilinear_resample(Plane(6, 1), 4), InvalidArgument);
  EXPECT_THROW(filter_bilinear_resample(Plane(6, 1), 1), InvalidArgument);
}

TEST(Filters, ConstantPlaneIsFixedExactly) {
  for (double value : {0.0, 1.0, -3.25, 0.1, 1e-7}) {
    const Plane p(16, 3, value);
    for (const auto& s : all_specs()) EXPECT_EQ(filter_plane(p, s).data, p.data) << to_string(s.kind) << s.size;
    KernelSpec b = KernelSpec::bilateral(3);
    EXPECT_EQ(filter_bilateral_reference(p, b).data, p.data);
  }
}

TEST(Filters, OutputStaysWithinChannelRange) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Plane p = test::random_plane(16, 3, seed);
    for (const auto& s : all_specs()) {
      const Plane out = filter_plane(p, s);
      for (int c = 0; c < 3; ++c) {
        double lo = 1e300, hi = -1e300;
        for (int t = 0; t < 256; ++t) {
          lo = std::min(lo, p.data[t * 3 + c]);
          hi = std::max(hi, p.data[t * 3 + c]);
        }
        for (int t = 0; t < 256; ++t) {
          EXPECT_GE(out.data[t * 3 + c], lo);
          EXPECT_LE(out.data[t * 3 + c], hi);
        }
      }
    }
  }
}

TEST(Filters, EquivariantUnderTransposeAndRotation) {
  const Plane p = test::random_plane(16, 2, 21);
  for (const auto& s : all_specs()) {
    EXPECT_LE(max_abs_diff(filter_plane(transpose(p), s), transpose(filter_plane(p, s))), 1e-12);
    EXPECT_LE(max_abs_diff(filter_plane(rotate180(p), s), rotate180(filter_plane(p, s))), 1e-12);
  }
}

TEST(Filters, ChannelsAreIndependent) {
  const Plane p = test::random_plane(16, 3, 9);
  Plane q = p;
  for (int t = 0; t < 256; ++t) q.data[t * 3 + 1] *= -5.0;
  for (const auto& s : all_specs()) {
    const Plane a = filter_plane(p, s), b = filter_plane(q, s);
    for (int t = 0; t < 256; ++t) {
      EXPECT_EQ(a.data[t * 3], b.data[t * 3]);
      EXPECT_EQ(a.data[t * 3 + 2], b.data[t * 3 + 2]);
    }
  }
}

TEST(Modulate, ZeroAndIdentity) {
  const Triplane zero(8, 2);
  for (const auto& s : all_specs()) EXPECT_EQ(modulate_triplane(zero, s), zero);
  const Triplane tp = test::random_triplane(8, 2, 1);
  const Triplane copy = tp;
  EXPECT_EQ(modulate_triplane(tp, KernelSpec::bilateral(1)), tp);
  EXPECT_EQ(modulate_triplane(tp, KernelSpec::gaussian(1)), tp);
  (void)modulate_triplane(tp, KernelSpec::bilateral(5));
  EXPECT_EQ(tp, copy);
}

TEST(Modulate, BilateralReducesEnergyOnCorruptedFit) {
  const auto shape = make_sphere({0, 0, 0}, 0.3, {0.8, 0.2, 0.2});
  const FitResult fit = fit_triplane(shape, test::quick_fit(300), test::small_triplane(64));
  NoiseSpec noise;
  noise.seed = 3;
  const Triplane corrupted = inject_artifacts(fit.triplane, noise);
  EXPECT_LT(laplacian_energy(modulate_triplane(corrupted, KernelSpec::bilateral(3))), laplacian_energy(corrupted));
}

TEST(LaplacianEnergy, HandValues) {
  EXPECT_EQ(laplacian_energy(Plane(5, 2, 3.0)), 0.0);
  Plane p(3, 1);
  p.at(1, 1, 0) = 1.0;
  // Center Laplacian -4, four edge neighbors +1 each, corners 0.
  EXPECT_DOUBLE_EQ(laplacian_energy(p), (16.0 + 4.0) / 9.0);
}

}  // namespace
}  // namespace tpf
