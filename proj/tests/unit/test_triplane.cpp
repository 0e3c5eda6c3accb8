// Copyright 2026 The tpf Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <limits>

#include "helpers.hpp"
#include "tpf/triplane.hpp"

namespace tpf {
namespace {

Plane two_by_two() {
  Plane p(2, 1);
  p.at(0, 0, 0) = 0;
  p.at(0, 1, 0) = 1;
  p.at(1, 0, 0) = 2;
  p.at(1, 1, 0) = 3;
  return p;
}

// Hand-rolled decoder evaluation straight from the documented parameter layout.
double reference_sdf(std::span<const double> f, const FieldDecoder& dec) {
  const int C = dec.channels(), H = dec.hidden();
  const auto P = dec.params();
  std::vector<double> in(f.begin(), f.end());
  std::size_t off = 0;
  if (H > 0) {
    std::vector<double> h(H);
    for (int j = 0; j < H; ++j) {
      double s = P[static_cast<std::size_t>(H) * C + j];
      for (int c = 0; c < C; ++c) s += P[static_cast<std::size_t>(j) * C + c] * f[c];
      h[j] = std::tanh(s);
    }
    in = h;
    off = static_cast<std::size_t>(H) * C + H;
  }
  double s = P[off + in.size()];
  for (std::size_t i = 0; i < in.size(); ++i) s += P[off + i] * in[i];
  return s;
}

TEST(SamplePlane, ZeroAndConstantPlanes) {
  Plane zero(8, 3);
  for (double u : {0.0, 0.3, 0.99})
    for (double v : {0.0, 0.5, 1.0})
      for (double x : sample_plane(zero, u, v)) EXPECT_EQ(x, 0.0);
  Plane c(8, 3, 2.5);
  for (double u : {0.0, 0.17, 0.5, 1.0})
    for (double x : sample_plane(c, u, 0.71)) EXPECT_DOUBLE_EQ(x, 2.5);
}

TEST(SamplePlane, FourTexelCenterAverage) {
  EXPECT_DOUBLE_EQ(sample_plane(two_by_two(), 0.5, 0.5)[0], 1.5);
}

TEST(SamplePlane, TexelCentersAndClamp) {
  const Plane p = two_by_two();
  EXPECT_DOUBLE_EQ(sample_plane(p, 0.25, 0.25)[0], 0.0);
  EXPECT_DOUBLE_EQ(sample_plane(p, 0.75, 0.25)[0], 1.0);
  EXPECT_DOUBLE_EQ(sample_plane(p, 0.25, 0.75)[0], 2.0);
  EXPECT_DOUBLE_EQ(sample_plane(p, 0.75, 0.75)[0], 3.0);
  EXPECT_DOUBLE_EQ(sample_plane(p, 0.0, 0.0)[0], 0.0);
  EXPECT_DOUBLE_EQ(sample_plane(p, 1.0, 1.0)[0], 3.0);
  EXPECT_DOUBLE_EQ(sample_plane(p, -3.0, 7.0)[0], 2.0);
}

TEST(SamplePlane, RejectsNonFinite) {
  EXPECT_THROW(sample_plane(two_by_two(), std::nan(""), 0.5), InvalidArgument);
  EXPECT_THROW(sample_plane(two_by_two(), 0.5, std::numeric_limits<double>::infinity()), InvalidArgument);
}

TEST(EvalFeatures, ZeroAndConstantPlanes) {
  Triplane zero(8, 2);
  for (double x : eval_features(zero, {0.1, -0.2, 0.3})) EXPECT_EQ(x, 0.0);
  Triplane tp(8, 2);
  for (double& v : tp.plane(PlaneAxis::XY).data) v = 1.0;
  for (double& v : tp.plane(PlaneAxis::XZ).data) v = 0.25;
  for (double& v : tp.plane(PlaneAxis::YZ).data) v = -2.0;
  for (double x : eval_features(tp, {0.4, 0.0, -0.49})) EXPECT_DOUBLE_EQ(x, -0.75);
}

TEST(EvalFeatures, ReplicatedPlanesAtOrigin) {
  const Triplane tp({two_by_two(), two_by_two(), two_by_two()}, 0.5);
  EXPECT_DOUBLE_EQ(eval_features(tp, {0, 0, 0})[0], 4.5);
}

TEST(EvalFeatures, ProjectionAxes) {
  // Each plane gets a ramp along its u axis only; the summed feature then
  // reads x' + x' + y' where primes are normalized coordinates.
  Triplane tp(16, 1);
  for (int a = 0; a < 3; ++a)
    for (int row = 0; row < 16; ++row)
      for (int col = 0; col < 16; ++col) tp.plane(a).at(row, col, 0) = (col + 0.5) / 16;
  const Vec3 p{0.1, -0.2, 0.35};
  const double xn = (p.x / 0.5 + 1) / 2, yn = (p.y / 0.5 + 1) / 2;
  EXPECT_NEAR(eval_features(tp, p)[0], 2 * xn + yn, 1e-12);
}

TEST(EvalFeatures, LinearityOfAggregation) {
  const Triplane a = test::random_triplane(16, 3, 1), b = test::random_triplane(16, 3, 2);
  const Triplane sum = a + b;
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 p{rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6)};
    const auto fs = eval_features(sum, p), fa = eval_features(a, p), fb = eval_features(b, p);
    for (int c = 0; c < 3; ++c) {
      const double expect = fa[c] + fb[c];
      EXPECT_LE(std::abs(fs[c] - expect), 1e-12 * std::max(1.0, std::abs(fa[c]) + std::abs(fb[c])));
    }
  }
}

TEST(EvalFeatures, LipschitzBound) {
  const int R = 12;
  const Triplane tp = test::random_triplane(R, 2, 7);
  double spread = 0.0;
  for (int c = 0; c < 2; ++c) {
    double lo = 1e300, hi = -1e300;
    for (int a = 0; a < 3; ++a)
      for (int t = 0; t < R * R; ++t) {
        lo = std::min(lo, tp.plane(a).data[t * 2 + c]);
        hi = std::max(hi, tp.plane(a).data[t * 2 + c]);
      }
    spread = std::max(spread, hi - lo);
  }
  const double L = spread * R / tp.extent();
  Rng rng(8);
  for (int i = 0; i < 5000; ++i) {
    const Vec3 p{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
    const Vec3 q = p + Vec3{rng.uniform(-0.02, 0.02), rng.uniform(-0.02, 0.02), rng.uniform(-0.02, 0.02)};
    const double l1 = std::abs(p.x - q.x) + std::abs(p.y - q.y) + std::abs(p.z - q.z);
    const auto fp = eval_features(tp, p), fq = eval_features(tp, q);
    for (int c = 0; c < 2; ++c) EXPECT_LE(std::abs(fp[c] - fq[c]), L * l1 + 1e-12);
  }
}

TEST(EvalFeatures, ClampConsistency) {
  const Triplane tp = test::random_triplane(10, 2, 3);
  const FieldDecoder dec = test::random_decoder(2, 4, 3);
  Rng rng(9);
  for (int i = 0; i < 500; ++i) {
    const Vec3 p{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
    const Vec3 q{std::clamp(p.x, -0.5, 0.5), std::clamp(p.y, -0.5, 0.5), std::clamp(p.z, -0.5, 0.5)};
    EXPECT_EQ(eval_features(tp, p), eval_features(tp, q));
    EXPECT_EQ(decode_sdf(eval_features(tp, p), dec), decode_sdf(eval_features(tp, q), dec));
  }
}

TEST(EvalFeatures, RejectsNonFinitePoint) {
  EXPECT_THROW(eval_features(Triplane(4, 1), {std::nan(""), 0, 0}), InvalidArgument);
}

TEST(Triplane, RejectsBadShapes) {
  EXPECT_THROW(Triplane(1, 2), InvalidArgument);
  EXPECT_THROW(Triplane(4, 0), InvalidArgument);
  EXPECT_THROW(Triplane(4, 1, 0.0), InvalidArgument);
  Plane bad(4, 1);
  bad.data[3] = std::nan("");
  EXPECT_THROW(Triplane({bad, Plane(4, 1), Plane(4, 1)}, 0.5), InvalidArgument);
  EXPECT_THROW(Triplane({Plane(4, 1), Plane(4, 2), Plane(4, 1)}, 0.5), InvalidArgument);
}

TEST(DecodeSdf, BiasOnly) {
  FieldDecoder dec(4, 0);
  dec.sdf_bias() = 0.1;
  const std::vector<double> f(4, 0.0);
  EXPECT_DOUBLE_EQ(decode_sdf(f, dec), 0.1);
}

TEST(DecodeSdf, SingleActiveWeight) {
  FieldDecoder dec(3, 0);
  dec.sdf_weights()[0] = 2.0;
  dec.sdf_bias() = -1.0;
  const std::vector<double> f = {1.0, 0.0, 0.0};
  EXPECT_DOUBLE_EQ(decode_sdf(f, dec), 1.0);
}

TEST(DecodeSdf, MatchesHandRolledEvaluation) {
  for (int H : {0, 1, 5, 16}) {
    const FieldDecoder dec = test::random_decoder(6, H, 10 + H);
    Rng rng(H);
    for (int i = 0; i < 50; ++i) {
      std::vector<double> f(6);
      for (double& v : f) v = rng.normal();
      EXPECT_NEAR(decode_sdf(f, dec), reference_sdf(f, dec), 1e-12) << "H=" << H;
    }
  }
}

TEST(DecodeSdf, RejectsWrongLength) {
  const FieldDecoder dec(3, 2);
  const std::vector<double> f(2, 0.0);
  EXPECT_THROW(decode_sdf(f, dec), InvalidArgument);
}

TEST(DecodeColor, Midpoint) {
  const FieldDecoder dec(4, 3);
  const std::vector<double> f(4, 0.0);
  for (double c : decode_color(f, dec)) EXPECT_DOUBLE_EQ(c, 0.5);
}

TEST(DecodeColor, Saturation) {
  FieldDecoder dec(2, 0);
  for (double& b : dec.color_bias()) b = 5.0;
  const std::vector<double> f(2, 0.0);
  for (double c : decode_color(f, dec)) {
    EXPECT_GE(c, 0.99);
    EXPECT_LE(c, 1.0);
  }
}

TEST(DecodeColor, AlwaysInUnitRange) {
  const FieldDecoder dec = test::random_decoder(3, 4, 77);
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> f(3);
    for (double& v : f) v = 20 * rng.normal();
    for (double c : decode_color(f, dec)) {
      EXPECT_GE(c, 0.0);
      EXPECT_LE(c, 1.0);
    }
  }
}

TEST(EvalSdfGrid, ConstantTriplane) {
  Triplane tp(8, 2);
  for (int a = 0; a < 3; ++a)
    for (double& v : tp.plane(a).data) v = 0.3;
  const FieldDecoder dec = test::random_decoder(2, 3, 4);
  const Grid3 g = eval_sdf_grid(tp, dec, 7);
  for (double v : g.values) EXPECT_NEAR(v, g.values[0], 1e-12);
}

TEST(EvalSdfGrid, MatchesPointwiseEvaluation) {
  const Triplane tp = test::random_triplane(9, 3, 11);
  const FieldDecoder dec = test::random_decoder(3, 5, 11);
  for (int n : {2, 5, 13}) {
    const Grid3 g = eval_sdf_grid(tp, dec, n);
    ASSERT_EQ(g.values.size(), static_cast<std::size_t>(n * n * n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          EXPECT_EQ(g.at(i, j, k), decode_sdf(eval_features(tp, g.point(i, j, k)), dec));
  }
  const Grid3 g2 = eval_sdf_grid(tp, dec, 2);
  EXPECT_EQ(g2.point(0, 0, 0), (Vec3{-0.5, -0.5, -0.5}));
  EXPECT_EQ(g2.point(1, 1, 1), (Vec3{0.5, 0.5, 0.5}));
}

TEST(EvalSdfGrid, IndependentOfThreadCount) {
  const Triplane tp = test::random_triplane(16, 4, 12);
  const FieldDecoder dec = test::random_decoder(4, 8, 12);
  setenv("TPF_THREADS", "1", 1);
  const Grid3 a = eval_sdf_grid(tp, dec, 20);
  setenv("TPF_THREADS", "3", 1);
  const Grid3 b = eval_sdf_grid(tp, dec, 20);
  unsetenv("TPF_THREADS");
  EXPECT_EQ(a, b);
}

TEST(EvalSdfGrid, RejectsSmallGrid) {
  EXPECT_THROW(eval_sdf_grid(Triplane(4, 1), FieldDecoder(1, 0), 1), InvalidArgument);
  EXPECT_THROW(eval_sdf_grid(Triplane(4, 1), FieldDecoder(2, 0), 4), InvalidArgument);
}

TEST(EvalSdfGrid, FittedSphereSignChangesBracketRadius) {
  const auto shape = make_sphere({0, 0, 0}, 0.3, {0.8, 0.2, 0.2});
  const FitResult fit = fit_triplane(shape, test::quick_fit(600), test::small_triplane(32));
  const int n = 65;
  const Grid3 g = eval_sdf_grid(fit.triplane, fit.decoder, n);
  const int c = n / 2;
  const double cell = 1.0 / (n - 1);
  for (int axis = 0; axis < 3; ++axis)
    for (int dir : {-1, 1}) {
      int crossing = -1;
      for (int s = 0; s < c; ++s) {
        int i0[3] = {c, c, c}, i1[3] = {c, c, c};
        i0[axis] += dir * s;
        i1[axis] += dir * (s + 1);
        if ((g.at(i0[0], i0[1], i0[2]) < 0) != (g.at(i1[0], i1[1], i1[2]) < 0)) {
          crossing = s;
          break;
        }
      }
      ASSERT_GE(crossing, 0);
      EXPECT_LE(crossing * cell, 0.3 + 2 * cell);
      EXPECT_GE((crossing + 1) * cell, 0.3 - 2 * cell);
    }
}

}  // namespace
}  // namespace tpf
