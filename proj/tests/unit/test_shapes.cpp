// Copyright 2026 The tpf Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "helpers.hpp"
#include "tpf/shapes.hpp"

namespace tpf {
namespace {

const Rgb kRed{1, 0, 0};
const Rgb kBlue{0, 0, 1};

TEST(AnalyticSdf, Sphere) {
  const auto s = make_sphere({0, 0, 0}, 0.3, kRed);
  EXPECT_DOUBLE_EQ(analytic_sdf(s, {0, 0, 0}), -0.3);
  EXPECT_DOUBLE_EQ(analytic_sdf(s, {0.3, 0, 0}), 0.0);
  EXPECT_NEAR(analytic_sdf(s, {0, 0.4, 0}), 0.1, 1e-15);
}

TEST(AnalyticSdf, Torus) {
  const auto t = make_torus({0, 0, 0}, 0.3, 0.1, kRed);
  EXPECT_NEAR(analytic_sdf(t, {0.3, 0, 0.1}), 0.0, 1e-15);
  EXPECT_NEAR(analytic_sdf(t, {0.3, 0, 0}), -0.1, 1e-15);
  EXPECT_NEAR(analytic_sdf(t, {0, 0, 0}), 0.2, 1e-15);
  EXPECT_NEAR(analytic_sdf(t, {0, 0.45, 0}), 0.05, 1e-15);
}

TEST(AnalyticSdf, Box) {
  const auto b = make_box({0, 0, 0}, {0.3, 0.2, 0.1}, kRed);
  EXPECT_NEAR(analytic_sdf(b, {0, 0, 0}), -0.1, 1e-15);
  EXPECT_NEAR(analytic_sdf(b, {0.4, 0, 0}), 0.1, 1e-15);
  EXPECT_NEAR(analytic_sdf(b, {0.33, 0.24, 0}), 0.05, 1e-15);
  EXPECT_NEAR(analytic_sdf(b, {0.3, 0, 0}), 0.0, 1e-15);
}

TEST(AnalyticSdf, RoundedBox) {
  const auto b = make_rounded_box({0, 0, 0}, {0.3, 0.3, 0.3}, 0.1, kRed);
  EXPECT_NEAR(analytic_sdf(b, {0.3, 0, 0}), 0.0, 1e-15);
  const double corner = 0.2 + 0.1 / std::sqrt(3.0);
  EXPECT_NEAR(analytic_sdf(b, {corner, corner, corner}), 0.0, 1e-14);
}

TEST(AnalyticSdf, UnionAndDifference) {
  const auto u = make_union(make_sphere({-0.2, 0, 0}, 0.1, kRed), make_sphere({0.2, 0, 0}, 0.1, kBlue));
  EXPECT_NEAR(analytic_sdf(u, {0, 0, 0}), 0.1, 1e-15);
  EXPECT_NEAR(analytic_sdf(u, {0.2, 0, 0}), -0.1, 1e-15);
  const auto d = make_difference(make_box({0, 0, 0}, {0.3, 0.3, 0.3}, kRed), make_sphere({0, 0, 0.3}, 0.15, kBlue));
  EXPECT_NEAR(analytic_sdf(d, {0, 0, 0.2}), 0.05, 1e-15);
  EXPECT_NEAR(analytic_sdf(d, {0, 0, 0}), -0.15, 1e-15);
}

TEST(AnalyticColor, Ownership) {
  EXPECT_EQ(analytic_color(make_sphere({0, 0, 0}, 0.3, kRed), {0.4, -0.1, 0.2}), kRed);
  const auto u = make_union(make_sphere({-0.2, 0, 0}, 0.1, kRed), make_sphere({0.2, 0, 0}, 0.1, kBlue));
  EXPECT_EQ(analytic_color(u, {0.2, 0.01, 0}), kBlue);
  EXPECT_EQ(analytic_color(u, {-0.25, 0, 0}), kRed);
  EXPECT_EQ(analytic_color(u, {0, 0.3, 0}), kRed);
  const auto swapped = make_union(make_sphere({0.2, 0, 0}, 0.1, kBlue), make_sphere({-0.2, 0, 0}, 0.1, kRed));
  EXPECT_EQ(analytic_color(swapped, {0, 0.3, 0}), kBlue);
}

TEST(AnalyticSdf, PrimitivesAreOneLipschitz) {
  const std::vector<AnalyticShape> shapes = {
      make_sphere({0.05, -0.02, 0.01}, 0.3, kRed), make_box({0, 0.02, 0}, {0.3, 0.25, 0.2}, kRed),
      make_torus({0, 0, 0.03}, 0.3, 0.1, kRed), make_rounded_box({0, 0, 0}, {0.3, 0.2, 0.25}, 0.05, kRed)};
  Rng rng(42);
  for (const auto& s : shapes)
    for (int i = 0; i < 10000; ++i) {
      const Vec3 p{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
      const Vec3 q{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
      EXPECT_LE(std::abs(analytic_sdf(s, p) - analytic_sdf(s, q)), norm(p - q) + 1e-12);
    }
}

TEST(Shapes, Validation) {
  EXPECT_NO_THROW(validate_shape(make_sphere({0, 0, 0}, 0.3, kRed)));
  EXPECT_THROW(validate_shape(make_sphere({0, 0, 0}, 0.48, kRed)), InvalidArgument);
  EXPECT_THROW(validate_shape(make_sphere({0, 0, 0}, -0.1, kRed)), InvalidArgument);
  EXPECT_THROW(validate_shape(make_torus({0, 0, 0}, 0.1, 0.2, kRed)), InvalidArgument);
  EXPECT_THROW(validate_shape(make_sphere({0, 0, 0}, 0.2, {1.5, 0, 0})), InvalidArgument);
}

TEST(Shapes, FromJson) {
  const auto j = nlohmann::json::parse(R"({"kind": "difference",
    "a": {"kind": "box", "center": [0,0,0], "half_extents": [0.3,0.3,0.3], "color": [1,0,0]},
    "b": {"kind": "sphere", "center": [0,0,0.3], "radius": 0.15}})");
  const auto s = shape_from_json(j);
  EXPECT_NEAR(analytic_sdf(s, {0, 0, 0.2}), 0.05, 1e-15);
  EXPECT_EQ(s.primitives().size(), 2u);
  EXPECT_THROW(shape_from_json(nlohmann::json::parse(R"({"kind": "cone"})")), ParseError);
  EXPECT_THROW(shape_from_json(nlohmann::json::parse(R"({"kind": "sphere", "center": [0,0]})")), ParseError);
}

TEST(Shapes, CorpusLoads) {
  const auto lib = load_shape_library(test::corpus_path());
  ASSERT_GE(lib.size(), 5u);
  for (const char* name : {"sphere", "box", "torus", "union", "difference"}) {
    const AnalyticShape* s = find_shape(lib, name);
    ASSERT_NE(s, nullptr) << name;
    EXPECT_GT(analytic_sdf(*s, {0.49, 0.49, 0.49}), 0.0) << name;
  }
  EXPECT_EQ(find_shape(lib, "nope"), nullptr);
  const AnalyticShape* u = find_shape(lib, "union");
  EXPECT_NE(analytic_color(*u, {-0.3, 0, 0}), analytic_color(*u, {0.3, 0, 0}));
}

TEST(Shapes, LibraryErrors) {
  const auto dir = test::temp_dir("shapes");
  EXPECT_THROW(load_shape_library(dir / "missing.json"), IoError);
  std::ofstream(dir / "bad.json") << "{\"shapes\": {\"x\": {\"kind\": \"sphere\", \"center\": [0,0,0], \"radius\": 0.6}}}";
  EXPECT_THROW(load_shape_library(dir / "bad.json"), ParseError);
  std::ofstream(dir / "syntax.json") << "{";
  EXPECT_THROW(load_shape_library(dir / "syntax.json"), ParseError);
}

}  // namespace
}  // namespace tpf
