// Copyright 2026 The tpf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

/// Analytic ground-truth shapes: exact primitive SDFs, min/max composites, and a
/// piecewise-constant color per primitive.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "tpf/error.hpp"
#include "tpf/vec3.hpp"

namespace tpf {

struct Sphere {
  Vec3 center;
  double radius = 0.0;
};

struct Box {
  Vec3 center;
  Vec3 half_extents;
};

/// Ring in the plane z = center.z, symmetric about the z axis.
struct Torus {
  Vec3 center;
  double major_radius = 0.0;
  double minor_radius = 0.0;
};

struct RoundedBox {
  Vec3 center;
  Vec3 half_extents;  // outer half-extents, corners rounded by `radius`
  double radius = 0.0;
};

using PrimitiveGeometry = std::variant<Sphere, Box, Torus, RoundedBox>;

struct Primitive {
  PrimitiveGeometry geometry;
  Rgb color{0.5, 0.5, 0.5};
};

enum class CsgOp { Union, Difference };

class AnalyticShape;

struct Composite {
  CsgOp op;
  std::shared_ptr<const AnalyticShape> first;
  std::shared_ptr<const AnalyticShape> second;
};

/// Immutable CSG tree. Leaves are primitives; inner nodes are unions
/// (min of child SDFs) or differences (max(a, -b)).
class AnalyticShape {
 public:
  explicit AnalyticShape(Primitive p) : node_(std::move(p)) {}
  explicit AnalyticShape(Composite c) : node_(std::move(c)) {
    detail::require(std::get<Composite>(node_).first && std::get<Composite>(node_).second,
                    "composite shape needs two children");
  }

  bool is_primitive() const { return std::holds_alternative<Primitive>(node_); }
  const Primitive& primitive() const { return std::get<Primitive>(node_); }
  const Composite& composite() const { return std::get<Composite>(node_); }

  /// Primitives in declaration order (left-to-right through the tree).
  std::vector<const Primitive*> primitives() const {
    std::vector<const Primitive*> out;
    collect(out);
    return out;
  }

 private:
  void collect(std::vector<const Primitive*>& out) const {
    if (is_primitive()) {
      out.push_back(&primitive());
      return;
    }
    composite().first->collect(out);
    composite().second->collect(out);
  }

  std::variant<Primitive, Composite> node_;
};

inline AnalyticShape make_sphere(Vec3 center, double radius, Rgb color) {
  return AnalyticShape(Primitive{Sphere{center, radius}, color});
}
inline AnalyticShape make_box(Vec3 center, Vec3 half, Rgb color) {
  return AnalyticShape(Primitive{Box{center, half}, color});
}
inline AnalyticShape make_torus(Vec3 center, double major, double minor, Rgb color) {
  return AnalyticShape(Primitive{Torus{center, major, minor}, color});
}
inline AnalyticShape make_rounded_box(Vec3 center, Vec3 half, double radius, Rgb color) {
  return AnalyticShape(Primitive{RoundedBox{center, half, radius}, color});
}
inline AnalyticShape make_union(AnalyticShape a, AnalyticShape b) {
  return AnalyticShape(Composite{CsgOp::Union, std::make_shared<const AnalyticShape>(std::move(a)),
                                 std::make_shared<const AnalyticShape>(std::move(b))});
}
inline AnalyticShape make_difference(AnalyticShape a, AnalyticShape b) {
  return AnalyticShape(Composite{CsgOp::Difference, std::make_shared<const AnalyticShape>(std::move(a)),
                                 std::make_shared<const AnalyticShape>(std::move(b))});
}

namespace detail {

inline Vec3 abs3(const Vec3& v) { return {std::abs(v.x), std::abs(v.y), std::abs(v.z)}; }

inline double box_sdf(const Vec3& p, const Vec3& center, const Vec3& half) {
  const Vec3 q = abs3(p - center) - half;
  const Vec3 outside{std::max(q.x, 0.0), std::max(q.y, 0.0), std::max(q.z, 0.0)};
  return norm(outside) + std::min(std::max({q.x, q.y, q.z}), 0.0);
}

inline double primitive_sdf(const PrimitiveGeometry& g, const Vec3& p) {
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Sphere>) {
          return norm(p - s.center) - s.radius;
        } else if constexpr (std::is_same_v<T, Box>) {
          return box_sdf(p, s.center, s.half_extents);
        } else if constexpr (std::is_same_v<T, Torus>) {
          const Vec3 q = p - s.center;
          const double ring = std::hypot(q.x, q.y) - s.major_radius;
          return std::hypot(ring, q.z) - s.minor_radius;
        } else {
          const Vec3 inner = s.half_extents - Vec3{s.radius, s.radius, s.radius};
          return box_sdf(p, s.center, inner) - s.radius;
        }
      },
      g);
}

/// Axis-aligned bounds of a primitive.
inline std::pair<Vec3, Vec3> primitive_bounds(const PrimitiveGeometry& g) {
  return std::visit(
      [](const auto& s) -> std::pair<Vec3, Vec3> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Sphere>) {
          const Vec3 r{s.radius, s.radius, s.radius};
          return {s.center - r, s.center + r};
        } else if constexpr (std::is_same_v<T, Torus>) {
          const double a = s.major_radius + s.minor_radius;
          return {s.center - Vec3{a, a, s.minor_radius}, s.center + Vec3{a, a, s.minor_radius}};
        } else {
          return {s.center - s.half_extents, s.center + s.half_extents};
        }
      },
      g);
}

struct SdfOwner {
  double sdf;
  const Primitive* owner;
};

inline SdfOwner evaluate(const AnalyticShape& shape, const Vec3& p) {
  if (shape.is_primitive()) return {primitive_sdf(shape.primitive().geometry, p), &shape.primitive()};
  const auto& c = shape.composite();
  const SdfOwner a = evaluate(*c.first, p);
  const SdfOwner b = evaluate(*c.second, p);
  if (c.op == CsgOp::Union) return a.sdf <= b.sdf ? a : b;
  // max(a, -b): the carved surface belongs to the subtracted primitive.
  return a.sdf >= -b.sdf ? a : SdfOwner{-b.sdf, b.owner};
}

}  // namespace detail

inline double analytic_sdf(const AnalyticShape& shape, const Vec3& p) { return detail::evaluate(shape, p).sdf; }

/// Color of the component that determines the SDF at p; ties go to the
/// first-declared child.
inline Rgb analytic_color(const AnalyticShape& shape, const Vec3& p) { return detail::evaluate(shape, p).owner->color; }

inline constexpr double kShapeMargin = 0.05;

/// Checks parameters are positive/finite and every primitive stays inside
/// [-0.5 + margin, 0.5 - margin]^3.
inline void validate_shape(const AnalyticShape& shape, double margin = kShapeMargin) {
  const double lim = 0.5 - margin;
  for (const Primitive* prim : shape.primitives()) {
    std::visit(
        [](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Sphere>) {
            detail::require(s.radius > 0.0, "sphere radius must be positive");
          } else if constexpr (std::is_same_v<T, Torus>) {
            detail::require(s.minor_radius > 0.0 && s.major_radius > s.minor_radius,
                            "torus needs major > minor > 0");
          } else if constexpr (std::is_same_v<T, Box>) {
            detail::require(s.half_extents.x > 0 && s.half_extents.y > 0 && s.half_extents.z > 0,
                            "box half-extents must be positive");
          } else {
            detail::require(s.radius > 0.0 && s.half_extents.x > s.radius && s.half_extents.y > s.radius &&
                                s.half_extents.z > s.radius,
                            "rounded box needs half-extents > radius > 0");
          }
        },
        prim->geometry);
    for (double c : prim->color) detail::require(c >= 0.0 && c <= 1.0, "shape colors must lie in [0, 1]");
    const auto [lo, hi] = detail::primitive_bounds(prim->geometry);
    for (int a = 0; a < 3; ++a)
      if (lo[a] < -lim || hi[a] > lim)
        throw InvalidArgument("primitive leaves the cube interior (margin " + std::to_string(margin) + ")");
  }
}

// ---------------------------------------------------------------------------
// Shape files
//
// A shape is a JSON object with a "kind" key:
//   {"kind": "sphere", "center": [x,y,z], "radius": r, "color": [r,g,b]}
//   {"kind": "box", "center": [...], "half_extents": [...], "color": [...]}
//   {"kind": "torus", "center": [...], "major_radius": R, "minor_radius": r, "color": [...]}
//   {"kind": "rounded_box", "center": [...], "half_extents": [...], "radius": r, "color": [...]}
//   {"kind": "union" | "difference", "a": <shape>, "b": <shape>}
// A library file holds {"shapes": {"name": <shape>, ...}}.

namespace detail {

inline Vec3 json_vec3(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw ParseError(std::string("shape is missing \"") + key + "\"");
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != 3) throw ParseError(std::string("\"") + key + "\" must be a 3-element array");
  return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

inline double json_real(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) throw ParseError(std::string("shape needs numeric \"") + key + "\"");
  return j.at(key).get<double>();
}

inline Rgb json_color(const nlohmann::json& j) {
  if (!j.contains("color")) return {0.5, 0.5, 0.5};
  const Vec3 c = json_vec3(j, "color");
  return {c.x, c.y, c.z};
}

}  // namespace detail

inline AnalyticShape shape_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind")) throw ParseError("shape must be an object with a \"kind\"");
  const std::string kind = j.at("kind").get<std::string>();
  using namespace detail;
  if (kind == "sphere") return make_sphere(json_vec3(j, "center"), json_real(j, "radius"), json_color(j));
  if (kind == "box") return make_box(json_vec3(j, "center"), json_vec3(j, "half_extents"), json_color(j));
  if (kind == "torus")
    return make_torus(json_vec3(j, "center"), json_real(j, "major_radius"), json_real(j, "minor_radius"),
                      json_color(j));
  if (kind == "rounded_box")
    return make_rounded_box(json_vec3(j, "center"), json_vec3(j, "half_extents"), json_real(j, "radius"),
                            json_color(j));
  if (kind == "union" || kind == "difference") {
    if (!j.contains("a") || !j.contains("b")) throw ParseError(kind + " needs children \"a\" and \"b\"");
    auto a = shape_from_json(j.at("a"));
    auto b = shape_from_json(j.at("b"));
    return kind == "union" ? make_union(std::move(a), std::move(b)) : make_difference(std::move(a), std::move(b));
  }
  throw ParseError("unknown shape kind \"" + kind + "\"");
}

/// Named shapes in file order.
using ShapeLibrary = std::vector<std::pair<std::string, AnalyticShape>>;

inline ShapeLibrary load_shape_library(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open shape file " + path.string());
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (!doc.contains("shapes") || !doc.at("shapes").is_object())
    throw ParseError(path.string() + ": expected an object under \"shapes\"");
  ShapeLibrary lib;
  for (const auto& [name, value] : doc.at("shapes").items()) {
    try {
      AnalyticShape s = shape_from_json(nlohmann::json(value));
      validate_shape(s);
      lib.emplace_back(name, std::move(s));
    } catch (const Error& e) {
      throw ParseError(path.string() + ": shape \"" + name + "\": " + e.what());
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path.string() + ": shape \"" + name + "\": " + e.what());
    }
  }
  return lib;
}

inline const AnalyticShape* find_shape(const ShapeLibrary& lib, const std::string& name) {
  for (const auto& [n, s] : lib)
    if (n == name) return &s;
  return nullptr;
}

}  // namespace tpf
