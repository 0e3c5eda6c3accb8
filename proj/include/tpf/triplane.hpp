// Copyright 2026 The tpf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

/// Triplane field representation.
///
/// A triplane stores three axis-aligned feature planes (XY, XZ, YZ), each an
/// R x R grid of C-channel texels. The feature of a 3D point is the sum of the
/// bilinear samples of its three projections; a small decoder maps that
/// C-vector to a signed distance and an RGB color.
///
/// Coordinate conventions:
///   * plane storage is row-major with the channel index fastest:
///     data[(row * R + col) * C + channel]; `col` follows u and `row` follows v.
///   * texel (row, col) has its center at u = (col + 0.5) / R, v = (row + 0.5) / R.
///   * sampling outside [0, 1] clamps to the border texel.
///   * XY uses (u, v) = (x', y'), XZ uses (x', z'), YZ uses (y', z') with
///     x' = (x / extent + 1) / 2.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "tpf/error.hpp"
#include "tpf/parallel.hpp"
#include "tpf/rng.hpp"
#include "tpf/vec3.hpp"

namespace tpf {

/// One R x R x C feature plane.
struct Plane {
  int resolution = 0;
  int channels = 0;
  std::vector<double> data;

  Plane() = default;
  Plane(int resolution_, int channels_, double fill = 0.0)
      : resolution(resolution_),
        channels(channels_),
        data(static_cast<std::size_t>(resolution_) * resolution_ * channels_, fill) {
    detail::require(resolution_ >= 1 && channels_ >= 1, "plane needs resolution >= 1 and channels >= 1");
  }

  std::size_t index(int row, int col, int channel) const {
    return (static_cast<std::size_t>(row) * resolution + col) * channels + channel;
  }
  double& at(int row, int col, int channel) { return data[index(row, col, channel)]; }
  double at(int row, int col, int channel) const { return data[index(row, col, channel)]; }

  std::size_t texel_count() const { return static_cast<std::size_t>(resolution) * resolution; }

  friend bool operator==(const Plane&, const Plane&) = default;
};

enum class PlaneAxis { XY = 0, XZ = 1, YZ = 2 };

namespace detail {

/// Four texel offsets and bilinear weights for one sample location.
struct BilinearTap {
  std::array<std::size_t, 4> offset;  // texel start index (already multiplied by C)
  std::array<double, 4> weight;
};

inline BilinearTap bilinear_tap(int resolution, int channels, double u, double v) {
  const double last = static_cast<double>(resolution - 1);
  const double x = std::clamp(u * resolution - 0.5, 0.0, last);
  const double y = std::clamp(v * resolution - 0.5, 0.0, last);
  const int hi = std::max(resolution - 2, 0);
  const int c0 = std::min(static_cast<int>(x), hi);
  const int r0 = std::min(static_cast<int>(y), hi);
  const int c1 = std::min(c0 + 1, resolution - 1);
  const int r1 = std::min(r0 + 1, resolution - 1);
  const double fx = x - c0;
  const double fy = y - r0;
  const auto at = [&](int r, int c) {
    return (static_cast<std::size_t>(r) * resolution + c) * static_cast<std::size_t>(channels);
  };
  return {{at(r0, c0), at(r0, c1), at(r1, c0), at(r1, c1)},
          {(1.0 - fx) * (1.0 - fy), fx * (1.0 - fy), (1.0 - fx) * fy, fx * fy}};
}

/// out[c] (+)= bilinear sample of `plane`; `accumulate` selects += over =.
inline void sample_into(const Plane& plane, const BilinearTap& tap, std::span<double> out, bool accumulate) {
  const int C = plane.channels;
  const double* d = plane.data.data();
  for (int c = 0; c < C; ++c) {
    const double s = tap.weight[0] * d[tap.offset[0] + c] + tap.weight[1] * d[tap.offset[1] + c] +
                     tap.weight[2] * d[tap.offset[2] + c] + tap.weight[3] * d[tap.offset[3] + c];
    out[c] = accumulate ? out[c] + s : s;
  }
}

inline void require_finite_uv(double u, double v) {
  if (!std::isfinite(u) || !std::isfinite(v)) throw InvalidArgument("plane sample coordinates must be finite");
}

}  // namespace detail

/// Bilinear sample of `plane` at (u, v) with clamp-to-edge borders.
inline std::vector<double> sample_plane(const Plane& plane, double u, double v) {
  detail::require_finite_uv(u, v);
  detail::require(!plane.data.empty(), "cannot sample an empty plane");
  std::vector<double> out(static_cast<std::size_t>(plane.channels));
  detail::sample_into(plane, detail::bilinear_tap(plane.resolution, plane.channels, u, v), out, false);
  return out;
}

struct TriplaneConfig {
  int resolution = 128;
  int channels = 8;
  int hidden = 16;
  double extent = 0.5;
};

class Triplane {
 public:
  Triplane() = default;

  Triplane(int resolution, int channels, double extent = 0.5)
      : extent_(extent),
        planes_{Plane(resolution, channels), Plane(resolution, channels), Plane(resolution, channels)} {
    detail::require(resolution >= 2, "triplane resolution must be >= 2");
    detail::require(channels >= 1, "triplane channels must be >= 1");
    detail::require(std::isfinite(extent) && extent > 0.0, "triplane extent must be positive");
  }

  Triplane(std::array<Plane, 3> planes, double extent) : extent_(extent), planes_(std::move(planes)) {
    detail::require(std::isfinite(extent) && extent > 0.0, "triplane extent must be positive");
    const int R = planes_[0].resolution;
    const int C = planes_[0].channels;
    detail::require(R >= 2 && C >= 1, "triplane needs resolution >= 2 and channels >= 1");
    for (const auto& p : planes_) {
      detail::require(p.resolution == R && p.channels == C, "triplane planes must share resolution and channels");
      detail::require(p.data.size() == p.texel_count() * static_cast<std::size_t>(C),
                      "plane data size does not match its shape");
    }
    check_finite();
  }

  int resolution() const { return planes_[0].resolution; }
  int channels() const { return planes_[0].channels; }
  double extent() const { return extent_; }

  const Plane& plane(PlaneAxis a) const { return planes_[static_cast<int>(a)]; }
  Plane& plane(PlaneAxis a) { return planes_[static_cast<int>(a)]; }
  const Plane& plane(int i) const { return planes_[i]; }
  Plane& plane(int i) { return planes_[i]; }
  const std::array<Plane, 3>& planes() const { return planes_; }

  void check_finite() const {
    for (const auto& p : planes_)
      for (double v : p.data)
        if (!std::isfinite(v)) throw InvalidArgument("triplane contains a non-finite feature");
  }

  /// Texel-wise sum; both operands must share shape and extent.
  friend Triplane operator+(const Triplane& a, const Triplane& b) {
    detail::require(a.resolution() == b.resolution() && a.channels() == b.channels() && a.extent_ == b.extent_,
                    "triplane shapes differ");
    Triplane out = a;
    for (int i = 0; i < 3; ++i)
      for (std::size_t k = 0; k < out.planes_[i].data.size(); ++k) out.planes_[i].data[k] += b.planes_[i].data[k];
    return out;
  }

  friend bool operator==(const Triplane&, const Triplane&) = default;

 private:
  double extent_ = 0.5;
  std::array<Plane, 3> planes_;
};

/// Decoder from a summed C-vector to an SDF value and an RGB color.
///
/// With hidden width H > 0 both heads read h = tanh(W1 f + b1); with H = 0 they
/// read f directly. All parameters live in one flat vector, laid out as
/// [W1 (H x C, row-major), b1 (H), sdf_w (D), sdf_b (1), color_w (3 x D), color_b (3)]
/// with D = H if H > 0 else C.
class FieldDecoder {
 public:
  FieldDecoder() = default;

  FieldDecoder(int channels, int hidden) : channels_(channels), hidden_(hidden) {
    detail::require(channels >= 1, "decoder channels must be >= 1");
    detail::require(hidden >= 0, "decoder hidden width must be >= 0");
    params_.assign(parameter_count(channels, hidden), 0.0);
  }

  /// Deterministic scaled-normal initialization.
  static FieldDecoder random(int channels, int hidden, Rng& rng) {
    FieldDecoder d(channels, hidden);
    const auto fill = [&](std::span<double> s, double scale) {
      for (double& v : s) v = scale * rng.normal();
    };
    if (hidden > 0) fill(d.hidden_weights(), 1.0 / std::sqrt(static_cast<double>(channels)));
    const double head = 1.0 / std::sqrt(static_cast<double>(d.head_inputs()));
    fill(d.sdf_weights(), head);
    fill(d.color_weights(), head);
    return d;
  }

  static std::size_t parameter_count(int channels, int hidden) {
    const std::size_t C = static_cast<std::size_t>(channels);
    const std::size_t H = static_cast<std::size_t>(hidden);
    const std::size_t D = hidden > 0 ? H : C;
    return H * C + H + D + 1 + 3 * D + 3;
  }

  int channels() const { return channels_; }
  int hidden() const { return hidden_; }
  int head_inputs() const { return hidden_ > 0 ? hidden_ : channels_; }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  std::span<double> hidden_weights() { return slice(0, hw_size()); }
  std::span<double> hidden_bias() { return slice(hw_size(), hidden_); }
  std::span<double> sdf_weights() { return slice(sdf_offset(), head_inputs()); }
  double& sdf_bias() { return params_[sdf_offset() + head_inputs()]; }
  std::span<double> color_weights() { return slice(color_offset(), 3 * head_inputs()); }
  std::span<double> color_bias() { return slice(color_offset() + 3 * head_inputs(), 3); }

  std::span<const double> hidden_weights() const { return cslice(0, hw_size()); }
  std::span<const double> hidden_bias() const { return cslice(hw_size(), hidden_); }
  std::span<const double> sdf_weights() const { return cslice(sdf_offset(), head_inputs()); }
  double sdf_bias() const { return params_[sdf_offset() + head_inputs()]; }
  std::span<const double> color_weights() const { return cslice(color_offset(), 3 * head_inputs()); }
  std::span<const double> color_bias() const { return cslice(color_offset() + 3 * head_inputs(), 3); }

  /// Zeroes the color head; the SDF path is untouched.
  void zero_color_head() {
    for (double& v : color_weights()) v = 0.0;
    for (double& v : color_bias()) v = 0.0;
  }

  friend bool operator==(const FieldDecoder&, const FieldDecoder&) = default;

 private:
  std::size_t hw_size() const { return static_cast<std::size_t>(hidden_) * channels_; }
  std::size_t sdf_offset() const { return hw_size() + hidden_; }
  std::size_t color_offset() const { return sdf_offset() + head_inputs() + 1; }
  std::span<double> slice(std::size_t off, std::size_t n) { return std::span<double>(params_).subspan(off, n); }
  std::span<const double> cslice(std::size_t off, std::size_t n) const {
    return std::span<const double>(params_).subspan(off, n);
  }

  int channels_ = 0;
  int hidden_ = 0;
  std::vector<double> params_;
};

namespace detail {

inline double squash(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Writes the head input (tanh activations, or f itself when H = 0) into `h`.
inline std::span<const double> head_input(std::span<const double> f, const FieldDecoder& dec, std::span<double> h) {
  const int H = dec.hidden();
  if (H == 0) return f;
  const int C = dec.channels();
  const auto W = dec.hidden_weights();
  const auto b = dec.hidden_bias();
  for (int j = 0; j < H; ++j) {
    double z = b[j];
    const double* row = W.data() + static_cast<std::size_t>(j) * C;
    for (int c = 0; c < C; ++c) z += row[c] * f[c];
    h[j] = std::tanh(z);
  }
  return h.first(static_cast<std::size_t>(H));
}

inline double sdf_head(std::span<const double> h, const FieldDecoder& dec) {
  const auto w = dec.sdf_weights();
  double s = dec.sdf_bias();
  for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * h[j];
  return s;
}

inline Rgb color_head(std::span<const double> h, const FieldDecoder& dec) {
  const auto W = dec.color_weights();
  const auto b = dec.color_bias();
  const std::size_t D = h.size();
  Rgb rgb{};
  for (int k = 0; k < 3; ++k) {
    double z = b[k];
    for (std::size_t j = 0; j < D; ++j) z += W[k * D + j] * h[j];
    rgb[k] = squash(z);
  }
  return rgb;
}

inline void require_features(std::span<const double> f, const FieldDecoder& dec) {
  if (f.size() != static_cast<std::size_t>(dec.channels()))
    throw InvalidArgument("feature vector length does not match decoder channels");
}

/// Evaluates features at `p` into `out` (size C); p must be finite.
inline void eval_features_into(const Triplane& tp, const Vec3& p, std::span<double> out) {
  const double e = tp.extent();
  const double x = (std::clamp(p.x, -e, e) / e + 1.0) * 0.5;
  const double y = (std::clamp(p.y, -e, e) / e + 1.0) * 0.5;
  const double z = (std::clamp(p.z, -e, e) / e + 1.0) * 0.5;
  const int R = tp.resolution();
  const int C = tp.channels();
  sample_into(tp.plane(PlaneAxis::XY), bilinear_tap(R, C, x, y), out, false);
  sample_into(tp.plane(PlaneAxis::XZ), bilinear_tap(R, C, x, z), out, true);
  sample_into(tp.plane(PlaneAxis::YZ), bilinear_tap(R, C, y, z), out, true);
}

}  // namespace detail

/// Summed feature of the three plane projections of `p` (clamped to the cube).
inline std::vector<double> eval_features(const Triplane& tp, const Vec3& p) {
  if (!is_finite(p)) throw InvalidArgument("eval_features: point must be finite");
  std::vector<double> out(static_cast<std::size_t>(tp.channels()));
  detail::eval_features_into(tp, p, out);
  return out;
}

inline double decode_sdf(std::span<const double> f, const FieldDecoder& dec) {
  detail::require_features(f, dec);
  std::vector<double> h(static_cast<std::size_t>(dec.hidden()));
  return detail::sdf_head(detail::head_input(f, dec, h), dec);
}

inline Rgb decode_color(std::span<const double> f, const FieldDecoder& dec) {
  detail::require_features(f, dec);
  std::vector<double> h(static_cast<std::size_t>(dec.hidden()));
  return detail::color_head(detail::head_input(f, dec, h), dec);
}

/// Dense n x n x n scalar lattice over [-extent, extent]^3, endpoints included.
/// Index (i, j, k) runs along (x, y, z); storage is values[(i * n + j) * n + k].
struct Grid3 {
  int n = 0;
  double extent = 0.5;
  std::vector<double> values;

  Grid3() = default;
  Grid3(int n_, double extent_, double fill = 0.0)
      : n(n_), extent(extent_), values(static_cast<std::size_t>(n_) * n_ * n_, fill) {}

  std::size_t index(int i, int j, int k) const { return (static_cast<std::size_t>(i) * n + j) * n + k; }
  double& at(int i, int j, int k) { return values[index(i, j, k)]; }
  double at(int i, int j, int k) const { return values[index(i, j, k)]; }

  /// Lattice coordinate of index i along any axis.
  double coord(int i) const { return -extent + 2.0 * extent * i / (n - 1); }
  Vec3 point(int i, int j, int k) const { return {coord(i), coord(j), coord(k)}; }

  friend bool operator==(const Grid3&, const Grid3&) = default;
};

/// Decoded SDF on the regular lattice.
///
/// Plane samples are cached per lattice row pair and summed in the same order as
/// eval_features, so every value equals decode_sdf(eval_features(p)) exactly.
inline Grid3 eval_sdf_grid(const Triplane& tp, const FieldDecoder& dec, int n) {
  detail::require(n >= 2, "eval_sdf_grid: n must be >= 2");
  detail::require(dec.channels() == tp.channels(), "decoder channels do not match triplane");
  const int C = tp.channels();
  const int R = tp.resolution();
  Grid3 grid(n, tp.extent());

  // Normalized coordinate of each lattice index, matching eval_features.
  std::vector<double> t(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double e = tp.extent();
    t[i] = (std::clamp(grid.coord(i), -e, e) / e + 1.0) * 0.5;
  }
  const auto table = [&](PlaneAxis axis) {
    std::vector<double> out(static_cast<std::size_t>(n) * n * C);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        detail::sample_into(tp.plane(axis), detail::bilinear_tap(R, C, t[a], t[b]),
                            std::span<double>(out).subspan((static_cast<std::size_t>(a) * n + b) * C, C), false);
    return out;
  };
  const std::vector<double> xy = table(PlaneAxis::XY);
  const std::vector<double> xz = table(PlaneAxis::XZ);
  const std::vector<double> yz = table(PlaneAxis::YZ);

  parallel_for(0, static_cast<std::size_t>(n), [&](std::size_t ii) {
    const int i = static_cast<int>(ii);
    std::vector<double> f(static_cast<std::size_t>(C));
    std::vector<double> h(static_cast<std::size_t>(dec.hidden()));
    for (int j = 0; j < n; ++j) {
      const double* fxy = xy.data() + (static_cast<std::size_t>(i) * n + j) * C;
      for (int k = 0; k < n; ++k) {
        const double* fxz = xz.data() + (static_cast<std::size_t>(i) * n + k) * C;
        const double* fyz = yz.data() + (static_cast<std::size_t>(j) * n + k) * C;
        for (int c = 0; c < C; ++c) f[c] = fxy[c] + fxz[c] + fyz[c];
        grid.at(i, j, k) = detail::sdf_head(detail::head_input(f, dec, h), dec);
      }
    }
  });
  return grid;
}

}  // namespace tpf
