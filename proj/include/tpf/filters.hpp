// Copyright 2026 The tpf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

/// Per-channel frequency modulation of triplane feature planes.
///
/// Three low-pass filters operate on each channel of each plane independently:
///   * bilinear: box-average downsample by an integer factor, then bilinear
///     upsample back to R x R on texel centers;
///   * gaussian: separable Gaussian convolution over a k x k window;
///   * bilateral: spatial Gaussian times a range Gaussian on the difference of
///     the channel value at the center and at the neighbor, normalized by the
///     sum of weights.
///
/// Borders: windows are clipped to the plane and weights renormalized over the
/// in-bounds part, so every filter maps a constant plane to itself exactly.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tpf/error.hpp"
#include "tpf/parallel.hpp"
#include "tpf/triplane.hpp"

namespace tpf {

enum class FilterKind { Bilinear, Gaussian, Bilateral };

inline std::string to_string(FilterKind k) {
  switch (k) {
    case FilterKind::Bilinear: return "bilinear";
    case FilterKind::Gaussian: return "gaussian";
    case FilterKind::Bilateral: return "bilateral";
  }
  return "?";
}

inline FilterKind parse_filter_kind(const std::string& s) {
  if (s == "bilinear") return FilterKind::Bilinear;
  if (s == "gaussian") return FilterKind::Gaussian;
  if (s == "bilateral") return FilterKind::Bilateral;
  throw InvalidArgument("unknown filter kind \"" + s + "\" (expected bilinear, gaussian or bilateral)");
}

/// Range sigma relative to the channel standard deviation when unset.
inline constexpr double kDefaultRangeSigmaScale = 0.5;

struct KernelSpec {
  FilterKind kind = FilterKind::Bilateral;
  int size = 3;                         ///< odd window side k
  std::optional<double> sigma_spatial;  ///< texels; defaults to k / 3
  std::optional<double> sigma_range;    ///< feature units; defaults to 0.5 * channel std
  int factor = 2;                       ///< bilinear downscale factor

  double spatial_sigma() const { return sigma_spatial.value_or(size / 3.0); }

  void validate() const {
    detail::require(size >= 1 && size % 2 == 1, "kernel size must be odd and >= 1");
    detail::require(spatial_sigma() > 0.0 && std::isfinite(spatial_sigma()), "spatial sigma must be positive");
    if (sigma_range) detail::require(*sigma_range > 0.0, "range sigma must be positive");
    if (kind == FilterKind::Bilinear) detail::require(factor >= 2, "bilinear factor must be >= 2");
  }

  static KernelSpec bilateral(int k) { return {FilterKind::Bilateral, k, std::nullopt, std::nullopt, 2}; }
  static KernelSpec gaussian(int k) { return {FilterKind::Gaussian, k, std::nullopt, std::nullopt, 2}; }
  static KernelSpec bilinear(int factor) { return {FilterKind::Bilinear, 1, std::nullopt, std::nullopt, factor}; }
};

/// Normalized weights exp(-d^2 / (2 sigma^2)) for d in [-k/2, k/2].
inline std::vector<double> gaussian_kernel_1d(int k, double sigma) {
  detail::require(k >= 1 && k % 2 == 1, "gaussian_kernel_1d: k must be odd and >= 1");
  detail::require(sigma > 0.0 && std::isfinite(sigma), "gaussian_kernel_1d: sigma must be positive");
  const int r = k / 2;
  std::vector<double> w(static_cast<std::size_t>(k));
  double sum = 0.0;
  for (int d = -r; d <= r; ++d) sum += (w[d + r] = std::exp(-(d * d) / (2.0 * sigma * sigma)));
  for (double& v : w) v /= sum;
  return w;
}

namespace detail {

/// Channel-planar copy of one plane: out[c][row * R + col].
inline std::vector<std::vector<double>> split_channels(const Plane& p) {
  const std::size_t n = p.texel_count();
  std::vector<std::vector<double>> out(static_cast<std::size_t>(p.channels), std::vector<double>(n));
  for (std::size_t t = 0; t < n; ++t)
    for (int c = 0; c < p.channels; ++c) out[c][t] = p.data[t * p.channels + c];
  return out;
}

inline Plane merge_channels(const std::vector<std::vector<double>>& ch, int resolution) {
  Plane p(resolution, static_cast<int>(ch.size()));
  const std::size_t n = p.texel_count();
  for (std::size_t t = 0; t < n; ++t)
    for (int c = 0; c < p.channels; ++c) p.data[t * p.channels + c] = ch[c][t];
  return p;
}

/// Population standard deviation.
inline double stddev(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

/// Range sigma for one channel: explicit value, else a fraction of its spread.
/// A constant channel gets 1.0 (any positive value leaves it unchanged).
inline double resolve_range_sigma(const KernelSpec& spec, const std::vector<double>& channel) {
  if (spec.sigma_range) return *spec.sigma_range;
  const double s = kDefaultRangeSigmaScale * stddev(channel);
  return s > 0.0 ? s : 1.0;
}

/// exp(x) for x <= 0, accurate to a few ulp, written without calls or branches
/// so the bilateral inner loop vectorizes. Inputs below -708 flush to zero.
inline double exp_nonpositive(double x) {
  constexpr double kLog2e = 1.4426950408889634;
  constexpr double kLn2Hi = 6.93147180369123816490e-01;
  constexpr double kLn2Lo = 1.90821492927058770002e-10;
  constexpr double kShift = 0x1.8p52;
  const bool tiny = x < -708.0;
  x = tiny ? -708.0 : x;
  const double shifted = x * kLog2e + kShift;  // integer part lands in the low mantissa bits
  const double kd = shifted - kShift;
  const double r = (x - kd * kLn2Hi) - kd * kLn2Lo;  // |r| <= ln2 / 2
  // Taylor series to r^12 in Horner form; truncation error < 1e-17 relative.
  double p = 1.0 / 479001600.0;
  p = p * r + 1.0 / 39916800.0;
  p = p * r + 1.0 / 3628800.0;
  p = p * r + 1.0 / 362880.0;
  p = p * r + 1.0 / 40320.0;
  p = p * r + 1.0 / 5040.0;
  p = p * r + 1.0 / 720.0;
  p = p * r + 1.0 / 120.0;
  p = p * r + 1.0 / 24.0;
  p = p * r + 1.0 / 6.0;
  p = p * r + 0.5;
  p = p * r + 1.0;
  p = p * r + 1.0;
  const std::uint64_t biased = std::bit_cast<std::uint64_t>(shifted) - std::bit_cast<std::uint64_t>(kShift) + 1023;
  const double scale = std::bit_cast<double>(biased << 52);
  return tiny ? 0.0 : p * scale;
}

/// One window offset of the bilateral filter over a row segment of length `n`.
[[gnu::noinline]] inline void bilateral_accumulate(double* __restrict num, double* __restrict den,
                                                   double* __restrict lo, double* __restrict hi,
                                                   const double* __restrict nb, const double* __restrict center,
                                                   int n, double ws, double inv) {
  for (int x = 0; x < n; ++x) {
    const double diff = nb[x] - center[x];
    const double w = ws * exp_nonpositive(-(diff * diff) * inv);
    num[x] += w * diff;
    den[x] += w;
    lo[x] = std::min(lo[x], nb[x]);
    hi[x] = std::max(hi[x], nb[x]);
  }
}

/// One separable Gaussian pass along rows (horizontal) or columns.
inline void gaussian_pass(const std::vector<double>& src, std::vector<double>& dst, int R,
                          const std::vector<double>& w, bool horizontal) {
  const int r = static_cast<int>(w.size()) / 2;
  for (int row = 0; row < R; ++row) {
    for (int col = 0; col < R; ++col) {
      const int pos = horizontal ? col : row;
      const double center = src[static_cast<std::size_t>(row) * R + col];
      double num = 0.0;
      double den = 0.0;
      double lo = center;
      double hi = center;
      for (int d = std::max(-r, -pos); d <= std::min(r, R - 1 - pos); ++d) {
        const double v = horizontal ? src[static_cast<std::size_t>(row) * R + col + d]
                                    : src[static_cast<std::size_t>(row + d) * R + col];
        num += w[d + r] * (v - center);
        den += w[d + r];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      dst[static_cast<std::size_t>(row) * R + col] = std::clamp(center + num / den, lo, hi);
    }
  }
}

inline void require_kind(const KernelSpec& spec, FilterKind kind, const char* op) {
  spec.validate();
  if (spec.kind != kind) throw InvalidArgument(std::string(op) + ": kernel kind is " + to_string(spec.kind));
}

}  // namespace detail

/// Separable Gaussian blur of every channel (horizontal pass, then vertical).
inline Plane filter_gaussian(const Plane& plane, const KernelSpec& spec) {
  detail::require_kind(spec, FilterKind::Gaussian, "filter_gaussian");
  if (spec.size == 1) return plane;
  const auto w = gaussian_kernel_1d(spec.size, spec.spatial_sigma());
  auto ch = detail::split_channels(plane);
  const int R = plane.resolution;
  parallel_for(0, ch.size(), [&](std::size_t c) {
    std::vector<double> tmp(ch[c].size());
    detail::gaussian_pass(ch[c], tmp, R, w, true);
    detail::gaussian_pass(tmp, ch[c], R, w, false);
  });
  return detail::merge_channels(ch, R);
}

/// Edge-preserving bilateral filter, per channel.
///
/// out(m) = sum_n W(m,n) t(n) / sum_n W(m,n) over the clipped k x k window,
/// W(m,n) = exp(-|m-n|^2 / (2 sigma_s^2)) * exp(-(t(m)-t(n))^2 / (2 sigma_r^2)).
/// Implemented row-vectorized: for each window offset the whole row is
/// processed at once, accumulating in a fixed (dy, dx) order per pixel.
inline Plane filter_bilateral(const Plane& plane, const KernelSpec& spec) {
  detail::require_kind(spec, FilterKind::Bilateral, "filter_bilateral");
  if (spec.size == 1) return plane;
  const int R = plane.resolution;
  const int r = spec.size / 2;
  const double ss = spec.spatial_sigma();
  auto ch = detail::split_channels(plane);

  std::vector<double> spatial(static_cast<std::size_t>(spec.size) * spec.size);
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx)
      spatial[static_cast<std::size_t>(dy + r) * spec.size + dx + r] = std::exp(-(dx * dx + dy * dy) / (2.0 * ss * ss));

  parallel_for(0, ch.size(), [&](std::size_t c) {
    const std::vector<double>& src = ch[c];
    const double sr = detail::resolve_range_sigma(spec, src);
    const double inv = 1.0 / (2.0 * sr * sr);
    std::vector<double> out(src.size());
    std::vector<double> num(static_cast<std::size_t>(R));
    std::vector<double> den(static_cast<std::size_t>(R));
    std::vector<double> lo(static_cast<std::size_t>(R));
    std::vector<double> hi(static_cast<std::size_t>(R));
    for (int row = 0; row < R; ++row) {
      const double* center = src.data() + static_cast<std::size_t>(row) * R;
      std::fill(num.begin(), num.end(), 0.0);
      std::fill(den.begin(), den.end(), 0.0);
      std::copy(center, center + R, lo.begin());
      std::copy(center, center + R, hi.begin());
      for (int dy = std::max(-r, -row); dy <= std::min(r, R - 1 - row); ++dy) {
        const double* nrow = src.data() + static_cast<std::size_t>(row + dy) * R;
        for (int dx = -r; dx <= r; ++dx) {
          const double ws = spatial[static_cast<std::size_t>(dy + r) * spec.size + dx + r];
          const int x0 = std::max(0, -dx);
          const int x1 = std::min(R, R - dx);
          detail::bilateral_accumulate(num.data() + x0, den.data() + x0, lo.data() + x0, hi.data() + x0,
                                       nrow + dx + x0, center + x0, x1 - x0, ws, inv);
        }
      }
      double* o = out.data() + static_cast<std::size_t>(row) * R;
      for (int x = 0; x < R; ++x) o[x] = std::clamp(center[x] + num[x] / den[x], lo[x], hi[x]);
    }
    ch[c] = std::move(out);
  });
  return detail::merge_channels(ch, R);
}

/// Straightforward bilateral filter used as a test and benchmark oracle.
inline Plane filter_bilateral_reference(const Plane& plane, const KernelSpec& spec) {
  detail::require_kind(spec, FilterKind::Bilateral, "filter_bilateral_reference");
  const int R = plane.resolution;
  const int C = plane.channels;
  const int r = spec.size / 2;
  const double ss = spec.spatial_sigma();
  Plane out(R, C);
  for (int c = 0; c < C; ++c) {
    std::vector<double> channel(plane.texel_count());
    for (std::size_t t = 0; t < channel.size(); ++t) channel[t] = plane.data[t * C + c];
    const double sr = detail::resolve_range_sigma(spec, channel);
    for (int my = 0; my < R; ++my) {
      for (int mx = 0; mx < R; ++mx) {
        const double tm = plane.at(my, mx, c);
        double num = 0.0;
        double den = 0.0;
        for (int ny = my - r; ny <= my + r; ++ny) {
          for (int nx = mx - r; nx <= mx + r; ++nx) {
            if (ny < 0 || ny >= R || nx < 0 || nx >= R) continue;
            const double tn = plane.at(ny, nx, c);
            const double d2 = static_cast<double>((nx - mx) * (nx - mx) + (ny - my) * (ny - my));
            const double w = std::exp(-d2 / (2.0 * ss * ss)) * std::exp(-(tm - tn) * (tm - tn) / (2.0 * sr * sr));
            num += w * (tn - tm);
            den += w;
          }
        }
        out.at(my, mx, c) = tm + num / den;
      }
    }
  }
  return out;
}

/// Box-average downsample by `factor`, then texel-center bilinear upsample.
inline Plane filter_bilinear_resample(const Plane& plane, int factor) {
  detail::require(factor >= 2, "bilinear factor must be >= 2");
  const int R = plane.resolution;
  if (R % factor != 0)
    throw InvalidArgument("bilinear factor " + std::to_string(factor) + " does not divide resolution " +
                          std::to_string(R));
  const int L = R / factor;
  const int C = plane.channels;
  auto ch = detail::split_channels(plane);

  // Source coordinate of every output texel center in low-res texel units.
  struct Tap {
    int i0, i1;
    double f;
  };
  std::vector<Tap> taps(static_cast<std::size_t>(R));
  for (int i = 0; i < R; ++i) {
    const double x = std::clamp((i + 0.5) / R * L - 0.5, 0.0, static_cast<double>(L - 1));
    const int i0 = std::min(static_cast<int>(x), std::max(L - 2, 0));
    taps[i] = {i0, std::min(i0 + 1, L - 1), x - i0};
  }

  parallel_for(0, static_cast<std::size_t>(C), [&](std::size_t c) {
    const std::vector<double>& src = ch[c];
    std::vector<double> low(static_cast<std::size_t>(L) * L);
    for (int by = 0; by < L; ++by) {
      for (int bx = 0; bx < L; ++bx) {
        const double base = src[static_cast<std::size_t>(by * factor) * R + bx * factor];
        double acc = 0.0;
        for (int y = 0; y < factor; ++y)
          for (int x = 0; x < factor; ++x) acc += src[static_cast<std::size_t>(by * factor + y) * R + bx * factor + x] - base;
        low[static_cast<std::size_t>(by) * L + bx] = base + acc / (factor * factor);
      }
    }
    std::vector<double> out(src.size());
    for (int row = 0; row < R; ++row) {
      const Tap& ty = taps[row];
      for (int col = 0; col < R; ++col) {
        const Tap& tx = taps[col];
        const double a = low[static_cast<std::size_t>(ty.i0) * L + tx.i0];
        const double b = low[static_cast<std::size_t>(ty.i0) * L + tx.i1];
        const double cc = low[static_cast<std::size_t>(ty.i1) * L + tx.i0];
        const double d = low[static_cast<std::size_t>(ty.i1) * L + tx.i1];
        const double top = a + tx.f * (b - a);
        const double bottom = cc + tx.f * (d - cc);
        const double v = top + ty.f * (bottom - top);
        out[static_cast<std::size_t>(row) * R + col] = std::clamp(v, std::min({a, b, cc, d}), std::max({a, b, cc, d}));
      }
    }
    ch[c] = std::move(out);
  });
  return detail::merge_channels(ch, R);
}

/// Dispatches on spec.kind.
inline Plane filter_plane(const Plane& plane, const KernelSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case FilterKind::Bilinear: return filter_bilinear_resample(plane, spec.factor);
    case FilterKind::Gaussian: return filter_gaussian(plane, spec);
    case FilterKind::Bilateral: return filter_bilateral(plane, spec);
  }
  throw InvalidArgument("unknown filter kind");
}

/// Applies the filter to every channel of all three planes.
inline Triplane modulate_triplane(const Triplane& tp, const KernelSpec& spec) {
  return Triplane({filter_plane(tp.plane(0), spec), filter_plane(tp.plane(1), spec), filter_plane(tp.plane(2), spec)},
                  tp.extent());
}

/// Mean squared 5-point Laplacian over all texels and channels (clamped borders).
inline double laplacian_energy(const Plane& p) {
  const int R = p.resolution;
  const int C = p.channels;
  double acc = 0.0;
  for (int row = 0; row < R; ++row) {
    for (int col = 0; col < R; ++col) {
      const int up = std::max(row - 1, 0), down = std::min(row + 1, R - 1);
      const int left = std::max(col - 1, 0), right = std::min(col + 1, R - 1);
      for (int c = 0; c < C; ++c) {
        const double l = p.at(up, col, c) + p.at(down, col, c) + p.at(row, left, c) + p.at(row, right, c) -
                         4.0 * p.at(row, col, c);
        acc += l * l;
      }
    }
  }
  return acc / (static_cast<double>(R) * R * C);
}

inline double laplacian_energy(const Triplane& tp) {
  return (laplacian_energy(tp.plane(0)) + laplacian_energy(tp.plane(1)) + laplacian_energy(tp.plane(2))) / 3.0;
}

}  // namespace tpf
