// Copyright 2026 The tpf Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

/// Fitting a triplane and decoder to an analytic shape.
///
/// Loss on a batch of N points, the first `color_count` of which also carry a
/// color target:
///   L = mean_i (sdf_i - target_i)^2 + color_weight * mean_{j,k} (rgb_jk - target_jk)^2
/// Gradients are propagated by hand through the decoder and the bilinear plane
/// taps. Parameters are updated with Adam; both learning rates stay constant
/// for the first `decay_start` fraction of iterations and then fall linearly
/// toward `decay_floor` times their initial value.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "tpf/error.hpp"
#include "tpf/rng.hpp"
#include "tpf/shapes.hpp"
#include "tpf/triplane.hpp"

namespace tpf {

struct FitConfig {
  int iterations = 2000;
  double step_size = 0.01;          // plane learning rate
  double decoder_step_size = 0.003;  // decoder learning rate
  int batch_size = 2048;
  double surface_band_fraction = 0.6;
  double surface_band = 0.05;
  double color_weight = 0.1;
  double decay_start = 0.5;
  double decay_floor = 0.02;
  double init_scale = 0.01;
  std::uint64_t seed = 0;

  void validate() const {
    detail::require(iterations >= 1, "fit: iterations must be >= 1");
    detail::require(step_size > 0.0 && decoder_step_size > 0.0, "fit: step sizes must be > 0");
    detail::require(batch_size >= 1, "fit: batch size must be >= 1");
    detail::require(surface_band_fraction >= 0.0 && surface_band_fraction <= 1.0,
                    "fit: surface band fraction must lie in [0, 1]");
    detail::require(surface_band > 0.0, "fit: surface band must be > 0");
    detail::require(color_weight >= 0.0, "fit: color weight must be >= 0");
    detail::require(decay_start >= 0.0 && decay_start <= 1.0, "fit: decay start must lie in [0, 1]");
    detail::require(decay_floor > 0.0 && decay_floor <= 1.0, "fit: decay floor must lie in (0, 1]");
    detail::require(init_scale >= 0.0, "fit: init scale must be >= 0");
  }
};

/// Training points; the first `color_count` entries also have color targets.
struct FitBatch {
  std::vector<Vec3> points;
  std::vector<double> sdf;
  std::vector<Rgb> color;
  std::size_t color_count = 0;
};

/// Gradient of the fit loss, shaped like its parameters.
struct FitGradient {
  std::array<std::vector<double>, 3> planes;
  std::vector<double> decoder;
};

/// Samples `n` points: the first round(n * band_fraction) are drawn uniformly
/// from {|sdf| < band} by rejection, the rest uniformly from the cube. Colors
/// are attached to the near-surface points.
inline FitBatch sample_fit_batch(const AnalyticShape& shape, int n, double band_fraction, double band, double extent,
                                 Rng& rng) {
  FitBatch b;
  const int near = static_cast<int>(std::lround(n * band_fraction));
  b.points.reserve(static_cast<std::size_t>(n));
  b.sdf.reserve(static_cast<std::size_t>(n));
  const auto draw = [&] { return Vec3{rng.uniform(-extent, extent), rng.uniform(-extent, extent), rng.uniform(-extent, extent)}; };
  long long attempts = 0;
  while (static_cast<int>(b.points.size()) < near) {
    const Vec3 p = draw();
    const auto ev = detail::evaluate(shape, p);
    if (std::abs(ev.sdf) < band) {
      b.points.push_back(p);
      b.sdf.push_back(ev.sdf);
      b.color.push_back(ev.owner->color);
    }
    if (++attempts > 1000LL * n + 100000)
      throw InvalidArgument("fit: surface band is never hit; is the shape inside the cube?");
  }
  b.color_count = b.points.size();
  while (static_cast<int>(b.points.size()) < n) {
    const Vec3 p = draw();
    b.points.push_back(p);
    b.sdf.push_back(analytic_sdf(shape, p));
  }
  return b;
}

/// Loss value on `batch`; when `grad` is non-null it receives dL/dparams.
inline double fit_loss(const Triplane& tp, const FieldDecoder& dec, const FitBatch& batch, double color_weight,
                       FitGradient* grad = nullptr) {
  detail::require(dec.channels() == tp.channels(), "decoder channels do not match triplane");
  detail::require(!batch.points.empty() && batch.sdf.size() == batch.points.size(), "fit: malformed batch");
  detail::require(batch.color_count <= batch.points.size() && batch.color.size() >= batch.color_count,
                  "fit: malformed batch colors");
  const int C = tp.channels();
  const int R = tp.resolution();
  const int H = dec.hidden();
  const int D = dec.head_inputs();
  const double e = tp.extent();
  const std::size_t N = batch.points.size();
  const std::size_t Nc = batch.color_count;

  const auto W1 = dec.hidden_weights();
  const auto w2 = dec.sdf_weights();
  const auto Wc = dec.color_weights();

  if (grad) {
    for (int a = 0; a < 3; ++a) grad->planes[a].assign(tp.plane(a).data.size(), 0.0);
    grad->decoder.assign(dec.params().size(), 0.0);
  }
  // Gradient views into grad->decoder, mirroring the parameter layout.
  double* gW1 = nullptr;
  double* gb1 = nullptr;
  double* gw2 = nullptr;
  double* gb2 = nullptr;
  double* gWc = nullptr;
  double* gbc = nullptr;
  if (grad) {
    double* g = grad->decoder.data();
    gW1 = g;
    gb1 = gW1 + static_cast<std::size_t>(H) * C;
    gw2 = gb1 + H;
    gb2 = gw2 + D;
    gWc = gb2 + 1;
    gbc = gWc + 3 * D;
  }

  std::vector<double> f(static_cast<std::size_t>(C)), hbuf(static_cast<std::size_t>(H));
  std::vector<double> dh(static_cast<std::size_t>(D)), df(static_cast<std::size_t>(C));
  std::array<detail::BilinearTap, 3> taps;
  double sdf_sum = 0.0, color_sum = 0.0;
  const double sdf_scale = 2.0 / static_cast<double>(N);
  const double color_scale = Nc > 0 ? color_weight * 2.0 / (3.0 * static_cast<double>(Nc)) : 0.0;

  for (std::size_t i = 0; i < N; ++i) {
    const Vec3& p = batch.points[i];
    const double x = (std::clamp(p.x, -e, e) / e + 1.0) * 0.5;
    const double y = (std::clamp(p.y, -e, e) / e + 1.0) * 0.5;
    const double z = (std::clamp(p.z, -e, e) / e + 1.0) * 0.5;
    taps[0] = detail::bilinear_tap(R, C, x, y);
    taps[1] = detail::bilinear_tap(R, C, x, z);
    taps[2] = detail::bilinear_tap(R, C, y, z);
    for (int a = 0; a < 3; ++a) detail::sample_into(tp.plane(a), taps[a], f, a > 0);

    const std::span<const double> h = detail::head_input(f, dec, hbuf);
    const double s = detail::sdf_head(h, dec);
    const double ds_err = s - batch.sdf[i];
    sdf_sum += ds_err * ds_err;
    const bool has_color = i < Nc;
    std::array<double, 3> dlogit{};
    if (has_color) {
      const Rgb rgb = detail::color_head(h, dec);
      for (int k = 0; k < 3; ++k) {
        const double d = rgb[k] - batch.color[i][k];
        color_sum += d * d;
        dlogit[k] = color_scale * d * rgb[k] * (1.0 - rgb[k]);
      }
    }
    if (!grad) continue;

    const double ds = sdf_scale * ds_err;
    *gb2 += ds;
    for (int j = 0; j < D; ++j) {
      gw2[j] += ds * h[j];
      dh[j] = ds * w2[j];
    }
    if (has_color)
      for (int k = 0; k < 3; ++k) {
        gbc[k] += dlogit[k];
        for (int j = 0; j < D; ++j) {
          gWc[k * D + j] += dlogit[k] * h[j];
          dh[j] += dlogit[k] * Wc[k * D + j];
        }
      }
    if (H > 0) {
      std::fill(df.begin(), df.end(), 0.0);
      for (int j = 0; j < H; ++j) {
        const double dz = dh[j] * (1.0 - h[j] * h[j]);
        gb1[j] += dz;
        double* gw = gW1 + static_cast<std::size_t>(j) * C;
        const double* w = W1.data() + static_cast<std::size_t>(j) * C;
        for (int c = 0; c < C; ++c) {
          gw[c] += dz * f[c];
          df[c] += dz * w[c];
        }
      }
    } else {
      std::copy(dh.begin(), dh.end(), df.begin());
    }
    for (int a = 0; a < 3; ++a) {
      double* g = grad->planes[a].data();
      for (int t = 0; t < 4; ++t) {
        const double w = taps[a].weight[t];
        double* gt = g + taps[a].offset[t];
        for (int c = 0; c < C; ++c) gt[c] += w * df[c];
      }
    }
  }
  const double color_term = Nc > 0 ? color_weight * color_sum / (3.0 * static_cast<double>(Nc)) : 0.0;
  return sdf_sum / static_cast<double>(N) + color_term;
}

namespace detail {

/// Adam state for one flat parameter block (beta1 0.9, beta2 0.999, eps 1e-8).
class Adam {
 public:
  explicit Adam(std::size_t n) : m_(n, 0.0), v_(n, 0.0) {}

  void step(std::span<double> x, std::span<const double> g, double lr, int t) {
    const double c1 = 1.0 - std::pow(kBeta1, t);
    const double c2 = 1.0 - std::pow(kBeta2, t);
    const double step = lr / c1;
    const double inv_c2 = 1.0 / std::sqrt(c2);
    double* m = m_.data();
    double* v = v_.data();
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g[i];
      v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g[i] * g[i];
      x[i] -= step * m[i] / (std::sqrt(v[i]) * inv_c2 + kEps);
    }
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;
  std::vector<double> m_, v_;
};

inline double lr_scale(const FitConfig& cfg, int it) {
  const double fr = static_cast<double>(it) / cfg.iterations;
  if (fr < cfg.decay_start || cfg.decay_start >= 1.0) return 1.0;
  return std::max(cfg.decay_floor, 1.0 - (fr - cfg.decay_start) / (1.0 - cfg.decay_start));
}

}  // namespace detail

struct FitResult {
  Triplane triplane;
  FieldDecoder decoder;
  double final_loss = 0.0;
  double final_sdf_rmse = 0.0;  // SDF term of the last batch, before its update
  int iterations = 0;
};

/// Fits a triplane + decoder to `shape`. Single-threaded and fully determined
/// by (shape, cfg, tp_cfg). Throws FitDivergence when the loss stops being finite.
inline FitResult fit_triplane(const AnalyticShape& shape, const FitConfig& cfg, const TriplaneConfig& tp_cfg = {}) {
  cfg.validate();
  Rng init_rng(cfg.seed, 1);
  Triplane tp(tp_cfg.resolution, tp_cfg.channels, tp_cfg.extent);
  for (int a = 0; a < 3; ++a)
    for (double& v : tp.plane(a).data) v = cfg.init_scale * init_rng.normal();
  FieldDecoder dec = FieldDecoder::random(tp_cfg.channels, tp_cfg.hidden, init_rng);

  Rng sample_rng(cfg.seed, 2);
  std::array<detail::Adam, 3> plane_opt{detail::Adam(tp.plane(0).data.size()), detail::Adam(tp.plane(1).data.size()),
                                        detail::Adam(tp.plane(2).data.size())};
  detail::Adam dec_opt(dec.params().size());
  FitGradient grad;
  FitResult res;
  for (int it = 0; it < cfg.iterations; ++it) {
    const FitBatch batch =
        sample_fit_batch(shape, cfg.batch_size, cfg.surface_band_fraction, cfg.surface_band, tp_cfg.extent, sample_rng);
    const double loss = fit_loss(tp, dec, batch, cfg.color_weight, &grad);
    if (!std::isfinite(loss)) throw FitDivergence(it);
    if (it + 1 == cfg.iterations) {
      res.final_loss = loss;
      res.final_sdf_rmse = std::sqrt(fit_loss(tp, dec, batch, 0.0));
    }
    const double scale = detail::lr_scale(cfg, it);
    for (int a = 0; a < 3; ++a) plane_opt[a].step(tp.plane(a).data, grad.planes[a], cfg.step_size * scale, it + 1);
    dec_opt.step(dec.params(), grad.decoder, cfg.decoder_step_size * scale, it + 1);
  }
  tp.check_finite();
  res.triplane = std::move(tp);
  res.decoder = std::move(dec);
  res.iterations = cfg.iterations;
  return res;
}

/// RMS of decode_sdf - analytic_sdf over n uniform points in the cube.
inline double sdf_fit_error(const Triplane& tp, const FieldDecoder& dec, const AnalyticShape& shape, int n,
                            std::uint64_t seed) {
  detail::require(n >= 1, "sdf_fit_error: n must be >= 1");
  Rng rng(seed, 3);
  const double e = tp.extent();
  std::vector<double> f(static_cast<std::size_t>(tp.channels())), h(static_cast<std::size_t>(dec.hidden()));
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vec3 p{rng.uniform(-e, e), rng.uniform(-e, e), rng.uniform(-e, e)};
    detail::eval_features_into(tp, p, f);
    const double d = detail::sdf_head(detail::head_input(f, dec, h), dec) - analytic_sdf(shape, p);
    sum += d * d;
  }
  return std::sqrt(sum / n);
}

}  // namespace tpf
