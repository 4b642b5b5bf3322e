// Copyright 2026 The pgmkit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Photometric Gaussian mixture heatmaps.
//
// Every pixel u of a luminance grid I contributes an isotropic Gaussian
// centred on u with amplitude I(u) and standard deviation lambda:
//
//   G(I; lambda)(x) = sum_u I(u) * exp(-|x - u|^2 / (2 lambda^2))
//
// Pixel centres sit at integer coordinates. Three interchangeable routes
// compute the field:
//
//   pgm_exact      direct double sum, O((HW)^2). The reference.
//   pgm_separable  row pass then column pass with a 1D kernel, O(HW r).
//   pgm_fft        zero-padded linear convolution via FFT.
//
// With the default radius ceil(4 lambda) the separable and FFT routes use the
// same square (2r+1)^2 kernel support; each dropped term is below exp(-8)
// times its amplitude.

#ifndef PGMKIT_PGM_HPP_
#define PGMKIT_PGM_HPP_

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pgmkit/errors.hpp"
#include "pgmkit/fft.hpp"
#include "pgmkit/grid.hpp"
#include "pgmkit/parallel.hpp"

namespace pgmkit {

/// Axis-aligned 2D Gaussian: amplitude, centre and per-axis spread.
struct GaussianParams {
  double amplitude = 1.0;
  double x0 = 0.0;
  double y0 = 0.0;
  double sigma_x = 1.0;
  double sigma_y = 1.0;

  void validate() const {
    if (!std::isfinite(amplitude) || !std::isfinite(x0) || !std::isfinite(y0) ||
        !std::isfinite(sigma_x) || !std::isfinite(sigma_y))
      throw DomainError("Gaussian parameters must be finite");
    if (amplitude < 0.0) throw DomainError("Gaussian amplitude must be >= 0");
    if (sigma_x <= 0.0 || sigma_y <= 0.0)
      throw DomainError("Gaussian spread must be > 0");
  }
};

inline double gaussian2d(double x, double y, const GaussianParams& p) {
  p.validate();
  if (!std::isfinite(x) || !std::isfinite(y))
    throw DomainError("gaussian2d: non-finite coordinate");
  const double dx = x - p.x0, dy = y - p.y0;
  return p.amplitude * std::exp(-(dx * dx) / (2.0 * p.sigma_x * p.sigma_x) -
                                (dy * dy) / (2.0 * p.sigma_y * p.sigma_y));
}

enum class Normalization { kRaw, kMaxOne };

inline std::string_view to_string(Normalization n) {
  return n == Normalization::kRaw ? "raw" : "max_one";
}

/// Non-negative response map for one lambda.
class Heatmap {
 public:
  Heatmap(RealGrid values, double lambda, Normalization normalization = Normalization::kRaw)
      : values_(std::move(values)), lambda_(lambda), normalization_(normalization) {
    if (!(lambda_ > 0.0) || !std::isfinite(lambda_))
      throw DomainError("heatmap lambda must be positive and finite");
    for (double v : values_.values()) {
      if (!std::isfinite(v) || v < 0.0)
        throw DomainError("heatmap values must be finite and non-negative");
    }
  }

  std::size_t width() const noexcept { return values_.width(); }
  std::size_t height() const noexcept { return values_.height(); }
  std::size_t size() const noexcept { return values_.size(); }
  double lambda() const noexcept { return lambda_; }
  Normalization normalization() const noexcept { return normalization_; }
  double operator()(std::size_t x, std::size_t y) const { return values_(x, y); }
  std::span<const double> values() const noexcept { return values_.values(); }
  const RealGrid& grid() const noexcept { return values_; }

 private:
  RealGrid values_;
  double lambda_;
  Normalization normalization_;
};

inline void require_lambda(double lambda) {
  if (!std::isfinite(lambda) || !(lambda > 0.0))
    throw DomainError("lambda must be positive and finite, got " + std::to_string(lambda));
}

/// Reference implementation: the literal double sum over all pixel pairs.
inline Heatmap pgm_exact(const LuminanceGrid& image, double lambda) {
  require_lambda(lambda);
  struct Source {
    double x, y, amplitude;
  };
  std::vector<Source> sources;
  for (std::size_t y = 0; y < image.height(); ++y)
    for (std::size_t x = 0; x < image.width(); ++x)
      if (image(x, y) != 0.0) sources.push_back({double(x), double(y), image(x, y)});

  const double inv = 1.0 / (2.0 * lambda * lambda);
  RealGrid out(image.width(), image.height(), 0.0);
  for (std::size_t y = 0; y < image.height(); ++y) {
    for (std::size_t x = 0; x < image.width(); ++x) {
      double sum = 0.0;
      for (const Source& s : sources) {
        const double dx = double(x) - s.x, dy = double(y) - s.y;
        sum += s.amplitude * std::exp(-(dx * dx + dy * dy) * inv);
      }
      out(x, y) = sum;
    }
  }
  return Heatmap(std::move(out), lambda);
}

/// Radius value selecting an untruncated kernel.
inline constexpr std::size_t kFullRadius = std::numeric_limits<std::size_t>::max();

inline std::size_t default_radius(double lambda) {
  require_lambda(lambda);
  return static_cast<std::size_t>(std::ceil(4.0 * lambda));
}

namespace pgm_detail {

// exp(-d^2 / (2 lambda^2)) for d = 0..radius.
inline std::vector<double> half_kernel(double lambda, std::size_t radius) {
  std::vector<double> k(radius + 1);
  const double inv = 1.0 / (2.0 * lambda * lambda);
  for (std::size_t d = 0; d <= radius; ++d) k[d] = std::exp(-double(d * d) * inv);
  return k;
}

}  // namespace pgm_detail

/// Separable route. `radius` bounds |dx| and |dy| of contributing pixels;
/// kFullRadius keeps every pair.
inline Heatmap pgm_separable(const LuminanceGrid& image, double lambda, std::size_t radius) {
  require_lambda(lambda);
  if (radius == 0) throw DomainError("truncation radius must be >= 1");
  const std::size_t w = image.width(), h = image.height();
  if (w == 0 || h == 0) return Heatmap(RealGrid(w, h), lambda);
  const std::size_t reach = std::max(w, h) - 1;
  const std::size_t r = std::min(radius, reach);
  const auto k = pgm_detail::half_kernel(lambda, r);
  const auto src = image.values();

  // Row pass: tmp(x, y) = sum_dx I(x + dx, y) k(|dx|)
  RealGrid tmp(w, h, 0.0);
  for (std::size_t y = 0; y < h; ++y) {
    const double* in = src.data() + y * w;
    double* out = tmp.row(y).data();
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t lo = x >= r ? x - r : 0;
      const std::size_t hi = std::min(w - 1, x + r);
      double acc = 0.0;
      for (std::size_t u = lo; u <= hi; ++u) acc += in[u] * k[u > x ? u - x : x - u];
      out[x] = acc;
    }
  }

  // Column pass, accumulated a row at a time to stay cache friendly.
  RealGrid out(w, h, 0.0);
  for (std::size_t y = 0; y < h; ++y) {
    double* dst = out.row(y).data();
    const std::size_t lo = y >= r ? y - r : 0;
    const std::size_t hi = std::min(h - 1, y + r);
    for (std::size_t v = lo; v <= hi; ++v) {
      const double kv = k[v > y ? v - y : y - v];
      const double* s = tmp.row(v).data();
      for (std::size_t x = 0; x < w; ++x) dst[x] += kv * s[x];
    }
  }
  return Heatmap(std::move(out), lambda);
}

inline Heatmap pgm_separable(const LuminanceGrid& image, double lambda) {
  return pgm_separable(image, lambda, default_radius(lambda));
}

struct FftOptions {
  /// Upper bound on the working memory of the padded transforms.
  std::size_t memory_budget_bytes = std::size_t{1} << 30;
};

/// Bytes pgm_fft would allocate for a width x height grid.
inline std::size_t fft_working_bytes(std::size_t width, std::size_t height, double lambda) {
  const std::size_t r = default_radius(lambda);
  const std::size_t nx = std::bit_ceil(width + 2 * r);
  const std::size_t ny = std::bit_ceil(height + 2 * r);
  return 2 * (nx * ny * sizeof(double) + ny * (nx / 2 + 1) * sizeof(fft::Complex));
}

/// Convolution-theorem route. Both dimensions are zero-padded to the next
/// power of two >= dim + 2 ceil(4 lambda) so the circular product equals the
/// linear convolution with the (2r+1)^2 kernel.
inline Heatmap pgm_fft(const LuminanceGrid& image, double lambda, const FftOptions& opts = {}) {
  require_lambda(lambda);
  const std::size_t w = image.width(), h = image.height();
  if (w == 0 || h == 0) return Heatmap(RealGrid(w, h), lambda);
  const std::size_t need = fft_working_bytes(w, h, lambda);
  if (need > opts.memory_budget_bytes)
    throw ResourceError("FFT working set of " + std::to_string(need) +
                        " bytes exceeds budget of " +
                        std::to_string(opts.memory_budget_bytes));

  const std::size_t r = default_radius(lambda);
  const std::size_t nx = std::bit_ceil(w + 2 * r);
  const std::size_t ny = std::bit_ceil(h + 2 * r);
  const std::size_t nxc = nx / 2 + 1;

  fft::AlignedBuffer<double> signal(nx * ny), kernel(nx * ny);
  fft::AlignedBuffer<fft::Complex> signal_hat(ny * nxc), kernel_hat(ny * nxc);

  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) signal[y * nx + x] = image(x, y);

  // Kernel wrapped around the origin: offset d lands at index d mod n.
  const auto k = pgm_detail::half_kernel(lambda, r);
  const auto rx = static_cast<std::ptrdiff_t>(r);
  for (std::ptrdiff_t dy = -rx; dy <= rx; ++dy) {
    const std::size_t iy = static_cast<std::size_t>((dy + std::ptrdiff_t(ny)) % std::ptrdiff_t(ny));
    for (std::ptrdiff_t dx = -rx; dx <= rx; ++dx) {
      const std::size_t ix = static_cast<std::size_t>((dx + std::ptrdiff_t(nx)) % std::ptrdiff_t(nx));
      kernel[iy * nx + ix] = k[std::size_t(std::abs(dx))] * k[std::size_t(std::abs(dy))];
    }
  }

  fft::r2c(signal.data(), signal_hat.data(), ny, nx);
  fft::r2c(kernel.data(), kernel_hat.data(), ny, nx);
  for (std::size_t i = 0; i < signal_hat.size(); ++i) signal_hat[i] *= kernel_hat[i];
  fft::c2r(signal_hat.data(), signal.data(), ny, nx);

  const double scale = 1.0 / (double(nx) * double(ny));
  RealGrid out(w, h);
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      // Round-off can push true zeros slightly negative.
      out(x, y) = std::max(0.0, signal[y * nx + x] * scale);
    }
  }
  return Heatmap(std::move(out), lambda);
}

inline Heatmap normalize_heatmap(const Heatmap& h, Normalization mode) {
  if (mode == Normalization::kRaw) return Heatmap(h.grid(), h.lambda(), Normalization::kRaw);
  const double peak = h.values().empty()
                          ? 0.0
                          : *std::max_element(h.values().begin(), h.values().end());
  RealGrid g = h.grid();
  if (peak > 0.0)
    for (double& v : g.values()) v /= peak;
  return Heatmap(std::move(g), h.lambda(), Normalization::kMaxOne);
}

enum class ComputePath { kExact, kSeparable, kFft };

inline std::string_view to_string(ComputePath p) {
  switch (p) {
    case ComputePath::kExact: return "exact";
    case ComputePath::kSeparable: return "separable";
    case ComputePath::kFft: return "fft";
  }
  return "?";
}

inline Heatmap compute_pgm(const LuminanceGrid& image, double lambda, ComputePath path,
                           const FftOptions& fft_opts = {}) {
  switch (path) {
    case ComputePath::kExact: return pgm_exact(image, lambda);
    case ComputePath::kSeparable: return pgm_separable(image, lambda);
    case ComputePath::kFft: return pgm_fft(image, lambda, fft_opts);
  }
  throw DomainError("unknown compute path");
}

/// One heatmap per lambda, all the same shape and normalization mode.
class HeatmapStack {
 public:
  explicit HeatmapStack(std::vector<Heatmap> maps) : maps_(std::move(maps)) {
    for (std::size_t i = 0; i < maps_.size(); ++i) {
      if (i > 0) {
        if (!(maps_[i].lambda() > maps_[i - 1].lambda()))
          throw DomainError("stack lambdas must be strictly increasing");
        if (maps_[i].width() != maps_[0].width() || maps_[i].height() != maps_[0].height())
          throw DomainError("stack maps must share one shape");
        if (maps_[i].normalization() != maps_[0].normalization())
          throw DomainError("stack maps must share one normalization mode");
      }
    }
  }

  std::size_t size() const noexcept { return maps_.size(); }
  const Heatmap& operator[](std::size_t i) const { return maps_[i]; }
  const std::vector<Heatmap>& maps() const noexcept { return maps_; }
  std::vector<double> lambdas() const {
    std::vector<double> out;
    out.reserve(maps_.size());
    for (const auto& m : maps_) out.push_back(m.lambda());
    return out;
  }

 private:
  std::vector<Heatmap> maps_;
};

inline const std::vector<double>& default_lambdas() {
  static const std::vector<double> kLambdas{1.0, 5.0, 10.0, 20.0};
  return kLambdas;
}

inline void validate_lambdas(std::span<const double> lambdas) {
  if (lambdas.empty()) throw DomainError("lambda list is empty");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    require_lambda(lambdas[i]);
    if (i > 0 && !(lambdas[i] > lambdas[i - 1]))
      throw DomainError("lambda list must be strictly increasing");
  }
}

/// Maps for every lambda, computed concurrently on up to `threads` workers.
inline HeatmapStack multiscale_stack(const LuminanceGrid& image,
                                     std::span<const double> lambdas,
                                     ComputePath path,
                                     Normalization normalization,
                                     std::size_t threads = 1,
                                     const FftOptions& fft_opts = {}) {
  validate_lambdas(lambdas);
  std::vector<std::optional<Heatmap>> slots(lambdas.size());
  parallel_for(lambdas.size(), threads, [&](std::size_t i) {
    slots[i].emplace(normalize_heatmap(compute_pgm(image, lambdas[i], path, fft_opts),
                                       normalization));
  });
  std::vector<Heatmap> maps;
  maps.reserve(slots.size());
  for (auto& s : slots) maps.push_back(std::move(*s));
  return HeatmapStack(std::move(maps));
}

/// Block-average pooling. Output is ceil(W/stride) x ceil(H/stride); blocks
/// hanging over the border are zero-padded, i.e. still divided by stride^2.
inline Heatmap downsample_heatmap(const Heatmap& h, std::size_t stride) {
  if (stride < 1) throw DomainError("stride must be >= 1");
  if (stride == 1) return h;
  const std::size_t ow = (h.width() + stride - 1) / stride;
  const std::size_t oh = (h.height() + stride - 1) / stride;
  RealGrid out(ow, oh, 0.0);
  for (std::size_t y = 0; y < h.height(); ++y)
    for (std::size_t x = 0; x < h.width(); ++x) out(x / stride, y / stride) += h(x, y);
  const double inv = 1.0 / double(stride * stride);
  for (double& v : out.values()) v *= inv;
  return Heatmap(std::move(out), h.lambda(), h.normalization());
}

}  // namespace pgmkit

#endif  // PGMKIT_PGM_HPP_
