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

// Frequency-domain boundary gain.
//
// A single-channel feature grid f is transformed with a circular 2D DFT,
// multiplied by a radial Butterworth high-pass
//
//   w(k) = 1 / (1 + (rho0 / rho(k))^(2 s)),   w(DC) = 0,
//
// and transformed back. The result is rescaled by its peak magnitude into
// [-1, 1] to form the gain map g, which is applied residually:
//
//   out = f + alpha * g * f   (elementwise).
//
// rho(k) is the normalized radial frequency sqrt(fx^2 + fy^2) with
// fx = min(kx, W - kx) / W and fy likewise, so rho lies in [0, sqrt(0.5)].

#ifndef PGMKIT_FREQUENCY_HPP_
#define PGMKIT_FREQUENCY_HPP_

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>

#include "pgmkit/errors.hpp"
#include "pgmkit/fft.hpp"
#include "pgmkit/grid.hpp"

namespace pgmkit {

using SpectrumGrid = Grid<std::complex<double>>;

struct FanConfig {
  double rho0 = 0.25;      // cutoff, normalized radial frequency in (0, 0.5]
  double sharpness = 2.0;  // Butterworth order s
  double alpha = 1.0;      // residual strength

  void validate() const {
    if (!std::isfinite(rho0) || !(rho0 > 0.0) || rho0 > 0.5)
      throw DomainError("FAN cutoff must lie in (0, 0.5]");
    if (!std::isfinite(sharpness) || !(sharpness > 0.0))
      throw DomainError("FAN sharpness must be positive");
    if (!std::isfinite(alpha) || alpha < 0.0)
      throw DomainError("FAN alpha must be >= 0");
  }
};

inline SpectrumGrid dft2(const RealGrid& g) {
  if (g.empty()) throw DomainError("dft2: empty grid");
  SpectrumGrid s(g.width(), g.height());
  for (std::size_t i = 0; i < g.size(); ++i) s.values()[i] = g.values()[i];
  fft::c2c_inplace(s.values().data(), g.height(), g.width(), FFTW_FORWARD);
  return s;
}

inline SpectrumGrid dft2(const LuminanceGrid& g) { return dft2(g.grid()); }

/// Inverse transform, keeping the real part.
inline RealGrid idft2(const SpectrumGrid& s) {
  if (s.empty()) throw DomainError("idft2: empty spectrum");
  SpectrumGrid work = s;
  fft::c2c_inplace(work.values().data(), s.height(), s.width(), FFTW_BACKWARD);
  const double inv = 1.0 / double(s.size());
  RealGrid out(s.width(), s.height());
  for (std::size_t i = 0; i < s.size(); ++i) out.values()[i] = work.values()[i].real() * inv;
  return out;
}

inline double radial_frequency(std::size_t kx, std::size_t ky, std::size_t width,
                               std::size_t height) {
  const double fx = double(std::min(kx, width - kx)) / double(width);
  const double fy = double(std::min(ky, height - ky)) / double(height);
  return std::sqrt(fx * fx + fy * fy);
}

inline double butterworth_highpass(double rho, const FanConfig& cfg) {
  if (rho <= 0.0) return 0.0;
  return 1.0 / (1.0 + std::pow(cfg.rho0 / rho, 2.0 * cfg.sharpness));
}

/// Filter weight for every bin of a width x height spectrum.
inline RealGrid highpass_weight(std::size_t width, std::size_t height, const FanConfig& cfg) {
  cfg.validate();
  RealGrid w(width, height);
  for (std::size_t ky = 0; ky < height; ++ky)
    for (std::size_t kx = 0; kx < width; ++kx)
      w(kx, ky) = butterworth_highpass(radial_frequency(kx, ky, width, height), cfg);
  return w;
}

/// Gain maps whose peak falls below this fraction of the input peak are
/// transform round-off and are reported as the zero map.
inline constexpr double kGainNoiseFloor = 1e-9;

inline RealGrid fan_gain(const RealGrid& f, const FanConfig& cfg = {}) {
  cfg.validate();
  if (f.empty()) throw DomainError("fan_gain: empty grid");
  double input_peak = 0.0;
  for (double v : f.values()) {
    if (!std::isfinite(v)) throw DomainError("fan_gain: non-finite input");
    input_peak = std::max(input_peak, std::abs(v));
  }
  SpectrumGrid spectrum = dft2(f);
  const RealGrid weight = highpass_weight(f.width(), f.height(), cfg);
  for (std::size_t i = 0; i < spectrum.size(); ++i)
    spectrum.values()[i] *= weight.values()[i];
  RealGrid gain = idft2(spectrum);

  double peak = 0.0;
  for (double v : gain.values()) peak = std::max(peak, std::abs(v));
  if (peak <= kGainNoiseFloor * input_peak || peak == 0.0) {
    std::fill(gain.values().begin(), gain.values().end(), 0.0);
    return gain;
  }
  for (double& v : gain.values()) v /= peak;
  return gain;
}

inline RealGrid fan_apply(const RealGrid& f, const RealGrid& gain, double alpha) {
  if (!f.same_shape(gain)) throw DomainError("fan_apply: shape mismatch");
  if (!std::isfinite(alpha) || alpha < 0.0) throw DomainError("fan_apply: alpha must be >= 0");
  RealGrid out = f;
  if (alpha == 0.0) return out;
  for (std::size_t i = 0; i < f.size(); ++i)
    out.values()[i] = f.values()[i] + alpha * (gain.values()[i] * f.values()[i]);
  return out;
}

}  // namespace pgmkit

#endif  // PGMKIT_FREQUENCY_HPP_
