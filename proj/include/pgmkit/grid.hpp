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

#ifndef PGMKIT_GRID_HPP_
#define PGMKIT_GRID_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pgmkit/errors.hpp"

namespace pgmkit {

/// Dense row-major 2D array. Pixel (x, y) lives at index y * width + x; x is
/// the column (u-axis), y the row.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(std::size_t width, std::size_t height, T fill = T{})
      : width_(width), height_(height), values_(width * height, fill) {}
  Grid(std::size_t width, std::size_t height, std::vector<T> values)
      : width_(width), height_(height), values_(std::move(values)) {
    if (values_.size() != width_ * height_) {
      throw DomainError("grid value count " + std::to_string(values_.size()) +
                        " does not match " + std::to_string(width_) + "x" +
                        std::to_string(height_));
    }
  }

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  T& operator()(std::size_t x, std::size_t y) { return values_[y * width_ + x]; }
  const T& operator()(std::size_t x, std::size_t y) const {
    return values_[y * width_ + x];
  }

  std::span<T> values() noexcept { return values_; }
  std::span<const T> values() const noexcept { return values_; }
  std::span<T> row(std::size_t y) { return {values_.data() + y * width_, width_}; }
  std::span<const T> row(std::size_t y) const {
    return {values_.data() + y * width_, width_};
  }

  bool same_shape(const Grid& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<T> values_;
};

using RealGrid = Grid<double>;

template <typename T>
Grid<T> transpose(const Grid<T>& g) {
  Grid<T> out(g.height(), g.width());
  for (std::size_t y = 0; y < g.height(); ++y)
    for (std::size_t x = 0; x < g.width(); ++x) out(y, x) = g(x, y);
  return out;
}

template <typename T>
Grid<T> flip_horizontal(const Grid<T>& g) {
  Grid<T> out(g.width(), g.height());
  for (std::size_t y = 0; y < g.height(); ++y)
    for (std::size_t x = 0; x < g.width(); ++x)
      out(g.width() - 1 - x, y) = g(x, y);
  return out;
}

template <typename T>
Grid<T> flip_vertical(const Grid<T>& g) {
  Grid<T> out(g.width(), g.height());
  for (std::size_t y = 0; y < g.height(); ++y)
    for (std::size_t x = 0; x < g.width(); ++x)
      out(x, g.height() - 1 - y) = g(x, y);
  return out;
}

/// Intensity image with every sample finite and inside [0, 1].
class LuminanceGrid {
 public:
  LuminanceGrid() = default;
  LuminanceGrid(std::size_t width, std::size_t height)
      : grid_(width, height, 0.0) {}
  LuminanceGrid(std::size_t width, std::size_t height, std::vector<double> values)
      : LuminanceGrid(RealGrid(width, height, std::move(values))) {}
  explicit LuminanceGrid(RealGrid grid) : grid_(std::move(grid)) {
    for (double v : grid_.values()) {
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        throw RangeError("luminance value " + std::to_string(v) +
                         " outside [0, 1]");
      }
    }
  }

  std::size_t width() const noexcept { return grid_.width(); }
  std::size_t height() const noexcept { return grid_.height(); }
  std::size_t size() const noexcept { return grid_.size(); }
  double operator()(std::size_t x, std::size_t y) const { return grid_(x, y); }
  std::span<const double> values() const noexcept { return grid_.values(); }
  const RealGrid& grid() const noexcept { return grid_; }

  friend bool operator==(const LuminanceGrid&, const LuminanceGrid&) = default;

 private:
  RealGrid grid_;
};

/// Boolean image stored one byte per pixel (0 or 1).
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(std::size_t width, std::size_t height) : bits_(width, height, 0) {}
  BinaryMask(std::size_t width, std::size_t height, std::vector<std::uint8_t> bits)
      : bits_(width, height, std::move(bits)) {
    for (auto& b : bits_.values()) b = b ? 1 : 0;
  }

  std::size_t width() const noexcept { return bits_.width(); }
  std::size_t height() const noexcept { return bits_.height(); }
  std::size_t size() const noexcept { return bits_.size(); }

  bool operator()(std::size_t x, std::size_t y) const { return bits_(x, y) != 0; }
  void set(std::size_t x, std::size_t y, bool on) { bits_(x, y) = on ? 1 : 0; }
  std::span<const std::uint8_t> bits() const noexcept { return bits_.values(); }

  std::size_t count() const noexcept {
    return static_cast<std::size_t>(
        std::count(bits_.values().begin(), bits_.values().end(), 1));
  }

  bool same_shape(const BinaryMask& o) const noexcept {
    return bits_.same_shape(o.bits_);
  }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  Grid<std::uint8_t> bits_;
};

/// true -> 1.0, false -> 0.0.
inline LuminanceGrid to_luminance(const BinaryMask& m) {
  std::vector<double> v(m.size());
  std::transform(m.bits().begin(), m.bits().end(), v.begin(),
                 [](std::uint8_t b) { return b ? 1.0 : 0.0; });
  return LuminanceGrid(m.width(), m.height(), std::move(v));
}

/// Foreground wherever the luminance is strictly positive.
inline BinaryMask to_mask(const LuminanceGrid& g) {
  std::vector<std::uint8_t> bits(g.size());
  std::transform(g.values().begin(), g.values().end(), bits.begin(),
                 [](double v) -> std::uint8_t { return v > 0.0 ? 1 : 0; });
  return BinaryMask(g.width(), g.height(), std::move(bits));
}

/// Largest absolute deviation normalized by the reference peak magnitude.
/// This is the relative-error measure used when comparing computation paths.
template <typename A, typename B>
double max_relative_error(const A& got, const B& reference) {
  auto g = got.values();
  auto r = reference.values();
  if (g.size() != r.size()) throw DomainError("relative error: size mismatch");
  double peak = 0.0, dev = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    peak = std::max(peak, std::abs(r[i]));
    dev = std::max(dev, std::abs(g[i] - r[i]));
  }
  if (peak == 0.0) return dev;
  return dev / peak;
}

}  // namespace pgmkit

#endif  // PGMKIT_GRID_HPP_
