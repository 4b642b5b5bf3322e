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

// Thin RAII layer over FFTW3 2D transforms. Transforms are unnormalized in
// both directions (FFTW convention); callers divide by the element count.

#ifndef PGMKIT_FFT_HPP_
#define PGMKIT_FFT_HPP_

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <new>

namespace pgmkit::fft {

namespace detail {

// The FFTW planner is not re-entrant; plan creation and destruction go
// through this lock. Executing a finished plan needs no locking.
inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const noexcept { fftw_free(p); }
};

class Plan {
 public:
  explicit Plan(fftw_plan p) : plan_(p) {
    if (plan_ == nullptr) throw std::bad_alloc();
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;
  ~Plan() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan_);
  }
  void execute() const { fftw_execute(plan_); }

 private:
  fftw_plan plan_;
};

}  // namespace detail

/// SIMD-aligned buffer allocated with fftw_malloc.
template <typename T>
class AlignedBuffer {
 public:
  explicit AlignedBuffer(std::size_t n)
      : data_(static_cast<T*>(fftw_malloc(sizeof(T) * (n ? n : 1)))), size_(n) {
    if (!data_) throw std::bad_alloc();
    for (std::size_t i = 0; i < n; ++i) data_.get()[i] = T{};
  }
  T* data() noexcept { return data_.get(); }
  const T* data() const noexcept { return data_.get(); }
  std::size_t size() const noexcept { return size_; }
  T& operator[](std::size_t i) noexcept { return data_.get()[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_.get()[i]; }

 private:
  std::unique_ptr<T, detail::FftwFree> data_;
  std::size_t size_;
};

using Complex = std::complex<double>;

inline fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }

/// In-place complex 2D transform of a rows x cols row-major array.
/// sign = FFTW_FORWARD or FFTW_BACKWARD.
inline void c2c_inplace(Complex* data, std::size_t rows, std::size_t cols, int sign) {
  std::unique_ptr<detail::Plan> plan;
  {
    std::lock_guard lock(detail::planner_mutex());
    plan = std::make_unique<detail::Plan>(
        fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols),
                         as_fftw(data), as_fftw(data), sign, FFTW_ESTIMATE));
  }
  plan->execute();
}

/// Real-to-half-complex forward transform. `out` holds rows x (cols/2 + 1).
inline void r2c(double* in, Complex* out, std::size_t rows, std::size_t cols) {
  std::unique_ptr<detail::Plan> plan;
  {
    std::lock_guard lock(detail::planner_mutex());
    plan = std::make_unique<detail::Plan>(fftw_plan_dft_r2c_2d(
        static_cast<int>(rows), static_cast<int>(cols), in, as_fftw(out),
        FFTW_ESTIMATE));
  }
  plan->execute();
}

/// Inverse of r2c. Destroys `in`.
inline void c2r(Complex* in, double* out, std::size_t rows, std::size_t cols) {
  std::unique_ptr<detail::Plan> plan;
  {
    std::lock_guard lock(detail::planner_mutex());
    plan = std::make_unique<detail::Plan>(fftw_plan_dft_c2r_2d(
        static_cast<int>(rows), static_cast<int>(cols), as_fftw(in), out,
        FFTW_ESTIMATE));
  }
  plan->execute();
}

}  // namespace pgmkit::fft

#endif  // PGMKIT_FFT_HPP_
