// Copyright 2026 The lvx Authors. All Rights Reserved.
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

#include <algorithm>

#include "lvx/simd.hpp"

namespace lvx::simd {
namespace {

void axpy_f32(float a, const float* x, float* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

float dot_f32(const float* x, const float* y, std::size_t n) {
  float s = 0.0f;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void fmadd_f32(const float* a, const float* b, float* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a[i] * b[i];
}

void gemv_pairs_i16(const std::int32_t* x, std::size_t pairs, const std::int16_t* w,
                    std::int32_t* acc, std::size_t n) {
  for (std::size_t p = 0; p < pairs; ++p) {
    const std::int32_t x0 = static_cast<std::int16_t>(x[p] & 0xffff);
    const std::int32_t x1 = static_cast<std::int16_t>(static_cast<std::uint32_t>(x[p]) >> 16);
    const std::int16_t* wp = w + p * n * 2;
    for (std::size_t o = 0; o < n; ++o) acc[o] += x0 * wp[2 * o] + x1 * wp[2 * o + 1];
  }
}

void depthwise_pairs_i8(const std::int8_t* const* rows, std::size_t pairs, std::int32_t zero,
                        const std::int16_t* w, std::int32_t* acc, std::size_t n) {
  for (std::size_t p = 0; p < pairs; ++p) {
    const std::int8_t* a = rows[2 * p];
    const std::int8_t* b = rows[2 * p + 1];
    const std::int16_t* wp = w + p * n * 2;
    for (std::size_t i = 0; i < n; ++i)
      acc[i] += (a[i] - zero) * wp[2 * i] + (b[i] - zero) * wp[2 * i + 1];
  }
}

}  // namespace

void requantize_i32(const std::int32_t* acc, std::int8_t* out, std::size_t n,
                    std::int32_t multiplier, int shift, std::int32_t zero) {
  const int bits = 31 - shift;
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t v = static_cast<std::int64_t>(acc[i]) * multiplier;
    std::int64_t r;
    if (bits <= 0) {
      r = v * (std::int64_t{1} << -bits);
    } else if (bits >= 63) {
      r = 0;
    } else {
      const std::int64_t half = std::int64_t{1} << (bits - 1);
      r = v >= 0 ? (v + half) >> bits : -((-v + half) >> bits);
    }
    out[i] = static_cast<std::int8_t>(std::clamp<std::int64_t>(zero + r, -128, 127));
  }
}

namespace {

constexpr KernelTable kScalar{Backend::scalar, axpy_f32, dot_f32, fmadd_f32, gemv_pairs_i16, depthwise_pairs_i8,
                             requantize_i32};

}  // namespace

const KernelTable& scalar_kernels() { return kScalar; }

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
  }
  return "unknown";
}

}  // namespace lvx::simd
