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

// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include "lvx/simd.hpp"

namespace lvx::simd::avx2 {
namespace {

inline float horizontal_add(__m256 v) {
  const __m128 lo = _mm256_castps256_ps128(v);
  const __m128 hi = _mm256_extractf128_ps(v, 1);
  __m128 s = _mm_add_ps(lo, hi);
  s = _mm_add_ps(s, _mm_movehl_ps(s, s));
  s = _mm_add_ss(s, _mm_shuffle_ps(s, s, 0x55));
  return _mm_cvtss_f32(s);
}

void axpy_f32(float a, const float* x, float* y, std::size_t n) {
  const __m256 va = _mm256_set1_ps(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 vy = _mm256_fmadd_ps(va, _mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i));
    _mm256_storeu_ps(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

float dot_f32(const float* x, const float* y, std::size_t n) {
  __m256 acc = _mm256_setzero_ps();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8)
    acc = _mm256_fmadd_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i), acc);
  float s = horizontal_add(acc);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void fmadd_f32(const float* a, const float* b, float* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 vy =
        _mm256_fmadd_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i), _mm256_loadu_ps(y + i));
    _mm256_storeu_ps(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a[i] * b[i];
}

// madd_epi16 sums pairs of int16 products into int32 lanes. Both factors stay
// within 9 bits plus sign, so no pair sum can overflow.
void gemv_pairs_i16(const std::int32_t* x, std::size_t pairs, const std::int16_t* w,
                    std::int32_t* acc, std::size_t n) {
  std::size_t o = 0;
  for (; o + 32 <= n; o += 32) {
    auto* dst = reinterpret_cast<__m256i*>(acc + o);
    __m256i a0 = _mm256_loadu_si256(dst), a1 = _mm256_loadu_si256(dst + 1);
    __m256i a2 = _mm256_loadu_si256(dst + 2), a3 = _mm256_loadu_si256(dst + 3);
    for (std::size_t p = 0; p < pairs; ++p) {
      const __m256i vx = _mm256_set1_epi32(x[p]);
      const auto* wp = reinterpret_cast<const __m256i*>(w + (p * n + o) * 2);
      a0 = _mm256_add_epi32(a0, _mm256_madd_epi16(_mm256_loadu_si256(wp), vx));
      a1 = _mm256_add_epi32(a1, _mm256_madd_epi16(_mm256_loadu_si256(wp + 1), vx));
      a2 = _mm256_add_epi32(a2, _mm256_madd_epi16(_mm256_loadu_si256(wp + 2), vx));
      a3 = _mm256_add_epi32(a3, _mm256_madd_epi16(_mm256_loadu_si256(wp + 3), vx));
    }
    _mm256_storeu_si256(dst, a0);
    _mm256_storeu_si256(dst + 1, a1);
    _mm256_storeu_si256(dst + 2, a2);
    _mm256_storeu_si256(dst + 3, a3);
  }
  for (; o + 8 <= n; o += 8) {
    auto* dst = reinterpret_cast<__m256i*>(acc + o);
    __m256i a0 = _mm256_loadu_si256(dst);
    for (std::size_t p = 0; p < pairs; ++p) {
      const auto* wp = reinterpret_cast<const __m256i*>(w + (p * n + o) * 2);
      a0 = _mm256_add_epi32(a0, _mm256_madd_epi16(_mm256_loadu_si256(wp), _mm256_set1_epi32(x[p])));
    }
    _mm256_storeu_si256(dst, a0);
  }
  for (; o < n; ++o) {
    std::int32_t s = acc[o];
    for (std::size_t p = 0; p < pairs; ++p) {
      const std::int32_t x0 = static_cast<std::int16_t>(x[p] & 0xffff);
      const std::int32_t x1 = static_cast<std::int16_t>(static_cast<std::uint32_t>(x[p]) >> 16);
      s += x0 * w[(p * n + o) * 2] + x1 * w[(p * n + o) * 2 + 1];
    }
    acc[o] = s;
  }
}

inline __m256i interleave_shifted(const std::int8_t* a, const std::int8_t* b, __m128i zero) {
  const __m128i va =
      _mm_sub_epi16(_mm_cvtepi8_epi16(_mm_loadl_epi64(reinterpret_cast<const __m128i*>(a))), zero);
  const __m128i vb =
      _mm_sub_epi16(_mm_cvtepi8_epi16(_mm_loadl_epi64(reinterpret_cast<const __m128i*>(b))), zero);
  return _mm256_set_m128i(_mm_unpackhi_epi16(va, vb), _mm_unpacklo_epi16(va, vb));
}

void depthwise_pairs_i8(const std::int8_t* const* rows, std::size_t pairs, std::int32_t zero,
                        const std::int16_t* w, std::int32_t* acc, std::size_t n) {
  const __m128i vz = _mm_set1_epi16(static_cast<std::int16_t>(zero));
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    auto* dst = reinterpret_cast<__m256i*>(acc + i);
    __m256i a0 = _mm256_loadu_si256(dst), a1 = _mm256_loadu_si256(dst + 1);
    for (std::size_t p = 0; p < pairs; ++p) {
      const auto* wp = reinterpret_cast<const __m256i*>(w + (p * n + i) * 2);
      const std::int8_t* ra = rows[2 * p] + i;
      const std::int8_t* rb = rows[2 * p + 1] + i;
      a0 = _mm256_add_epi32(a0, _mm256_madd_epi16(interleave_shifted(ra, rb, vz), _mm256_loadu_si256(wp)));
      a1 = _mm256_add_epi32(a1, _mm256_madd_epi16(interleave_shifted(ra + 8, rb + 8, vz),
                                                   _mm256_loadu_si256(wp + 1)));
    }
    _mm256_storeu_si256(dst, a0);
    _mm256_storeu_si256(dst + 1, a1);
  }
  for (; i + 8 <= n; i += 8) {
    auto* dst = reinterpret_cast<__m256i*>(acc + i);
    __m256i a0 = _mm256_loadu_si256(dst);
    for (std::size_t p = 0; p < pairs; ++p) {
      const auto* wp = reinterpret_cast<const __m256i*>(w + (p * n + i) * 2);
      a0 = _mm256_add_epi32(
          a0, _mm256_madd_epi16(interleave_shifted(rows[2 * p] + i, rows[2 * p + 1] + i, vz), _mm256_loadu_si256(wp)));
    }
    _mm256_storeu_si256(dst, a0);
  }
  for (; i < n; ++i) {
    std::int32_t s = acc[i];
    for (std::size_t p = 0; p < pairs; ++p)
      s += (rows[2 * p][i] - zero) * w[(p * n + i) * 2] + (rows[2 * p + 1][i] - zero) * w[(p * n + i) * 2 + 1];
    acc[i] = s;
  }
}

// Works on magnitudes so that rounding is half away from zero, then restores
// the sign. |acc| * multiplier < 2^62, so the 64-bit lanes never overflow.
void requantize(const std::int32_t* acc, std::int8_t* out, std::size_t n, std::int32_t multiplier,
                int shift, std::int32_t zero) {
  const int bits = 31 - shift;
  if (bits <= 0 || bits >= 63) {
    requantize_i32(acc, out, n, multiplier, shift, zero);
    return;
  }
  const __m256i vm = _mm256_set1_epi64x(multiplier);
  const __m256i half = _mm256_set1_epi64x(std::int64_t{1} << (bits - 1));
  const __m128i count = _mm_cvtsi32_si128(bits);
  const __m256i vz = _mm256_set1_epi32(zero);
  const __m256i cap = _mm256_set1_epi64x(1 << 16);
  const __m256i lo = _mm256_set1_epi32(-128), hi = _mm256_set1_epi32(127);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(acc + i));
    const __m256i mag = _mm256_abs_epi32(v);
    const __m256i even = _mm256_srl_epi64(_mm256_add_epi64(_mm256_mul_epu32(mag, vm), half), count);
    const __m256i odd = _mm256_srl_epi64(
        _mm256_add_epi64(_mm256_mul_epu32(_mm256_srli_epi64(mag, 32), vm), half), count);
    // Anything past 2^16 saturates anyway; capping keeps the lanes in 32 bits.
    const __m256i ce = _mm256_blendv_epi8(even, cap, _mm256_cmpgt_epi64(even, cap));
    const __m256i co = _mm256_blendv_epi8(odd, cap, _mm256_cmpgt_epi64(odd, cap));
    __m256i r = _mm256_blend_epi32(ce, _mm256_slli_epi64(co, 32), 0xaa);
    r = _mm256_sign_epi32(r, v);
    r = _mm256_min_epi32(_mm256_max_epi32(_mm256_add_epi32(r, vz), lo), hi);
    const __m128i r16 = _mm_packs_epi32(_mm256_castsi256_si128(r), _mm256_extracti128_si256(r, 1));
    _mm_storel_epi64(reinterpret_cast<__m128i*>(out + i), _mm_packs_epi16(r16, r16));
  }
  requantize_i32(acc + i, out + i, n - i, multiplier, shift, zero);
}

constexpr KernelTable kAvx2{Backend::avx2, axpy_f32, dot_f32, fmadd_f32, gemv_pairs_i16, depthwise_pairs_i8,
                           requantize};

}  // namespace

const KernelTable& table() { return kAvx2; }

}  // namespace lvx::simd::avx2
