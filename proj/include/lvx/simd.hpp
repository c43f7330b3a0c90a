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

#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

// Inner-loop primitives used by every convolution kernel. Each backend
// provides the same table of function pointers; the scalar table is the
// reference that the vector backends are tested against.

namespace lvx::simd {

enum class Backend { scalar, avx2 };

std::string_view backend_name(Backend b);

struct KernelTable {
  Backend backend;
  /// y[i] += a * x[i]
  void (*axpy_f32)(float a, const float* x, float* y, std::size_t n);
  /// sum x[i] * y[i]
  float (*dot_f32)(const float* x, const float* y, std::size_t n);
  /// y[i] += a[i] * b[i]
  void (*fmadd_f32)(const float* a, const float* b, float* y, std::size_t n);
  /// acc[o] += sum_p lo16(x[p]) * w[(p*n + o)*2] + hi16(x[p]) * w[(p*n + o)*2 + 1]
  /// x packs two int16 inputs per element, each within [-255, 255]; w holds int8 values.
  void (*gemv_pairs_i16)(const std::int32_t* x, std::size_t pairs, const std::int16_t* w,
                         std::int32_t* acc, std::size_t n);
  /// acc[i] += sum_p (rows[2p][i] - zero) * w[(p*n + i)*2] + (rows[2p+1][i] - zero) * w[(p*n + i)*2 + 1]
  void (*depthwise_pairs_i8)(const std::int8_t* const* rows, std::size_t pairs, std::int32_t zero,
                             const std::int16_t* w, std::int32_t* acc, std::size_t n);
  /// out[i] = saturate(zero + round_half_away(acc[i] * multiplier / 2^(31 - shift)));
  /// multiplier > 0, |acc[i]| < 2^31
  void (*requantize)(const std::int32_t* acc, std::int8_t* out, std::size_t n,
                     std::int32_t multiplier, int shift, std::int32_t zero);
};

const KernelTable& scalar_kernels();

/// Scalar requantization, also the fallback for shifts the vector path skips.
void requantize_i32(const std::int32_t* acc, std::int8_t* out, std::size_t n,
                    std::int32_t multiplier, int shift, std::int32_t zero);

/// Null when the AVX2 backend was not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2_kernels();

/// Best backend available on this CPU, chosen once on first use.
const KernelTable& active();

}  // namespace lvx::simd
