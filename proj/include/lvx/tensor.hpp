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
#include <span>
#include <string>
#include <vector>

#include "lvx/simd.hpp"

namespace lvx {

/// NHWC extent. Weight tensors reuse it as (kh, kw, cin, cout).
struct Shape {
  int n = 0;
  int h = 0;
  int w = 0;
  int c = 0;

  std::size_t size() const {
    return static_cast<std::size_t>(n) * h * w * c;
  }
  std::string str() const;
  friend bool operator==(const Shape&, const Shape&) = default;
};

/// Dense row-major NHWC float tensor.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, float fill = 0.0f);
  Tensor(Shape shape, std::vector<float> data);

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }
  std::vector<float>& values() { return data_; }
  const std::vector<float>& values() const { return data_; }

  std::size_t index(int n, int y, int x, int c) const {
    return ((static_cast<std::size_t>(n) * shape_.h + y) * shape_.w + x) * shape_.c + c;
  }
  float& at(int n, int y, int x, int c) { return data_[index(n, y, x, c)]; }
  float at(int n, int y, int x, int c) const { return data_[index(n, y, x, c)]; }

  bool all_finite() const;

 private:
  Shape shape_{};
  std::vector<float> data_;
};

/// Affine int8 mapping: real = scale * (q - zero_point).
struct QuantParams {
  float scale = 1.0f;
  std::int32_t zero_point = 0;

  float dequantize(std::int8_t q) const { return scale * static_cast<float>(q - zero_point); }
  /// Round half away from zero, saturate to [-128, 127].
  std::int8_t quantize(float v) const;
  friend bool operator==(const QuantParams&, const QuantParams&) = default;
};

class QuantTensor {
 public:
  QuantTensor() = default;
  QuantTensor(Shape shape, QuantParams params);
  QuantTensor(Shape shape, QuantParams params, std::vector<std::int8_t> data);

  const Shape& shape() const { return shape_; }
  const QuantParams& params() const { return params_; }
  std::size_t size() const { return data_.size(); }
  std::span<std::int8_t> data() { return data_; }
  std::span<const std::int8_t> data() const { return data_; }
  std::vector<std::int8_t>& values() { return data_; }
  const std::vector<std::int8_t>& values() const { return data_; }

  Tensor dequantize() const;

 private:
  Shape shape_{};
  QuantParams params_{};
  std::vector<std::int8_t> data_;
};

enum class Padding { same, valid };

/// Output extent and leading padding of a strided window. "same" follows the
/// TensorFlow convention: out = ceil(in / stride), extra padding goes after.
struct ConvGeometry {
  int out_h = 0;
  int out_w = 0;
  int pad_top = 0;
  int pad_left = 0;
};

ConvGeometry conv_geometry(int in_h, int in_w, int kh, int kw, int stride, Padding padding);

/// Cross-correlation plus bias. weights: (kh, kw, cin, cout).
Tensor conv2d(const Tensor& input, const Tensor& weights, std::span<const float> bias, int stride,
              Padding padding, const simd::KernelTable& kernels = simd::active());

/// Per-channel cross-correlation. weights: (kh, kw, c, 1).
Tensor depthwise_conv2d(const Tensor& input, const Tensor& weights, std::span<const float> bias,
                        int stride, Padding padding,
                        const simd::KernelTable& kernels = simd::active());

Tensor relu6(const Tensor& input);

Tensor add(const Tensor& a, const Tensor& b);

/// Softmax over the channel axis of every (row, col) cell.
Tensor softmax_per_cell(const Tensor& logits);

/// Integer convolution. Accumulates (x - x_zero) * w in int32 with the int32
/// bias at scale input.scale * weights.scale, then requantizes to out_params.
/// Weights must be symmetric (zero_point 0).
QuantTensor conv2d_int8(const QuantTensor& input, const QuantTensor& weights,
                        std::span<const std::int32_t> bias32, QuantParams out_params, int stride,
                        Padding padding, const simd::KernelTable& kernels = simd::active());

QuantTensor depthwise_conv2d_int8(const QuantTensor& input, const QuantTensor& weights,
                                  std::span<const std::int32_t> bias32, QuantParams out_params,
                                  int stride, Padding padding,
                                  const simd::KernelTable& kernels = simd::active());

/// Clamp to the quantized images of 0 and 6 under the tensor's own params.
QuantTensor relu6_int8(const QuantTensor& input);

QuantTensor add_int8(const QuantTensor& a, const QuantTensor& b, QuantParams out_params);

/// Fixed-point multiplier: real M == multiplier * 2^(shift - 31).
struct Requantizer {
  std::int32_t multiplier = 0;
  int shift = 0;

  static Requantizer from_real(double m);
  /// round_half_away(acc * M)
  std::int64_t apply(std::int64_t acc) const;
};

/// Signed division by 2^bits rounding half away from zero.
std::int64_t rounding_shift_right(std::int64_t value, int bits);

}  // namespace lvx
