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

#include "lvx/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <utility>

#include "lvx/error.hpp"
#include "tensor/conv_loops.hpp"

namespace lvx {

std::string Shape::str() const {
  std::ostringstream os;
  os << '(' << n << ", " << h << ", " << w << ", " << c << ')';
  return os.str();
}

Tensor::Tensor(Shape shape, float fill) : shape_(shape), data_(shape.size(), fill) {}

Tensor::Tensor(Shape shape, std::vector<float> data) : shape_(shape), data_(std::move(data)) {
  if (data_.size() != shape_.size())
    throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                     " does not match shape " + shape_.str());
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

std::int8_t QuantParams::quantize(float v) const {
  const double q = std::round(static_cast<double>(v) / scale) + zero_point;
  return static_cast<std::int8_t>(std::clamp(q, -128.0, 127.0));
}

QuantTensor::QuantTensor(Shape shape, QuantParams params)
    : shape_(shape), params_(params), data_(shape.size(), static_cast<std::int8_t>(params.zero_point)) {}

QuantTensor::QuantTensor(Shape shape, QuantParams params, std::vector<std::int8_t> data)
    : shape_(shape), params_(params), data_(std::move(data)) {
  if (data_.size() != shape_.size())
    throw ShapeError("quantized tensor data length " + std::to_string(data_.size()) +
                     " does not match shape " + shape_.str());
}

Tensor QuantTensor::dequantize() const {
  Tensor out(shape_);
  for (std::size_t i = 0; i < data_.size(); ++i) out.values()[i] = params_.dequantize(data_[i]);
  return out;
}

ConvGeometry conv_geometry(int in_h, int in_w, int kh, int kw, int stride, Padding padding) {
  if (stride < 1) throw ConfigError("stride must be positive");
  ConvGeometry g;
  if (padding == Padding::valid) {
    g.out_h = in_h >= kh ? (in_h - kh) / stride + 1 : 0;
    g.out_w = in_w >= kw ? (in_w - kw) / stride + 1 : 0;
    return g;
  }
  g.out_h = (in_h + stride - 1) / stride;
  g.out_w = (in_w + stride - 1) / stride;
  const int pad_h = std::max((g.out_h - 1) * stride + kh - in_h, 0);
  const int pad_w = std::max((g.out_w - 1) * stride + kw - in_w, 0);
  g.pad_top = pad_h / 2;
  g.pad_left = pad_w / 2;
  return g;
}

namespace {

[[noreturn]] void mismatch(const char* what, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(what) + ": input " + a.str() + " vs weights " + b.str());
}

detail::ConvDims make_dims(const Shape& in, const Shape& w, int cout, int stride, Padding pad) {
  detail::ConvDims d;
  d.in = in;
  d.kh = w.n;
  d.kw = w.h;
  d.cout = cout;
  d.stride = stride;
  d.geo = conv_geometry(in.h, in.w, w.n, w.h, stride, pad);
  return d;
}

void check_accumulator_bound(const Shape& w, int taps_per_output, std::span<const std::int32_t> bias) {
  std::int64_t max_bias = 0;
  for (auto b : bias) max_bias = std::max<std::int64_t>(max_bias, std::llabs(b));
  const std::int64_t bound = static_cast<std::int64_t>(taps_per_output) * 255 * 128 + max_bias;
  if (bound > std::numeric_limits<std::int32_t>::max())
    throw InternalError("int32 accumulator could overflow for weights " + w.str());
}

std::int8_t saturate(std::int64_t v) {
  return static_cast<std::int8_t>(std::clamp<std::int64_t>(v, -128, 127));
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weights, std::span<const float> bias, int stride,
              Padding padding, const simd::KernelTable& kernels) {
  const Shape& in = input.shape();
  const Shape& ws = weights.shape();
  if (in.c != ws.w) mismatch("conv2d channel mismatch", in, ws);
  if (bias.size() != static_cast<std::size_t>(ws.c)) mismatch("conv2d bias length mismatch", in, ws);
  const auto d = make_dims(in, ws, ws.c, stride, padding);
  Tensor out(Shape{in.n, d.geo.out_h, d.geo.out_w, ws.c});
  detail::conv_forward(input.data().data(), weights.data().data(), bias.data(), out.data().data(), d,
                       detail::FloatOps{&kernels});
  return out;
}

Tensor depthwise_conv2d(const Tensor& input, const Tensor& weights, std::span<const float> bias,
                        int stride, Padding padding, const simd::KernelTable& kernels) {
  const Shape& in = input.shape();
  const Shape& ws = weights.shape();
  if (in.c != ws.w || ws.c != 1) mismatch("depthwise_conv2d channel mismatch", in, ws);
  if (bias.size() != static_cast<std::size_t>(in.c))
    mismatch("depthwise_conv2d bias length mismatch", in, ws);
  const auto d = make_dims(in, ws, in.c, stride, padding);
  Tensor out(Shape{in.n, d.geo.out_h, d.geo.out_w, in.c});
  detail::depthwise_forward(input.data().data(), weights.data().data(), bias.data(),
                            out.data().data(), d, detail::FloatOps{&kernels});
  return out;
}

Tensor relu6(const Tensor& input) {
  Tensor out = input;
  for (float& v : out.values()) v = std::clamp(v, 0.0f, 6.0f);
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    throw ShapeError("add shape mismatch: " + a.shape().str() + " vs " + b.shape().str());
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] += b.values()[i];
  return out;
}

Tensor softmax_per_cell(const Tensor& logits) {
  const Shape& s = logits.shape();
  if (s.c < 2) throw ShapeError("softmax_per_cell needs at least 2 classes, got " + s.str());
  Tensor out(s);
  const auto k = static_cast<std::size_t>(s.c);
  const std::size_t cells = s.size() / k;
  for (std::size_t cell = 0; cell < cells; ++cell) {
    const float* z = logits.data().data() + cell * k;
    float* p = out.data().data() + cell * k;
    const float zmax = *std::max_element(z, z + k);
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) sum += std::exp(static_cast<double>(z[i]) - zmax);
    for (std::size_t i = 0; i < k; ++i)
      p[i] = static_cast<float>(std::exp(static_cast<double>(z[i]) - zmax) / sum);
  }
  return out;
}

std::int64_t rounding_shift_right(std::int64_t value, int bits) {
  if (bits <= 0) return value << (-bits);
  if (bits >= 63) return 0;
  const std::int64_t half = std::int64_t{1} << (bits - 1);
  return value >= 0 ? (value + half) >> bits : -((-value + half) >> bits);
}

Requantizer Requantizer::from_real(double m) {
  Requantizer r;
  if (!(m > 0.0)) return r;
  int exp = 0;
  const double mant = std::frexp(m, &exp);
  auto q = static_cast<std::int64_t>(std::llround(mant * 2147483648.0));
  if (q == (std::int64_t{1} << 31)) {
    q /= 2;
    ++exp;
  }
  r.multiplier = static_cast<std::int32_t>(q);
  r.shift = exp;
  return r;
}

std::int64_t Requantizer::apply(std::int64_t acc) const {
  return rounding_shift_right(acc * multiplier, 31 - shift);
}

QuantTensor conv2d_int8(const QuantTensor& input, const QuantTensor& weights,
                        std::span<const std::int32_t> bias32, QuantParams out_params, int stride,
                        Padding padding, const simd::KernelTable& kernels) {
  const Shape& in = input.shape();
  const Shape& ws = weights.shape();
  if (in.c != ws.w) mismatch("conv2d_int8 channel mismatch", in, ws);
  if (bias32.size() != static_cast<std::size_t>(ws.c))
    mismatch("conv2d_int8 bias length mismatch", in, ws);
  check_accumulator_bound(ws, ws.n * ws.h * ws.w, bias32);

  const auto d = make_dims(in, ws, ws.c, stride, padding);
  const auto rq = Requantizer::from_real(static_cast<double>(input.params().scale) *
                                         weights.params().scale / out_params.scale);
  const std::int32_t zp = input.params().zero_point;
  const auto cout = static_cast<std::size_t>(ws.c);
  // The (kh, kw, cin) patch is consumed two values at a time: weights are
  // interleaved as (patch pair, cout, 2) int16, zero padded for an odd patch.
  const std::size_t patch = static_cast<std::size_t>(d.kh) * d.kw * in.c;
  const std::size_t pairs = (patch + 1) / 2;
  std::vector<std::int16_t> packed(pairs * cout * 2, 0);
  const std::int8_t* w = weights.data().data();
  for (std::size_t k = 0; k < patch; ++k)
    for (std::size_t o = 0; o < cout; ++o) packed[((k / 2) * cout + o) * 2 + k % 2] = w[k * cout + o];

  QuantTensor out(Shape{in.n, d.geo.out_h, d.geo.out_w, ws.c}, out_params);
  std::vector<std::int16_t> xs(pairs * 2);
  std::vector<std::int32_t> xp(pairs);
  std::vector<std::int32_t> acc(cout);
  const std::int8_t* x = input.data().data();
  std::int8_t* dst = out.data().data();
  for (int n = 0; n < in.n; ++n) {
    for (int oy = 0; oy < d.geo.out_h; ++oy) {
      for (int ox = 0; ox < d.geo.out_w; ++ox, dst += cout) {
        std::fill(xs.begin(), xs.end(), std::int16_t{0});  // padding reads the zero point
        for (int ky = 0; ky < d.kh; ++ky) {
          const int iy = oy * stride - d.geo.pad_top + ky;
          if (iy < 0 || iy >= in.h) continue;
          for (int kx = 0; kx < d.kw; ++kx) {
            const int ix = ox * stride - d.geo.pad_left + kx;
            if (ix < 0 || ix >= in.w) continue;
            const std::int8_t* px = x + ((static_cast<std::size_t>(n) * in.h + iy) * in.w + ix) * in.c;
            std::int16_t* slot = xs.data() + static_cast<std::size_t>(ky * d.kw + kx) * in.c;
            for (int ci = 0; ci < in.c; ++ci) slot[ci] = static_cast<std::int16_t>(px[ci] - zp);
          }
        }
        for (std::size_t p = 0; p < pairs; ++p)
          xp[p] = static_cast<std::int32_t>(static_cast<std::uint16_t>(xs[2 * p]) |
                                            static_cast<std::uint32_t>(static_cast<std::uint16_t>(xs[2 * p + 1])) << 16);
        std::copy(bias32.begin(), bias32.end(), acc.begin());
        kernels.gemv_pairs_i16(xp.data(), pairs, packed.data(), acc.data(), cout);
        kernels.requantize(acc.data(), dst, cout, rq.multiplier, rq.shift, out_params.zero_point);
      }
    }
  }
  return out;
}

QuantTensor depthwise_conv2d_int8(const QuantTensor& input, const QuantTensor& weights,
                                  std::span<const std::int32_t> bias32, QuantParams out_params,
                                  int stride, Padding padding, const simd::KernelTable& kernels) {
  const Shape& in = input.shape();
  const Shape& ws = weights.shape();
  if (in.c != ws.w || ws.c != 1) mismatch("depthwise_conv2d_int8 channel mismatch", in, ws);
  if (bias32.size() != static_cast<std::size_t>(in.c))
    mismatch("depthwise_conv2d_int8 bias length mismatch", in, ws);
  check_accumulator_bound(ws, ws.n * ws.h, bias32);

  const auto d = make_dims(in, ws, in.c, stride, padding);
  const auto rq = Requantizer::from_real(static_cast<double>(input.params().scale) *
                                         weights.params().scale / out_params.scale);
  const std::int32_t zp = input.params().zero_point;
  const auto c = static_cast<std::size_t>(in.c);
  const int taps = d.kh * d.kw;
  const int pairs = (taps + 1) / 2;
  // Taps are consumed two at a time: weights are interleaved as
  // (tap pair, channel, 2) int16 with a zero pad for an odd tap count.
  std::vector<std::int16_t> packed(static_cast<std::size_t>(pairs) * c * 2, 0);
  const std::int8_t* w = weights.data().data();
  for (int t = 0; t < taps; ++t)
    for (std::size_t k = 0; k < c; ++k)
      packed[((static_cast<std::size_t>(t) / 2) * c + k) * 2 + t % 2] = w[static_cast<std::size_t>(t) * c + k];
  // Padding taps read the zero point, which contributes nothing.
  const std::vector<std::int8_t> pad(c, static_cast<std::int8_t>(zp));
  std::vector<const std::int8_t*> rows(static_cast<std::size_t>(pairs) * 2, pad.data());

  QuantTensor out(Shape{in.n, d.geo.out_h, d.geo.out_w, in.c}, out_params);
  std::vector<std::int32_t> acc(c);
  const std::int8_t* x = input.data().data();
  std::int8_t* dst = out.data().data();
  for (int n = 0; n < in.n; ++n) {
    for (int oy = 0; oy < d.geo.out_h; ++oy) {
      for (int ox = 0; ox < d.geo.out_w; ++ox, dst += c) {
        for (int ky = 0; ky < d.kh; ++ky) {
          const int iy = oy * stride - d.geo.pad_top + ky;
          for (int kx = 0; kx < d.kw; ++kx) {
            const int ix = ox * stride - d.geo.pad_left + kx;
            const bool inside = iy >= 0 && iy < in.h && ix >= 0 && ix < in.w;
            rows[static_cast<std::size_t>(ky * d.kw + kx)] =
                inside ? x + ((static_cast<std::size_t>(n) * in.h + iy) * in.w + ix) * c : pad.data();
          }
        }
        std::copy(bias32.begin(), bias32.end(), acc.begin());
        kernels.depthwise_pairs_i8(rows.data(), static_cast<std::size_t>(pairs), zp, packed.data(), acc.data(), c);
        kernels.requantize(acc.data(), dst, c, rq.multiplier, rq.shift, out_params.zero_point);
      }
    }
  }
  return out;
}

QuantTensor relu6_int8(const QuantTensor& input) {
  QuantTensor out = input;
  const std::int8_t lo = input.params().quantize(0.0f);
  const std::int8_t hi = input.params().quantize(6.0f);
  for (auto& q : out.values()) q = std::clamp(q, lo, hi);
  return out;
}

QuantTensor add_int8(const QuantTensor& a, const QuantTensor& b, QuantParams out_params) {
  if (a.shape() != b.shape())
    throw ShapeError("add_int8 shape mismatch: " + a.shape().str() + " vs " + b.shape().str());
  constexpr int kFracBits = 24;
  const auto ma = std::llround(static_cast<double>(a.params().scale) / out_params.scale *
                               static_cast<double>(1 << kFracBits));
  const auto mb = std::llround(static_cast<double>(b.params().scale) / out_params.scale *
                               static_cast<double>(1 << kFracBits));
  QuantTensor out(a.shape(), out_params);
  const auto za = a.params().zero_point;
  const auto zb = b.params().zero_point;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::int64_t num = static_cast<std::int64_t>(a.values()[i] - za) * ma +
                             static_cast<std::int64_t>(b.values()[i] - zb) * mb;
    out.values()[i] = saturate(out_params.zero_point + rounding_shift_right(num, kFracBits));
  }
  return out;
}

}  // namespace lvx
