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

// Direct-loop convolution bodies shared by the inference kernels (float) and
// the trainer (float or double). NHWC activations, (kh, kw, cin, cout) weights.

#include <cstddef>

#include "lvx/simd.hpp"
#include "lvx/tensor.hpp"

namespace lvx::detail {

struct FloatOps {
  const simd::KernelTable* k;
  void axpy(float a, const float* x, float* y, std::size_t n) const { k->axpy_f32(a, x, y, n); }
  float dot(const float* x, const float* y, std::size_t n) const { return k->dot_f32(x, y, n); }
  void fmadd(const float* a, const float* b, float* y, std::size_t n) const {
    k->fmadd_f32(a, b, y, n);
  }
};

struct DoubleOps {
  void axpy(double a, const double* x, double* y, std::size_t n) const {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
  }
  double dot(const double* x, const double* y, std::size_t n) const {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
  }
  void fmadd(const double* a, const double* b, double* y, std::size_t n) const {
    for (std::size_t i = 0; i < n; ++i) y[i] += a[i] * b[i];
  }
};

struct ConvDims {
  Shape in;   // (n, h, w, cin)
  int kh = 1;
  int kw = 1;
  int cout = 1;  // ignored for depthwise
  int stride = 1;
  ConvGeometry geo;
};

template <class T, class Ops>
void conv_forward(const T* x, const T* w, const T* bias, T* y, const ConvDims& d, const Ops& ops) {
  const int cin = d.in.c;
  const auto cout = static_cast<std::size_t>(d.cout);
  for (int n = 0; n < d.in.n; ++n) {
    for (int oy = 0; oy < d.geo.out_h; ++oy) {
      for (int ox = 0; ox < d.geo.out_w; ++ox) {
        T* out = y + ((static_cast<std::size_t>(n) * d.geo.out_h + oy) * d.geo.out_w + ox) * cout;
        for (std::size_t o = 0; o < cout; ++o) out[o] = bias ? bias[o] : T(0);
        for (int ky = 0; ky < d.kh; ++ky) {
          const int iy = oy * d.stride - d.geo.pad_top + ky;
          if (iy < 0 || iy >= d.in.h) continue;
          for (int kx = 0; kx < d.kw; ++kx) {
            const int ix = ox * d.stride - d.geo.pad_left + kx;
            if (ix < 0 || ix >= d.in.w) continue;
            const T* in = x + ((static_cast<std::size_t>(n) * d.in.h + iy) * d.in.w + ix) * cin;
            const T* wrow = w + static_cast<std::size_t>(ky * d.kw + kx) * cin * cout;
            for (int ci = 0; ci < cin; ++ci) ops.axpy(in[ci], wrow + ci * cout, out, cout);
          }
        }
      }
    }
  }
}

template <class T, class Ops>
void depthwise_forward(const T* x, const T* w, const T* bias, T* y, const ConvDims& d,
                       const Ops& ops) {
  const auto c = static_cast<std::size_t>(d.in.c);
  for (int n = 0; n < d.in.n; ++n) {
    for (int oy = 0; oy < d.geo.out_h; ++oy) {
      for (int ox = 0; ox < d.geo.out_w; ++ox) {
        T* out = y + ((static_cast<std::size_t>(n) * d.geo.out_h + oy) * d.geo.out_w + ox) * c;
        for (std::size_t k = 0; k < c; ++k) out[k] = bias ? bias[k] : T(0);
        for (int ky = 0; ky < d.kh; ++ky) {
          const int iy = oy * d.stride - d.geo.pad_top + ky;
          if (iy < 0 || iy >= d.in.h) continue;
          for (int kx = 0; kx < d.kw; ++kx) {
            const int ix = ox * d.stride - d.geo.pad_left + kx;
            if (ix < 0 || ix >= d.in.w) continue;
            const T* in = x + ((static_cast<std::size_t>(n) * d.in.h + iy) * d.in.w + ix) * c;
            ops.fmadd(in, w + static_cast<std::size_t>(ky * d.kw + kx) * c, out, c);
          }
        }
      }
    }
  }
}

// Accumulates dL/dw into dw and, when dx is non-null, dL/dx into dx.
template <class T, class Ops>
void conv_backward(const T* x, const T* w, const T* dy, T* dx, T* dw, const ConvDims& d,
                   const Ops& ops) {
  const int cin = d.in.c;
  const auto cout = static_cast<std::size_t>(d.cout);
  for (int n = 0; n < d.in.n; ++n) {
    for (int oy = 0; oy < d.geo.out_h; ++oy) {
      for (int ox = 0; ox < d.geo.out_w; ++ox) {
        const T* g =
            dy + ((static_cast<std::size_t>(n) * d.geo.out_h + oy) * d.geo.out_w + ox) * cout;
        for (int ky = 0; ky < d.kh; ++ky) {
          const int iy = oy * d.stride - d.geo.pad_top + ky;
          if (iy < 0 || iy >= d.in.h) continue;
          for (int kx = 0; kx < d.kw; ++kx) {
            const int ix = ox * d.stride - d.geo.pad_left + kx;
            if (ix < 0 || ix >= d.in.w) continue;
            const std::size_t in_off =
                ((static_cast<std::size_t>(n) * d.in.h + iy) * d.in.w + ix) * cin;
            const std::size_t w_off = static_cast<std::size_t>(ky * d.kw + kx) * cin * cout;
            for (int ci = 0; ci < cin; ++ci) {
              ops.axpy(x[in_off + ci], g, dw + w_off + ci * cout, cout);
              if (dx) dx[in_off + ci] += ops.dot(w + w_off + ci * cout, g, cout);
            }
          }
        }
      }
    }
  }
}

template <class T, class Ops>
void depthwise_backward(const T* x, const T* w, const T* dy, T* dx, T* dw, const ConvDims& d,
                        const Ops& ops) {
  const auto c = static_cast<std::size_t>(d.in.c);
  for (int n = 0; n < d.in.n; ++n) {
    for (int oy = 0; oy < d.geo.out_h; ++oy) {
      for (int ox = 0; ox < d.geo.out_w; ++ox) {
        const T* g = dy + ((static_cast<std::size_t>(n) * d.geo.out_h + oy) * d.geo.out_w + ox) * c;
        for (int ky = 0; ky < d.kh; ++ky) {
          const int iy = oy * d.stride - d.geo.pad_top + ky;
          if (iy < 0 || iy >= d.in.h) continue;
          for (int kx = 0; kx < d.kw; ++kx) {
            const int ix = ox * d.stride - d.geo.pad_left + kx;
            if (ix < 0 || ix >= d.in.w) continue;
            const std::size_t in_off = ((static_cast<std::size_t>(n) * d.in.h + iy) * d.in.w + ix) * c;
            const std::size_t w_off = static_cast<std::size_t>(ky * d.kw + kx) * c;
            ops.fmadd(x + in_off, g, dw + w_off, c);
            if (dx) ops.fmadd(w + w_off, g, dx + in_off, c);
          }
        }
      }
    }
  }
}

}  // namespace lvx::detail
