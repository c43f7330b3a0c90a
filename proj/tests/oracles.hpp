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

// Brute-force references used by unit and acceptance tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "lvx/rng.hpp"
#include "lvx/tensor.hpp"

namespace oracle {

struct Pads {
  int out_h, out_w, top, left;
};

inline Pads pads(int in_h, int in_w, int kh, int kw, int s, bool same) {
  if (!same) return {(in_h - kh) / s + 1, (in_w - kw) / s + 1, 0, 0};
  const int oh = (in_h + s - 1) / s, ow = (in_w + s - 1) / s;
  const int th = std::max((oh - 1) * s + kh - in_h, 0);
  const int tw = std::max((ow - 1) * s + kw - in_w, 0);
  return {oh, ow, th / 2, tw / 2};
}

// weights laid out (kh, kw, cin, cout)
inline std::vector<double> conv(const std::vector<float>& x, int n, int h, int w, int cin,
                                const std::vector<float>& wt, int kh, int kw, int cout,
                                const std::vector<float>& bias, int s, bool same, Pads* geo = nullptr) {
  const Pads p = pads(h, w, kh, kw, s, same);
  if (geo) *geo = p;
  std::vector<double> out(static_cast<std::size_t>(n) * p.out_h * p.out_w * cout, 0.0);
  for (int b = 0; b < n; ++b)
    for (int oy = 0; oy < p.out_h; ++oy)
      for (int ox = 0; ox < p.out_w; ++ox)
        for (int co = 0; co < cout; ++co) {
          double acc = bias.empty() ? 0.0 : bias[co];
          for (int ky = 0; ky < kh; ++ky)
            for (int kx = 0; kx < kw; ++kx)
              for (int ci = 0; ci < cin; ++ci) {
                const int iy = oy * s + ky - p.top, ix = ox * s + kx - p.left;
                if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;
                acc += static_cast<double>(x[((static_cast<std::size_t>(b) * h + iy) * w + ix) * cin + ci]) *
                       wt[((static_cast<std::size_t>(ky) * kw + kx) * cin + ci) * cout + co];
              }
          out[((static_cast<std::size_t>(b) * p.out_h + oy) * p.out_w + ox) * cout + co] = acc;
        }
  return out;
}

// weights laid out (kh, kw, c, 1)
inline std::vector<double> depthwise(const std::vector<float>& x, int n, int h, int w, int c,
                                     const std::vector<float>& wt, int kh, int kw,
                                     const std::vector<float>& bias, int s, bool same) {
  const Pads p = pads(h, w, kh, kw, s, same);
  std::vector<double> out(static_cast<std::size_t>(n) * p.out_h * p.out_w * c, 0.0);
  for (int b = 0; b < n; ++b)
    for (int ch = 0; ch < c; ++ch)
      for (int oy = 0; oy < p.out_h; ++oy)
        for (int ox = 0; ox < p.out_w; ++ox) {
          double acc = bias.empty() ? 0.0 : bias[ch];
          for (int ky = 0; ky < kh; ++ky)
            for (int kx = 0; kx < kw; ++kx) {
              const int iy = oy * s + ky - p.top, ix = ox * s + kx - p.left;
              if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;
              acc += static_cast<double>(x[((static_cast<std::size_t>(b) * h + iy) * w + ix) * c + ch]) *
                     wt[(static_cast<std::size_t>(ky) * kw + kx) * c + ch];
            }
          out[((static_cast<std::size_t>(b) * p.out_h + oy) * p.out_w + ox) * c + ch] = acc;
        }
  return out;
}

inline lvx::Tensor random_tensor(lvx::Shape s, lvx::Rng& rng, double lo = -1.0, double hi = 1.0) {
  lvx::Tensor t(s);
  for (float& v : t.values()) v = static_cast<float>(rng.uniform(lo, hi));
  return t;
}

inline std::vector<float> random_vec(std::size_t n, lvx::Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<float> v(n);
  for (float& e : v) e = static_cast<float>(rng.uniform(lo, hi));
  return v;
}

inline double max_abs_diff(const std::vector<float>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Per-class precision/recall/F1 and accuracy from the defining ratios.
struct Counts {
  std::int64_t tp, fp, fn;
};

inline double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

inline double precision(const std::vector<Counts>& c) {
  double s = 0.0;
  for (const auto& k : c) s += ratio(static_cast<double>(k.tp), static_cast<double>(k.tp + k.fp));
  return s / static_cast<double>(c.size());
}

inline double recall(const std::vector<Counts>& c) {
  double s = 0.0;
  for (const auto& k : c) s += ratio(static_cast<double>(k.tp), static_cast<double>(k.tp + k.fn));
  return s / static_cast<double>(c.size());
}

inline double f1(const std::vector<Counts>& c) {
  double s = 0.0;
  for (const auto& k : c) {
    const double p = ratio(static_cast<double>(k.tp), static_cast<double>(k.tp + k.fp));
    const double r = ratio(static_cast<double>(k.tp), static_cast<double>(k.tp + k.fn));
    s += ratio(2.0 * p * r, p + r);
  }
  return s / static_cast<double>(c.size());
}

inline double accuracy(const std::vector<Counts>& c, std::int64_t tn) {
  std::int64_t tp = 0, fp = 0, fn = 0;
  for (const auto& k : c) {
    tp += k.tp;
    fp += k.fp;
    fn += k.fn;
  }
  return static_cast<double>(tp + tn) / static_cast<double>(tp + tn + fp + fn);
}

}  // namespace oracle
