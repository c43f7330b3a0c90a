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

#include "lvx/quant.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "lvx/error.hpp"
#include "lvx/rng.hpp"

namespace lvx {

const TensorRange* CalibrationStats::find(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return &ranges[i];
  return nullptr;
}

void CalibrationStats::merge(const CalibrationStats& other) {
  if (other.names != names) throw ConfigError("cannot merge calibration stats of different models");
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    ranges[i].min = std::min(ranges[i].min, other.ranges[i].min);
    ranges[i].max = std::max(ranges[i].max, other.ranges[i].max);
  }
  sample_count += other.sample_count;
}

std::vector<std::string> activation_names(const FomoModel& model) {
  std::vector<std::string> names{"input"};
  for (const Layer& l : model.layers) names.push_back(l.name);
  return names;
}

CalibrationStats calibrate(const FomoModel& model, std::span<const Tensor> images) {
  if (images.empty()) throw ConfigError("calibration needs at least one image");
  if (model.format != ModelFormat::f32) throw ConfigError("calibration requires an f32 model");
  CalibrationStats stats;
  stats.names = activation_names(model);
  stats.ranges.assign(stats.names.size(), TensorRange{std::numeric_limits<float>::max(),
                                                      std::numeric_limits<float>::lowest()});
  for (const Tensor& img : images) {
    const auto acts = forward_activations(model, img);
    for (std::size_t i = 0; i < acts.size(); ++i) {
      const auto [lo, hi] = std::minmax_element(acts[i].values().begin(), acts[i].values().end());
      stats.ranges[i].min = std::min(stats.ranges[i].min, *lo);
      stats.ranges[i].max = std::max(stats.ranges[i].max, *hi);
    }
    ++stats.sample_count;
  }
  return stats;
}

std::vector<Tensor> select_calibration_images(const Dataset& dataset, int count, std::uint64_t seed) {
  std::vector<std::size_t> idx(dataset.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  for (std::size_t i = idx.size(); i > 1; --i)
    std::swap(idx[i - 1], idx[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1))]);
  idx.resize(std::min(idx.size(), static_cast<std::size_t>(std::max(count, 0))));
  std::sort(idx.begin(), idx.end());
  std::vector<Tensor> out;
  for (auto i : idx) out.push_back(dataset[i].image);
  return out;
}

QuantParams choose_quant_params(float min, float max, bool symmetric) {
  if (!std::isfinite(min) || !std::isfinite(max)) throw ConfigError("non-finite quantization range");
  if (symmetric) {
    const float amax = std::max(std::fabs(min), std::fabs(max));
    if (amax == 0.0f) return QuantParams{1.0f, 0};
    return QuantParams{amax / 127.0f, 0};
  }
  const double lo = std::min(min, 0.0f);
  const double hi = std::max(max, 0.0f);
  if (hi == lo) return QuantParams{1.0f, 0};
  const auto scale = static_cast<float>((hi - lo) / 255.0);
  const double zp = std::round(-128.0 - lo / scale);
  return QuantParams{scale, static_cast<std::int32_t>(std::clamp(zp, -128.0, 127.0))};
}

QuantTensor quantize_tensor(const Tensor& values, bool symmetric) {
  if (!values.all_finite()) throw ConfigError("cannot quantize non-finite values");
  float lo = 0.0f, hi = 0.0f;
  if (values.size() > 0) {
    const auto [mn, mx] = std::minmax_element(values.values().begin(), values.values().end());
    lo = *mn;
    hi = *mx;
  }
  const QuantParams p = choose_quant_params(lo, hi, symmetric);
  QuantTensor q(values.shape(), p);
  const float qmin = symmetric ? -127.0f : -128.0f;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = std::round(static_cast<double>(values.values()[i]) / p.scale) + p.zero_point;
    q.values()[i] = static_cast<std::int8_t>(std::clamp(v, static_cast<double>(qmin), 127.0));
  }
  return q;
}

FomoModel quantize_model(const FomoModel& model, const CalibrationStats& stats) {
  if (model.format != ModelFormat::f32) throw ConfigError("model is already quantized");
  model.validate();
  const auto names = activation_names(model);
  std::vector<QuantParams> act(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    const TensorRange* r = stats.find(names[i]);
    if (!r) throw CalibrationCoverageError("no calibration range for activation '" + names[i] + "'");
    act[i] = choose_quant_params(r->min, r->max, false);
  }
  // A relu6 keeps its input's parameters; the producer saturates straight
  // into the post-activation range.
  for (std::size_t i = 0; i < model.layers.size(); ++i)
    if (model.layers[i].kind == LayerKind::relu6) act[i] = act[i + 1];

  FomoModel q;
  q.config = model.config;
  q.format = ModelFormat::int8;
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    const Layer& src = model.layers[i];
    Layer l = src;
    l.weights.clear();
    l.bias.clear();
    LayerQuant lq;
    lq.input = act[i];
    lq.output = src.kind == LayerKind::relu6 ? act[i] : act[i + 1];
    if (src.kind == LayerKind::residual_add) lq.skip = act[static_cast<std::size_t>(src.skip_source)];
    if (src.has_weights()) {
      const QuantTensor w = quantize_tensor(Tensor(src.weight_shape(), src.weights), true);
      lq.weight = w.params();
      l.qweights = w.values();
      const double bias_scale = static_cast<double>(lq.input.scale) * lq.weight.scale;
      l.qbias.resize(src.bias.size());
      for (std::size_t k = 0; k < src.bias.size(); ++k) {
        const double b = std::round(src.bias[k] / bias_scale);
        l.qbias[k] = static_cast<std::int32_t>(
            std::clamp(b, static_cast<double>(std::numeric_limits<std::int32_t>::min() / 2),
                       static_cast<double>(std::numeric_limits<std::int32_t>::max() / 2)));
      }
    }
    l.quant = lq;
    q.layers.push_back(std::move(l));
  }
  q.validate();
  return q;
}

}  // namespace lvx
