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

#include "lvx/model.hpp"

#include <cmath>
#include <string>

#include "lvx/error.hpp"
#include "lvx/rng.hpp"

namespace lvx {

void ModelConfig::validate() const {
  if (input_size != 32 && input_size != 64 && input_size != 96)
    throw ConfigError("input_size must be 32, 64 or 96, got " + std::to_string(input_size));
  if (num_classes < 1) throw ConfigError("num_classes must be positive");
  if (!(width_multiplier > 0.0)) throw ConfigError("width_multiplier must be positive");
  if (cell_size != 8) throw ConfigError("cell_size is fixed at 8");
  if (input_size % cell_size != 0) throw ConfigError("input_size must be divisible by cell_size");
}

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::conv: return "conv";
    case LayerKind::depthwise: return "depthwise";
    case LayerKind::pointwise: return "pointwise";
    case LayerKind::relu6: return "relu6";
    case LayerKind::residual_add: return "residual_add";
    case LayerKind::head: return "head";
  }
  return "unknown";
}

std::string_view to_string(ModelFormat format) {
  return format == ModelFormat::int8 ? "int8" : "f32";
}

LayerKind layer_kind_from_string(std::string_view s) {
  for (auto k : {LayerKind::conv, LayerKind::depthwise, LayerKind::pointwise, LayerKind::relu6,
                 LayerKind::residual_add, LayerKind::head})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown layer kind '" + std::string(s) + "'");
}

Shape Layer::weight_shape() const {
  if (kind == LayerKind::depthwise) return Shape{kh, kw, cin, 1};
  return Shape{kh, kw, cin, cout};
}

int make_divisible(double channels, int divisor) {
  int v = std::max(divisor, static_cast<int>(channels + divisor / 2.0) / divisor * divisor);
  if (v < 0.9 * channels) v += divisor;
  return v;
}

std::vector<Shape> FomoModel::activation_shapes() const {
  std::vector<Shape> shapes;
  shapes.push_back(Shape{1, config.input_size, config.input_size, 3});
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const Layer& l = layers[i];
    const Shape in = shapes.back();
    if (in.c != l.cin)
      throw ConfigError("layer " + std::to_string(i) + " (" + l.name + ") expects " +
                        std::to_string(l.cin) + " channels, previous layer yields " +
                        std::to_string(in.c));
    switch (l.kind) {
      case LayerKind::relu6:
        shapes.push_back(in);
        break;
      case LayerKind::residual_add: {
        if (l.skip_source < 0 || l.skip_source > static_cast<int>(i))
          throw ConfigError("layer " + l.name + " has an invalid skip source");
        if (shapes[l.skip_source] != in)
          throw ConfigError("layer " + l.name + " skip shape " + shapes[l.skip_source].str() +
                            " does not match " + in.str());
        shapes.push_back(in);
        break;
      }
      default: {
        const auto g = conv_geometry(in.h, in.w, l.kh, l.kw, l.stride, l.padding);
        shapes.push_back(Shape{1, g.out_h, g.out_w, l.cout});
      }
    }
  }
  return shapes;
}

std::size_t FomoModel::parameter_count() const {
  std::size_t n = 0;
  for (const Layer& l : layers) {
    if (!l.has_weights()) continue;
    n += l.weight_shape().size() + static_cast<std::size_t>(l.cout);
  }
  return n;
}

std::size_t FomoModel::weight_bytes() const {
  std::size_t n = 0;
  for (const Layer& l : layers) {
    n += l.weights.size() * 4 + l.bias.size() * 4;
    n += l.qweights.size() + l.qbias.size() * 4;
  }
  return n;
}

void FomoModel::validate() const {
  config.validate();
  if (layers.empty() || layers.back().kind != LayerKind::head)
    throw ConfigError("model must end with a head layer");
  if (layers.back().cout != config.num_classes + 1)
    throw ConfigError("head emits " + std::to_string(layers.back().cout) + " channels, expected " +
                      std::to_string(config.num_classes + 1));
  const auto shapes = activation_shapes();
  if (shapes.back().h != config.grid_size() || shapes.back().w != config.grid_size())
    throw ConfigError("backbone does not downsample by the cell size");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const Layer& l = layers[i];
    if (!l.has_weights()) continue;
    const std::size_t nw = l.weight_shape().size();
    const auto nb = static_cast<std::size_t>(l.cout);
    const bool ok = format == ModelFormat::f32
                        ? l.weights.size() == nw && l.bias.size() == nb
                        : l.qweights.size() == nw && l.qbias.size() == nb;
    if (!ok) throw ConfigError("layer " + l.name + " has wrongly sized parameters");
  }
  if (format == ModelFormat::int8)
    for (const Layer& l : layers)
      if (!l.quant) throw ConfigError("int8 layer " + l.name + " lacks quantization parameters");
}

namespace {

Layer weighted(std::string name, LayerKind kind, int k, int stride, int cin, int cout) {
  Layer l;
  l.name = std::move(name);
  l.kind = kind;
  l.kh = l.kw = k;
  l.stride = stride;
  l.cin = cin;
  l.cout = kind == LayerKind::depthwise ? cin : cout;
  return l;
}

Layer relu(std::string name, int c) {
  Layer l;
  l.name = std::move(name);
  l.kind = LayerKind::relu6;
  l.cin = l.cout = c;
  return l;
}

void init_weights(Layer& l, Rng& rng, double gain) {
  const Shape ws = l.weight_shape();
  const int fan_in = l.kind == LayerKind::depthwise ? l.kh * l.kw : l.kh * l.kw * l.cin;
  const double std = std::sqrt(gain / fan_in);
  l.weights.resize(ws.size());
  for (float& w : l.weights) w = static_cast<float>(rng.normal() * std);
  l.bias.assign(static_cast<std::size_t>(l.cout), 0.0f);
}

}  // namespace

FomoModel build_fomo(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  const double a = config.width_multiplier;
  FomoModel m;
  m.config = config;

  const int stem = make_divisible(32 * a);
  m.layers.push_back(weighted("stem_conv", LayerKind::conv, 3, 2, 3, stem));
  m.layers.push_back(relu("stem_relu", stem));

  struct Block {
    int out;
    int stride;
  };
  const Block blocks[] = {{make_divisible(24 * a), 2}, {make_divisible(32 * a), 2},
                          {make_divisible(32 * a), 1}};
  constexpr int kExpansion = 6;
  int cin = stem;
  int b = 0;
  for (const Block& blk : blocks) {
    const std::string p = "block" + std::to_string(++b) + "_";
    const int block_input = static_cast<int>(m.layers.size());
    const int hidden = cin * kExpansion;
    m.layers.push_back(weighted(p + "expand", LayerKind::pointwise, 1, 1, cin, hidden));
    m.layers.push_back(relu(p + "expand_relu", hidden));
    m.layers.push_back(weighted(p + "depthwise", LayerKind::depthwise, 3, blk.stride, hidden, hidden));
    m.layers.push_back(relu(p + "depthwise_relu", hidden));
    m.layers.push_back(weighted(p + "project", LayerKind::pointwise, 1, 1, hidden, blk.out));
    if (blk.stride == 1 && cin == blk.out) {
      Layer add;
      add.name = p + "add";
      add.kind = LayerKind::residual_add;
      add.cin = add.cout = blk.out;
      add.skip_source = block_input;
      m.layers.push_back(add);
    }
    cin = blk.out;
  }
  m.layers.push_back(weighted("head", LayerKind::head, 1, 1, cin, config.num_classes + 1));

  Rng rng(seed);
  for (std::size_t i = 0; i < m.layers.size(); ++i) {
    Layer& l = m.layers[i];
    if (!l.has_weights()) continue;
    const bool linear = i + 1 >= m.layers.size() || m.layers[i + 1].kind != LayerKind::relu6;
    init_weights(l, rng, linear ? 1.0 : 2.0);
  }
  m.validate();
  return m;
}

namespace {

void check_input(const FomoModel& model, const Tensor& image) {
  const Shape want{1, model.config.input_size, model.config.input_size, 3};
  if (image.shape() != want)
    throw ShapeError("model expects input " + want.str() + ", got " + image.shape().str());
}

Tensor weight_tensor(const Layer& l) { return Tensor(l.weight_shape(), l.weights); }

std::vector<QuantTensor> forward_int8(const FomoModel& model, const Tensor& image) {
  std::vector<QuantTensor> acts;
  const QuantParams in_params = model.layers.front().quant->input;
  QuantTensor x(image.shape(), in_params);
  for (std::size_t i = 0; i < image.size(); ++i) x.values()[i] = in_params.quantize(image.values()[i]);
  acts.push_back(std::move(x));
  for (const Layer& l : model.layers) {
    const QuantTensor& in = acts.back();
    const LayerQuant& q = *l.quant;
    switch (l.kind) {
      case LayerKind::relu6:
        acts.push_back(relu6_int8(in));
        break;
      case LayerKind::residual_add:
        acts.push_back(add_int8(in, acts[l.skip_source], q.output));
        break;
      case LayerKind::depthwise:
        acts.push_back(depthwise_conv2d_int8(in, QuantTensor(l.weight_shape(), q.weight, l.qweights),
                                             l.qbias, q.output, l.stride, l.padding));
        break;
      default:
        acts.push_back(conv2d_int8(in, QuantTensor(l.weight_shape(), q.weight, l.qweights), l.qbias,
                                   q.output, l.stride, l.padding));
    }
  }
  return acts;
}

}  // namespace

std::vector<Tensor> forward_activations(const FomoModel& model, const Tensor& image) {
  check_input(model, image);
  if (model.format == ModelFormat::int8) {
    std::vector<Tensor> out;
    for (const auto& q : forward_int8(model, image)) out.push_back(q.dequantize());
    return out;
  }
  std::vector<Tensor> acts;
  acts.push_back(image);
  for (const Layer& l : model.layers) {
    const Tensor& in = acts.back();
    switch (l.kind) {
      case LayerKind::relu6:
        acts.push_back(relu6(in));
        break;
      case LayerKind::residual_add:
        acts.push_back(add(in, acts[l.skip_source]));
        break;
      case LayerKind::depthwise:
        acts.push_back(depthwise_conv2d(in, weight_tensor(l), l.bias, l.stride, l.padding));
        break;
      default:
        acts.push_back(conv2d(in, weight_tensor(l), l.bias, l.stride, l.padding));
    }
  }
  return acts;
}

Tensor forward_logits(const FomoModel& model, const Tensor& image) {
  check_input(model, image);
  if (model.format == ModelFormat::int8) return forward_int8(model, image).back().dequantize();
  return std::move(forward_activations(model, image).back());
}

GridHeatmap forward(const FomoModel& model, const Tensor& image) {
  GridHeatmap hm;
  hm.probs = softmax_per_cell(forward_logits(model, image));
  hm.grid_h = hm.probs.shape().h;
  hm.grid_w = hm.probs.shape().w;
  return hm;
}

}  // namespace lvx
