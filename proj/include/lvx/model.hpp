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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lvx/tensor.hpp"

namespace lvx {

struct ModelConfig {
  int input_size = 64;  // one of 32, 64, 96
  int num_classes = 1;  // foreground classes; background is channel 0
  double width_multiplier = 0.35;
  int cell_size = 8;

  int grid_size() const { return input_size / cell_size; }
  /// Throws ConfigError.
  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

enum class LayerKind { conv, depthwise, pointwise, relu6, residual_add, head };
enum class ModelFormat { f32, int8 };

std::string_view to_string(LayerKind kind);
std::string_view to_string(ModelFormat format);
LayerKind layer_kind_from_string(std::string_view s);

/// Quantization parameters attached to every layer of an int8 model.
/// `skip` is only meaningful for residual_add.
struct LayerQuant {
  QuantParams input;
  QuantParams weight;
  QuantParams output;
  QuantParams skip;
  friend bool operator==(const LayerQuant&, const LayerQuant&) = default;
};

struct Layer {
  std::string name;
  LayerKind kind = LayerKind::conv;
  int kh = 1;
  int kw = 1;
  int stride = 1;
  int cin = 0;
  int cout = 0;
  Padding padding = Padding::same;
  // Activation index feeding the skip branch: 0 is the model input, i + 1 is
  // the output of layer i.
  int skip_source = -1;

  std::vector<float> weights;  // f32 models
  std::vector<float> bias;
  std::vector<std::int8_t> qweights;  // int8 models
  std::vector<std::int32_t> qbias;
  std::optional<LayerQuant> quant;

  bool has_weights() const {
    return kind == LayerKind::conv || kind == LayerKind::depthwise ||
           kind == LayerKind::pointwise || kind == LayerKind::head;
  }
  /// (kh, kw, cin, cout) or (kh, kw, c, 1) for depthwise.
  Shape weight_shape() const;
  friend bool operator==(const Layer&, const Layer&) = default;
};

struct FomoModel {
  ModelConfig config;
  std::vector<Layer> layers;
  ModelFormat format = ModelFormat::f32;

  /// Shapes of activation 0 (input) through activation layers.size() (logits).
  std::vector<Shape> activation_shapes() const;
  std::size_t parameter_count() const;
  /// Bytes of weights and biases as stored (4 per f32, 1 per int8 weight, 4 per int32 bias).
  std::size_t weight_bytes() const;
  /// Checks downsampling, head width and chain compatibility. Throws ConfigError.
  void validate() const;
  friend bool operator==(const FomoModel&, const FomoModel&) = default;
};

/// Per-cell class distribution, channel 0 is background.
struct GridHeatmap {
  int grid_h = 0;
  int grid_w = 0;
  Tensor probs;  // (1, grid_h, grid_w, num_classes + 1)

  int channels() const { return probs.shape().c; }
  float prob(int row, int col, int k) const { return probs.at(0, row, col, k); }
};

/// Channel count rounded to a multiple of 8, never dropping more than 10%.
int make_divisible(double channels, int divisor = 8);

FomoModel build_fomo(const ModelConfig& config, std::uint64_t seed);

/// Float forward returning every activation, logits last (before softmax).
std::vector<Tensor> forward_activations(const FomoModel& model, const Tensor& image);

/// Forward to logits for either format; int8 logits are dequantized.
Tensor forward_logits(const FomoModel& model, const Tensor& image);

GridHeatmap forward(const FomoModel& model, const Tensor& image);

// LVTX1 container.
std::vector<std::uint8_t> serialize_model(const FomoModel& model);
FomoModel deserialize_model(std::span<const std::uint8_t> bytes);
void save_model(const FomoModel& model, const std::filesystem::path& path);
FomoModel load_model(const std::filesystem::path& path);

}  // namespace lvx
