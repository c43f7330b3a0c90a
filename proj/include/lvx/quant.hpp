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
#include <span>
#include <string>
#include <vector>

#include "lvx/labels.hpp"
#include "lvx/model.hpp"

namespace lvx {

struct TensorRange {
  float min = 0.0f;
  float max = 0.0f;
  friend bool operator==(const TensorRange&, const TensorRange&) = default;
};

/// Observed range of every activation tensor, named "input" and then after
/// the layer that produces it.
struct CalibrationStats {
  std::vector<std::string> names;
  std::vector<TensorRange> ranges;
  int sample_count = 0;

  const TensorRange* find(const std::string& name) const;
  /// Range union with stats gathered on another image set for the same model.
  void merge(const CalibrationStats& other);
  friend bool operator==(const CalibrationStats&, const CalibrationStats&) = default;
};

std::vector<std::string> activation_names(const FomoModel& model);

CalibrationStats calibrate(const FomoModel& model, std::span<const Tensor> images);

/// Seeded choice of `count` images (all of them when the set is smaller).
std::vector<Tensor> select_calibration_images(const Dataset& dataset, int count, std::uint64_t seed);

/// Symmetric: zero_point 0, scale max|v| / 127. Asymmetric: the range is
/// widened to contain 0, scale (max - min) / 255, min lands near -128.
/// A degenerate all-zero range gets scale 1 and zero_point 0.
QuantParams choose_quant_params(float min, float max, bool symmetric);

QuantTensor quantize_tensor(const Tensor& values, bool symmetric);

/// Per-tensor int8 weights, int32 biases at input_scale * weight_scale and
/// activation parameters from `stats`. Throws CalibrationCoverageError.
FomoModel quantize_model(const FomoModel& model, const CalibrationStats& stats);

}  // namespace lvx
