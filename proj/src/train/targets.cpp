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

#include <algorithm>
#include <cmath>
#include <string>

#include "lvx/error.hpp"
#include "lvx/train.hpp"

namespace lvx {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (!(background_weight > 0.0 && background_weight <= 1.0))
    throw ConfigError("background_weight must lie in (0, 1]");
  if (validation_fraction < 0.0 || validation_fraction >= 1.0)
    throw ConfigError("validation_fraction must lie in [0, 1)");
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("tau must lie in (0, 1)");
  if (!(bn_weight_scale > 0.0)) throw ConfigError("bn_weight_scale must be positive");
}

TargetGrid rasterize_targets(std::span<const ObjectLabel> objects, int input_size, int cell_size) {
  if (cell_size < 1 || input_size % cell_size != 0)
    throw ConfigError("input_size must be a positive multiple of cell_size");
  TargetGrid g;
  g.grid_h = g.grid_w = input_size / cell_size;
  g.cells.assign(static_cast<std::size_t>(g.grid_h) * g.grid_w, 0);
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const ObjectLabel& o = objects[i];
    if (!(o.x >= 0.0 && o.x < input_size && o.y >= 0.0 && o.y < input_size))
      throw ValidationError("object " + std::to_string(i) + " centroid (" + std::to_string(o.x) +
                            ", " + std::to_string(o.y) + ") lies outside the " +
                            std::to_string(input_size) + "px image");
    if (o.class_id < 1) throw ValidationError("object " + std::to_string(i) + " has class id < 1");
    const int col = std::min(static_cast<int>(std::floor(o.x / cell_size)), g.grid_w - 1);
    const int row = std::min(static_cast<int>(std::floor(o.y / cell_size)), g.grid_h - 1);
    int& cell = g.cells[static_cast<std::size_t>(row) * g.grid_w + col];
    if (cell == 0) cell = o.class_id;
  }
  return g;
}

double per_cell_loss(const Tensor& logits, const TargetGrid& target, double background_weight) {
  const Shape& s = logits.shape();
  if (s.n != 1 || s.h != target.grid_h || s.w != target.grid_w)
    throw ShapeError("logits " + s.str() + " do not match a " + std::to_string(target.grid_h) +
                     "x" + std::to_string(target.grid_w) + " target grid");
  const auto k = static_cast<std::size_t>(s.c);
  const std::size_t cells = target.cells.size();
  double total = 0.0;
  for (std::size_t cell = 0; cell < cells; ++cell) {
    const float* z = logits.data().data() + cell * k;
    const int t = target.cells[cell];
    if (t < 0 || static_cast<std::size_t>(t) >= k) throw ShapeError("target label out of range");
    const double zmax = *std::max_element(z, z + k);
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) sum += std::exp(z[i] - zmax);
    const double nll = std::log(sum) - (z[t] - zmax);
    total += (t == 0 ? background_weight : 1.0) * nll;
  }
  return total / static_cast<double>(cells);
}

}  // namespace lvx
