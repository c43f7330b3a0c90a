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
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "lvx/labels.hpp"
#include "lvx/model.hpp"

namespace lvx {

struct TrainConfig {
  double learning_rate = 1e-4;
  int batch_size = 32;
  int epochs = 300;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double background_weight = 0.1;
  std::uint64_t seed = 42;
  /// Share of the supplied data held out for model selection.
  double validation_fraction = 0.2;
  bool horizontal_flip = false;
  /// Detection threshold and match tolerance used for validation F1.
  double tau = 0.5;
  double tolerance_cells = 1.0;
  // Conv weights feeding batch norm are multiplied by this before the first
  // step. The normalized network is unchanged; Adam's relative step grows.
  double bn_weight_scale = 0.01;

  void validate() const;
};

/// Per-cell class labels, row-major, 0 = background.
struct TargetGrid {
  int grid_h = 0;
  int grid_w = 0;
  std::vector<int> cells;

  int at(int row, int col) const { return cells[static_cast<std::size_t>(row) * grid_w + col]; }
  friend bool operator==(const TargetGrid&, const TargetGrid&) = default;
};

/// Labels the cell containing each centroid. Two objects in one cell collapse
/// to a single label; the earlier object wins.
TargetGrid rasterize_targets(std::span<const ObjectLabel> objects, int input_size, int cell_size);

/// Mean over cells of cross-entropy, weighted by background_weight on
/// background cells and 1 elsewhere. logits: (1, gh, gw, k).
double per_cell_loss(const Tensor& logits, const TargetGrid& target, double background_weight);

/// A named view of one trainable tensor.
template <class T>
struct ParamView {
  std::string name;
  std::span<T> values;
};

/// Training-time form of a FOMO network. Every convolution outside the head is
/// followed by batch normalization (batch statistics while training, running
/// statistics once folded back into a FomoModel by export_model()).
/// Instantiated for float (training) and double (gradient checking).
template <class T>
class TrainableFomo {
 public:
  explicit TrainableFomo(const FomoModel& model);
  ~TrainableFomo();
  TrainableFomo(TrainableFomo&&) noexcept;
  TrainableFomo& operator=(TrainableFomo&&) noexcept;

  std::vector<ParamView<T>> parameters();

  /// Batch loss; batch statistics are used but running statistics are not touched.
  T loss(std::span<const Tensor> images, std::span<const TargetGrid> targets,
         double background_weight) const;

  /// Batch loss and d(loss)/d(parameter), aligned with parameters(). When
  /// update_running_stats is set the batch statistics feed the running averages.
  T loss_and_gradients(std::span<const Tensor> images, std::span<const TargetGrid> targets,
                       double background_weight, std::vector<std::vector<T>>& grads,
                       bool update_running_stats = false);

  /// Folds batch normalization into convolution weights and biases.
  FomoModel export_model() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

extern template class TrainableFomo<float>;
extern template class TrainableFomo<double>;

/// Gradient of the mean batch loss for every trainable parameter of `model`.
std::vector<std::vector<float>> gradients(const FomoModel& model, std::span<const Tensor> images,
                                          std::span<const TargetGrid> targets,
                                          const TrainConfig& config);

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  double val_f1 = 0.0;
  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainResult {
  FomoModel model;  // best validation F1 snapshot
  std::vector<EpochRecord> history;
  int best_epoch = 0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Images must already be at model.config.input_size.
TrainResult train(const FomoModel& model, const Dataset& dataset, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

}  // namespace lvx
