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

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lvx/model.hpp"

namespace lvx {

/// A grid cell whose argmax is a foreground class at or above threshold.
struct PositiveCell {
  int row = 0;
  int col = 0;
  int class_id = 0;
  float prob = 0.0f;
  friend bool operator==(const PositiveCell&, const PositiveCell&) = default;
};

/// One decoded object: a same-class cluster of 8-connected positive cells.
struct Detection {
  int class_id = 0;
  float confidence = 0.0f;  // max member probability
  double x = 0.0;           // probability-weighted mean of member cell centres
  double y = 0.0;
  int cell_count = 0;
  friend bool operator==(const Detection&, const Detection&) = default;
};

/// Argmax ties resolve to the lower channel, so background wins any tie.
std::vector<PositiveCell> threshold_cells(const GridHeatmap& heatmap, double tau = 0.5);

/// Sorted by descending confidence, ties by the cluster's first (row, col).
std::vector<Detection> merge_and_centroid(std::span<const PositiveCell> cells, int cell_size,
                                          int image_size);

struct DetectionResult {
  std::vector<PositiveCell> cells;
  std::vector<Detection> detections;
};

DetectionResult detect_with_cells(const FomoModel& model, const Tensor& image, double tau = 0.5);

std::vector<Detection> detect(const FomoModel& model, const Tensor& image, double tau = 0.5);

/// "image_id class confidence x y cell_count", one line per detection.
void write_detections(std::ostream& os, const std::string& image_id,
                      std::span<const Detection> detections);

}  // namespace lvx
