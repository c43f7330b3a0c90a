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

#include "lvx/decode.hpp"
#include "lvx/labels.hpp"

namespace lvx {

struct ClassCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

/// Object-level TP/FP/FN per foreground class (index 0 is class 1) plus a
/// cell-level true-negative count.
struct ConfusionCounts {
  std::vector<ClassCounts> per_class;
  std::int64_t tn = 0;

  explicit ConfusionCounts(int num_classes = 1) : per_class(static_cast<std::size_t>(num_classes)) {}
  int num_classes() const { return static_cast<int>(per_class.size()); }
  ConfusionCounts& operator+=(const ConfusionCounts& other);
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// Greedy matching in descending confidence order: each detection takes the
/// nearest unmatched same-class centroid within tolerance_cells * cell_size.
/// tn is left at zero; see count_true_negatives.
ConfusionCounts match_detections(std::span<const Detection> detections,
                                 std::span<const ObjectLabel> ground_truth, int num_classes,
                                 int cell_size, double tolerance_cells = 1.0);

/// Grid cells holding neither a ground-truth centroid nor a positive cell.
std::int64_t count_true_negatives(std::span<const PositiveCell> positives,
                                  std::span<const ObjectLabel> ground_truth, int grid_size,
                                  int cell_size);

// Ratios with a zero denominator contribute 0.
double macro_precision(const ConfusionCounts& counts);
double macro_recall(const ConfusionCounts& counts);
/// Mean over classes of the per-class harmonic mean of precision and recall.
double macro_f1(const ConfusionCounts& counts);
/// (TP + TN) / (TP + TN + FP + FN) summed over classes. Throws UndefinedInputError when empty.
double accuracy(const ConfusionCounts& counts);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct MetricsReport {
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double accuracy = 0.0;
  std::vector<ClassMetrics> per_class;
  ConfusionCounts counts;
  int images = 0;
};

MetricsReport make_report(const ConfusionCounts& counts, int images);

MetricsReport evaluate(const FomoModel& model, const Dataset& dataset, double tau = 0.5,
                       double tolerance_cells = 1.0);

std::string format_report_table(const MetricsReport& report);
/// JSON object with F1, Recall, Precision, Accuracy and the raw counts.
std::string report_to_json(const MetricsReport& report);

}  // namespace lvx
