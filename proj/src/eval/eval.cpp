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

#include "lvx/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "lvx/error.hpp"

namespace lvx {

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& other) {
  if (other.num_classes() != num_classes()) throw ConfigError("confusion counts class mismatch");
  for (std::size_t i = 0; i < per_class.size(); ++i) {
    per_class[i].tp += other.per_class[i].tp;
    per_class[i].fp += other.per_class[i].fp;
    per_class[i].fn += other.per_class[i].fn;
  }
  tn += other.tn;
  return *this;
}

ConfusionCounts match_detections(std::span<const Detection> detections,
                                 std::span<const ObjectLabel> ground_truth, int num_classes,
                                 int cell_size, double tolerance_cells) {
  if (!(tolerance_cells > 0.0)) throw ConfigError("match tolerance must be positive");
  ConfusionCounts counts(num_classes);
  std::vector<std::size_t> order(detections.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return detections[a].confidence > detections[b].confidence;
  });

  const double radius = tolerance_cells * cell_size;
  std::vector<bool> taken(ground_truth.size(), false);
  for (std::size_t di : order) {
    const Detection& d = detections[di];
    if (d.class_id < 1 || d.class_id > num_classes)
      throw ConfigError("detection class " + std::to_string(d.class_id) + " out of range");
    std::size_t best = ground_truth.size();
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < ground_truth.size(); ++g) {
      if (taken[g] || ground_truth[g].class_id != d.class_id) continue;
      const double dist = std::hypot(ground_truth[g].x - d.x, ground_truth[g].y - d.y);
      if (dist <= radius && dist < best_dist) {
        best = g;
        best_dist = dist;
      }
    }
    auto& cc = counts.per_class[static_cast<std::size_t>(d.class_id - 1)];
    if (best < ground_truth.size()) {
      taken[best] = true;
      ++cc.tp;
    } else {
      ++cc.fp;
    }
  }
  for (std::size_t g = 0; g < ground_truth.size(); ++g) {
    const int cls = ground_truth[g].class_id;
    if (cls < 1 || cls > num_classes)
      throw ConfigError("ground-truth class " + std::to_string(cls) + " out of range");
    if (!taken[g]) ++counts.per_class[static_cast<std::size_t>(cls - 1)].fn;
  }
  return counts;
}

std::int64_t count_true_negatives(std::span<const PositiveCell> positives,
                                  std::span<const ObjectLabel> ground_truth, int grid_size,
                                  int cell_size) {
  std::vector<bool> busy(static_cast<std::size_t>(grid_size) * grid_size, false);
  for (const PositiveCell& p : positives)
    busy[static_cast<std::size_t>(p.row) * grid_size + p.col] = true;
  for (const ObjectLabel& o : ground_truth) {
    const int col = std::clamp(static_cast<int>(std::floor(o.x / cell_size)), 0, grid_size - 1);
    const int row = std::clamp(static_cast<int>(std::floor(o.y / cell_size)), 0, grid_size - 1);
    busy[static_cast<std::size_t>(row) * grid_size + col] = true;
  }
  return std::count(busy.begin(), busy.end(), false);
}

namespace {

double ratio(std::int64_t num, std::int64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

ClassMetrics class_metrics(const ClassCounts& c) {
  ClassMetrics m;
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.recall = ratio(c.tp, c.tp + c.fn);
  const double s = m.precision + m.recall;
  m.f1 = s == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / s;
  return m;
}

template <class F>
double macro(const ConfusionCounts& counts, F field) {
  if (counts.per_class.empty()) throw ConfigError("metrics need at least one class");
  double sum = 0.0;
  for (const auto& c : counts.per_class) sum += field(class_metrics(c));
  return sum / static_cast<double>(counts.per_class.size());
}

}  // namespace

double macro_precision(const ConfusionCounts& counts) {
  return macro(counts, [](const ClassMetrics& m) { return m.precision; });
}

double macro_recall(const ConfusionCounts& counts) {
  return macro(counts, [](const ClassMetrics& m) { return m.recall; });
}

double macro_f1(const ConfusionCounts& counts) {
  return macro(counts, [](const ClassMetrics& m) { return m.f1; });
}

double accuracy(const ConfusionCounts& counts) {
  std::int64_t tp = 0, fp = 0, fn = 0;
  for (const auto& c : counts.per_class) {
    tp += c.tp;
    fp += c.fp;
    fn += c.fn;
  }
  const std::int64_t den = tp + counts.tn + fp + fn;
  if (den == 0) throw UndefinedInputError("accuracy of an empty evaluation is undefined");
  return static_cast<double>(tp + counts.tn) / static_cast<double>(den);
}

MetricsReport make_report(const ConfusionCounts& counts, int images) {
  MetricsReport r;
  r.counts = counts;
  r.images = images;
  r.macro_precision = macro_precision(counts);
  r.macro_recall = macro_recall(counts);
  r.macro_f1 = macro_f1(counts);
  r.accuracy = accuracy(counts);
  for (const auto& c : counts.per_class) r.per_class.push_back(class_metrics(c));
  return r;
}

MetricsReport evaluate(const FomoModel& model, const Dataset& dataset, double tau,
                       double tolerance_cells) {
  if (dataset.empty()) throw ConfigError("cannot evaluate on an empty dataset");
  const int k = model.config.num_classes;
  const int cell = model.config.cell_size;
  ConfusionCounts total(k);
  for (const LabeledImage& item : dataset) {
    const auto result = detect_with_cells(model, item.image, tau);
    total += match_detections(result.detections, item.objects, k, cell, tolerance_cells);
    total.tn += count_true_negatives(result.cells, item.objects, model.config.grid_size(), cell);
  }
  return make_report(total, static_cast<int>(dataset.size()));
}

std::string format_report_table(const MetricsReport& r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << "F1-Score  Recall    Precision Accuracy  Images\n";
  os << std::setw(8) << r.macro_f1 << "  " << std::setw(8) << r.macro_recall << "  "
     << std::setw(8) << r.macro_precision << "  " << std::setw(8) << r.accuracy << "  "
     << r.images << '\n';
  os << "class  TP      FP      FN      precision recall    f1\n";
  for (std::size_t i = 0; i < r.per_class.size(); ++i) {
    const auto& c = r.counts.per_class[i];
    const auto& m = r.per_class[i];
    os << std::setw(5) << i + 1 << "  " << std::setw(6) << c.tp << "  " << std::setw(6) << c.fp
       << "  " << std::setw(6) << c.fn << "  " << std::setw(8) << m.precision << "  "
       << std::setw(8) << m.recall << "  " << std::setw(8) << m.f1 << '\n';
  }
  os << "cell-level TN: " << r.counts.tn << '\n';
  return os.str();
}

std::string report_to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["F1"] = r.macro_f1;
  j["Recall"] = r.macro_recall;
  j["Precision"] = r.macro_precision;
  j["Accuracy"] = r.accuracy;
  j["images"] = r.images;
  j["tn_cells"] = r.counts.tn;
  j["zero_division"] = "0";
  auto classes = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < r.per_class.size(); ++i) {
    const auto& c = r.counts.per_class[i];
    classes.push_back({{"class_id", i + 1},
                       {"tp", c.tp},
                       {"fp", c.fp},
                       {"fn", c.fn},
                       {"precision", r.per_class[i].precision},
                       {"recall", r.per_class[i].recall},
                       {"f1", r.per_class[i].f1}});
  }
  j["classes"] = classes;
  return j.dump(2);
}

}  // namespace lvx
