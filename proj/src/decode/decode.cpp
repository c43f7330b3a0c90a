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

#include "lvx/decode.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <tuple>

#include "lvx/error.hpp"

namespace lvx {

std::vector<PositiveCell> threshold_cells(const GridHeatmap& heatmap, double tau) {
  std::vector<PositiveCell> out;
  const int k = heatmap.channels();
  for (int r = 0; r < heatmap.grid_h; ++r) {
    for (int c = 0; c < heatmap.grid_w; ++c) {
      int best = 0;
      float best_p = heatmap.prob(r, c, 0);
      for (int j = 1; j < k; ++j) {
        const float p = heatmap.prob(r, c, j);
        if (p > best_p) {
          best = j;
          best_p = p;
        }
      }
      if (best != 0 && best_p >= tau) out.push_back({r, c, best, best_p});
    }
  }
  return out;
}

std::vector<Detection> merge_and_centroid(std::span<const PositiveCell> cells, int cell_size,
                                          int image_size) {
  // Canonical order makes clustering independent of the input enumeration.
  std::map<std::tuple<int, int, int>, float> grid;  // (class, row, col) -> prob
  for (const PositiveCell& p : cells) {
    auto [it, inserted] = grid.emplace(std::make_tuple(p.class_id, p.row, p.col), p.prob);
    if (!inserted) it->second = std::max(it->second, p.prob);
  }

  struct Cluster {
    Detection det;
    int row;
    int col;
  };
  std::vector<Cluster> clusters;
  std::map<std::tuple<int, int, int>, bool> seen;
  for (const auto& [key, prob] : grid) {
    if (seen[key]) continue;
    const auto [cls, row0, col0] = key;
    Cluster cl{{cls, 0.0f, 0.0, 0.0, 0}, row0, col0};
    double wsum = 0.0;
    std::vector<std::tuple<int, int, int>> stack{key};
    seen[key] = true;
    while (!stack.empty()) {
      const auto cur = stack.back();
      stack.pop_back();
      const auto [c, r, col] = cur;
      const float p = grid.at(cur);
      const double cx = col * cell_size + cell_size / 2.0;
      const double cy = r * cell_size + cell_size / 2.0;
      cl.det.x += p * cx;
      cl.det.y += p * cy;
      wsum += p;
      cl.det.confidence = std::max(cl.det.confidence, p);
      ++cl.det.cell_count;
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
          const auto nb = std::make_tuple(c, r + dr, col + dc);
          if (grid.count(nb) && !seen[nb]) {
            seen[nb] = true;
            stack.push_back(nb);
          }
        }
    }
    if (wsum > 0.0) {
      cl.det.x /= wsum;
      cl.det.y /= wsum;
    } else {
      cl.det.x = col0 * cell_size + cell_size / 2.0;
      cl.det.y = row0 * cell_size + cell_size / 2.0;
    }
    cl.det.x = std::clamp(cl.det.x, 0.0, static_cast<double>(image_size));
    cl.det.y = std::clamp(cl.det.y, 0.0, static_cast<double>(image_size));
    clusters.push_back(cl);
  }

  std::sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) {
    if (a.det.confidence != b.det.confidence) return a.det.confidence > b.det.confidence;
    return std::tie(a.row, a.col, a.det.class_id) < std::tie(b.row, b.col, b.det.class_id);
  });
  std::vector<Detection> out;
  out.reserve(clusters.size());
  for (const Cluster& c : clusters) out.push_back(c.det);
  return out;
}

DetectionResult detect_with_cells(const FomoModel& model, const Tensor& image, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("tau must lie in (0, 1)");
  DetectionResult r;
  r.cells = threshold_cells(forward(model, image), tau);
  r.detections = merge_and_centroid(r.cells, model.config.cell_size, model.config.input_size);
  return r;
}

std::vector<Detection> detect(const FomoModel& model, const Tensor& image, double tau) {
  return detect_with_cells(model, image, tau).detections;
}

void write_detections(std::ostream& os, const std::string& image_id,
                      std::span<const Detection> detections) {
  for (const Detection& d : detections)
    os << image_id << ' ' << d.class_id << ' ' << d.confidence << ' ' << d.x << ' ' << d.y << ' '
       << d.cell_count << '\n';
}

}  // namespace lvx
