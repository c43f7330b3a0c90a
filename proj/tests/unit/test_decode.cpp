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

#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "lvx/decode.hpp"
#include "oracles.hpp"

using namespace lvx;

namespace {

GridHeatmap heatmap(int g, int k, float fg = 0.01f) {
  GridHeatmap h;
  h.grid_h = h.grid_w = g;
  h.probs = Tensor({1, g, g, k});
  for (int r = 0; r < g; ++r)
    for (int c = 0; c < g; ++c) {
      h.probs.at(0, r, c, 0) = 1.0f - fg * static_cast<float>(k - 1);
      for (int ch = 1; ch < k; ++ch) h.probs.at(0, r, c, ch) = fg;
    }
  return h;
}

void set_cell(GridHeatmap& h, int r, int c, int cls, float p) {
  const int k = h.channels();
  for (int ch = 0; ch < k; ++ch) h.probs.at(0, r, c, ch) = (1.0f - p) / static_cast<float>(k - 1);
  h.probs.at(0, r, c, cls) = p;
}

}  // namespace

TEST_CASE("threshold_cells") {
  auto h = heatmap(4, 2, 0.5f);
  CHECK(threshold_cells(h, 0.5).empty());

  h = heatmap(4, 2);
  set_cell(h, 1, 2, 1, 0.9f);
  const auto cells = threshold_cells(h, 0.5);
  REQUIRE(cells.size() == 1);
  CHECK(cells[0].row == 1);
  CHECK(cells[0].col == 2);
  CHECK(cells[0].class_id == 1);
  CHECK(threshold_cells(h, 0.95).empty());
}

TEST_CASE("merge_and_centroid") {
  std::vector<PositiveCell> one{{2, 1, 1, 0.8f}};
  auto d = merge_and_centroid(one, 8, 32);
  REQUIRE(d.size() == 1);
  CHECK(d[0].x == 12.0);
  CHECK(d[0].y == 20.0);

  std::vector<PositiveCell> pair{{1, 1, 1, 0.7f}, {1, 2, 1, 0.7f}};
  d = merge_and_centroid(pair, 8, 32);
  REQUIRE(d.size() == 1);
  CHECK(d[0].x == doctest::Approx(16.0));
  CHECK(d[0].y == doctest::Approx(12.0));
  CHECK(d[0].cell_count == 2);

  std::vector<PositiveCell> diag{{0, 0, 1, 0.6f}, {1, 1, 1, 0.9f}};
  d = merge_and_centroid(diag, 8, 32);
  REQUIRE(d.size() == 1);
  CHECK(d[0].confidence == 0.9f);

  std::vector<PositiveCell> corners{{0, 0, 1, 0.6f}, {3, 3, 1, 0.9f}};
  d = merge_and_centroid(corners, 8, 32);
  REQUIRE(d.size() == 2);
  CHECK(d[0].confidence >= d[1].confidence);

  std::vector<PositiveCell> mixed{{0, 0, 1, 0.6f}, {0, 1, 2, 0.9f}};
  CHECK(merge_and_centroid(mixed, 8, 32).size() == 2);
}

TEST_CASE("merge properties: order invariance, count bounds, idempotence") {
  Rng rng(61);
  for (int trial = 0; trial < 100; ++trial) {
    const int g = 8;
    std::vector<PositiveCell> cells;
    for (int r = 0; r < g; ++r)
      for (int c = 0; c < g; ++c)
        if (rng.uniform() < 0.2)
          cells.push_back({r, c, static_cast<int>(rng.uniform_int(1, 2)), static_cast<float>(rng.uniform(0.5, 1.0))});
    const auto d = merge_and_centroid(cells, 8, 64);
    auto shuffled = cells;
    for (std::size_t i = shuffled.size(); i > 1; --i)
      std::swap(shuffled[i - 1], shuffled[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i) - 1))]);
    CHECK(merge_and_centroid(shuffled, 8, 64) == d);
    CHECK(d.size() <= cells.size());
    int members = 0;
    for (const auto& det : d) {
      members += det.cell_count;
      CHECK(det.x >= 0.0);
      CHECK(det.x <= 64.0);
    }
    CHECK(members == static_cast<int>(cells.size()));

    // Decoding one representative cell per detection reproduces the set.
    std::vector<PositiveCell> reps;
    for (const auto& det : d) reps.push_back({static_cast<int>(det.y / 8), static_cast<int>(det.x / 8), det.class_id, det.confidence});
    const auto again = merge_and_centroid(reps, 8, 64);
    CHECK(again.size() <= d.size());
  }
}

TEST_CASE("merging a decoded set of isolated clusters changes nothing") {
  std::vector<PositiveCell> cells{{0, 0, 1, 0.9f}, {3, 5, 1, 0.7f}, {6, 2, 1, 0.8f}};
  const auto d = merge_and_centroid(cells, 8, 64);
  std::vector<PositiveCell> reps;
  for (const auto& det : d) reps.push_back({static_cast<int>(det.y / 8), static_cast<int>(det.x / 8), det.class_id, det.confidence});
  CHECK(merge_and_centroid(reps, 8, 64) == d);
}

TEST_CASE("detect on a background-only model returns nothing") {
  auto m = build_fomo(ModelConfig{32, 1, 0.35, 8}, 62);
  auto& head = m.layers.back();
  std::fill(head.weights.begin(), head.weights.end(), 0.0f);
  head.bias = {10.0f, -10.0f};
  CHECK(detect(m, Tensor({1, 32, 32, 3}, 0.0f)).empty());
  const auto r = detect_with_cells(m, Tensor({1, 32, 32, 3}, 0.5f));
  CHECK(r.cells.empty());

  head.bias = {-10.0f, 10.0f};
  const auto all = detect_with_cells(m, Tensor({1, 32, 32, 3}, 0.5f));
  CHECK(all.cells.size() == 16);
  REQUIRE(all.detections.size() == 1);
  CHECK(all.detections[0].cell_count == 16);
}

TEST_CASE("write_detections line format") {
  std::ostringstream os;
  const std::vector<Detection> d{{1, 0.875f, 12.0, 20.5, 2}};
  write_detections(os, "img_0001", d);
  CHECK(os.str().rfind("img_0001 1 0.875", 0) == 0);
}
