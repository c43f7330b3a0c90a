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

#include <cmath>
#include <functional>

#include "lvx/error.hpp"
#include "lvx/eval.hpp"
#include "lvx/train.hpp"
#include "oracles.hpp"

using namespace lvx;

namespace {

ConfusionCounts counts_of(std::vector<ClassCounts> per_class, std::int64_t tn = 0) {
  ConfusionCounts c(static_cast<int>(per_class.size()));
  c.per_class = std::move(per_class);
  c.tn = tn;
  return c;
}

std::vector<oracle::Counts> plain(const ConfusionCounts& c) {
  std::vector<oracle::Counts> out;
  for (const auto& k : c.per_class) out.push_back({k.tp, k.fp, k.fn});
  return out;
}

// Maximum bipartite matching (Kuhn) over eligible detection/object pairs.
int optimal_tp(const std::vector<Detection>& d, const std::vector<ObjectLabel>& g, double radius) {
  std::vector<int> owner(g.size(), -1);
  std::function<bool(std::size_t, std::vector<bool>&)> augment = [&](std::size_t i, std::vector<bool>& seen) {
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (seen[j] || g[j].class_id != d[i].class_id) continue;
      if (std::hypot(g[j].x - d[i].x, g[j].y - d[i].y) > radius) continue;
      seen[j] = true;
      if (owner[j] < 0 || augment(static_cast<std::size_t>(owner[j]), seen)) {
        owner[j] = static_cast<int>(i);
        return true;
      }
    }
    return false;
  };
  int matched = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    std::vector<bool> seen(g.size(), false);
    matched += augment(i, seen) ? 1 : 0;
  }
  return matched;
}

}  // namespace

TEST_CASE("hand-worked metric fixtures") {
  CHECK(macro_precision(counts_of({{3, 1, 0}})) == 0.75);
  CHECK(macro_precision(counts_of({{1, 0, 0}, {0, 2, 0}})) == 0.5);
  CHECK(macro_recall(counts_of({{4, 0, 1}})) == 0.8);
  CHECK(macro_recall(counts_of({{0, 0, 5}})) == 0.0);
  CHECK(macro_f1(counts_of({{9, 1, 1}})) == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(macro_f1(counts_of({{5, 0, 5}})) == doctest::Approx(2.0 / 3.0));
  CHECK(macro_f1(counts_of({{0, 0, 3}})) == 0.0);  // P=0/0 -> 0, R=0
  // per-class F1 0.8 and 0.6 -> 0.7
  CHECK(macro_f1(counts_of({{4, 1, 1}, {3, 2, 2}})) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(accuracy(counts_of({{5, 3, 2}}, 90)) == 0.95);
  CHECK(accuracy(counts_of({{0, 0, 0}}, 64)) == 1.0);
  CHECK_THROWS_AS(accuracy(counts_of({{0, 0, 0}}, 0)), UndefinedInputError);
}

TEST_CASE("metrics agree with the scalar oracle on random counts") {
  Rng rng(71);
  for (int i = 0; i < 1000; ++i) {
    const int k = static_cast<int>(rng.uniform_int(1, 5));
    std::vector<ClassCounts> pc(static_cast<std::size_t>(k));
    for (auto& c : pc) c = {rng.uniform_int(0, 50), rng.uniform_int(0, 50), rng.uniform_int(0, 50)};
    const auto c = counts_of(pc, rng.uniform_int(0, 500));
    const auto o = plain(c);
    CHECK(std::abs(macro_precision(c) - oracle::precision(o)) <= 1e-12);
    CHECK(std::abs(macro_recall(c) - oracle::recall(o)) <= 1e-12);
    CHECK(std::abs(macro_f1(c) - oracle::f1(o)) <= 1e-12);
    if (c.tn + pc[0].tp + pc[0].fp + pc[0].fn > 0 || k > 1) {
      std::int64_t tot = c.tn;
      for (auto& x : pc) tot += x.tp + x.fp + x.fn;
      if (tot > 0) CHECK(std::abs(accuracy(c) - oracle::accuracy(o, c.tn)) <= 1e-12);
    }
    for (double v : {macro_precision(c), macro_recall(c), macro_f1(c)}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("metric monotonicity") {
  Rng rng(72);
  for (int i = 0; i < 200; ++i) {
    ClassCounts base{rng.uniform_int(0, 20), rng.uniform_int(0, 20), rng.uniform_int(0, 20)};
    const auto c = counts_of({base}, rng.uniform_int(1, 100));
    auto more_tp = c;
    ++more_tp.per_class[0].tp;
    CHECK(macro_precision(more_tp) >= macro_precision(c));
    CHECK(macro_recall(more_tp) >= macro_recall(c));
    CHECK(macro_f1(more_tp) >= macro_f1(c));
    CHECK(accuracy(more_tp) >= accuracy(c));
    auto more_fp = c;
    ++more_fp.per_class[0].fp;
    CHECK(macro_precision(more_fp) <= macro_precision(c));
  }
}

TEST_CASE("match_detections fixtures") {
  const std::vector<ObjectLabel> gt{{1, 20, 20}};
  const std::vector<Detection> hit{{1, 0.9f, 20, 20, 1}};
  auto c = match_detections(hit, gt, 1, 8);
  CHECK(c.per_class[0] == ClassCounts{1, 0, 0});

  const std::vector<ObjectLabel> three{{1, 4, 4}, {1, 30, 30}, {1, 50, 10}};
  c = match_detections({}, three, 1, 8);
  CHECK(c.per_class[0] == ClassCounts{0, 0, 3});

  const std::vector<Detection> far{{1, 0.9f, 40, 40, 1}};
  c = match_detections(far, gt, 1, 8);
  CHECK(c.per_class[0] == ClassCounts{0, 1, 1});

  const std::vector<Detection> wrong_class{{2, 0.9f, 20, 20, 1}};
  c = match_detections(wrong_class, gt, 2, 8);
  CHECK(c.per_class[0] == ClassCounts{0, 0, 1});
  CHECK(c.per_class[1] == ClassCounts{0, 1, 0});
}

TEST_CASE("greedy matching is near-optimal on random scenes") {
  int close = 0;
  for (int seed = 0; seed < 200; ++seed) {
    Rng rng(1000 + static_cast<std::uint64_t>(seed));
    std::vector<ObjectLabel> gt;
    std::vector<Detection> det;
    for (int i = 0; i < 20; ++i) {
      gt.push_back({static_cast<int>(rng.uniform_int(1, 2)), rng.uniform(0, 96), rng.uniform(0, 96)});
      det.push_back({static_cast<int>(rng.uniform_int(1, 2)), static_cast<float>(rng.uniform()), rng.uniform(0, 96),
                     rng.uniform(0, 96), 1});
    }
    const auto c = match_detections(det, gt, 2, 8);
    const std::int64_t greedy = c.per_class[0].tp + c.per_class[1].tp;
    const int best = optimal_tp(det, gt, 8.0);
    CHECK(greedy <= best);
    for (int k = 0; k < 2; ++k) {
      std::int64_t n_gt = 0;
      for (const auto& o : gt) n_gt += o.class_id == k + 1;
      CHECK(c.per_class[k].tp + c.per_class[k].fn == n_gt);
    }
    if (best - greedy <= 1) ++close;
  }
  CHECK(close >= 190);
}

TEST_CASE("perfect detections from rasterized targets score 1") {
  const std::vector<ObjectLabel> gt{{1, 12, 12}, {1, 44, 20}, {1, 28, 52}};
  const auto t = rasterize_targets(gt, 64, 8);
  std::vector<PositiveCell> cells;
  for (int r = 0; r < t.grid_h; ++r)
    for (int c = 0; c < t.grid_w; ++c)
      if (t.at(r, c)) cells.push_back({r, c, t.at(r, c), 1.0f});
  auto counts = match_detections(merge_and_centroid(cells, 8, 64), gt, 1, 8);
  counts.tn = count_true_negatives(cells, gt, 8, 8);
  CHECK(counts.tn == 61);
  const auto r = make_report(counts, 1);
  CHECK(r.macro_precision == 1.0);
  CHECK(r.macro_recall == 1.0);
  CHECK(r.macro_f1 == 1.0);
  CHECK(r.accuracy == 1.0);
}

namespace {

Dataset tiny_dataset() {
  Dataset ds;
  ds.push_back({"a", Tensor({1, 32, 32, 3}, 0.2f), {{1, 5, 5}, {1, 20, 25}}});
  ds.push_back({"b", Tensor({1, 32, 32, 3}, 0.7f), {{1, 16, 16}}});
  ds.push_back({"c", Tensor({1, 32, 32, 3}, 0.4f), {}});
  return ds;
}

}  // namespace

TEST_CASE("evaluate: empty predictions, ordering and empty set") {
  auto m = build_fomo(ModelConfig{32, 1, 0.35, 8}, 73);
  auto& head = m.layers.back();
  std::fill(head.weights.begin(), head.weights.end(), 0.0f);
  head.bias = {10.0f, -10.0f};
  const Dataset ds = tiny_dataset();
  const auto r = evaluate(m, ds);
  CHECK(r.macro_recall == 0.0);
  CHECK(r.counts.per_class[0].fn == 3);
  CHECK(r.counts.tn == 48 - 3);
  CHECK(r.accuracy == doctest::Approx(45.0 / 48.0));
  CHECK(r.images == 3);

  Dataset reversed(ds.rbegin(), ds.rend());
  CHECK(evaluate(m, reversed).counts == r.counts);
  CHECK_THROWS_AS(evaluate(m, Dataset{}), ConfigError);

  const std::string table = format_report_table(r);
  for (const char* col : {"F1-Score", "Recall", "Precision", "Accuracy"}) CHECK(table.find(col) != std::string::npos);
  const std::string json = report_to_json(r);
  for (const char* key : {"\"F1\"", "\"Recall\"", "\"Precision\"", "\"Accuracy\""}) CHECK(json.find(key) != std::string::npos);
}
