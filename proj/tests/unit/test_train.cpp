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

#include "gradcheck.hpp"
#include "lvx/dataio.hpp"
#include "lvx/error.hpp"
#include "lvx/train.hpp"
#include "oracles.hpp"

using namespace lvx;

TEST_CASE("TrainConfig validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  c.learning_rate = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.epochs = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.background_weight = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("rasterize_targets") {
  const std::vector<ObjectLabel> one{{1, 12, 20}};
  auto g = rasterize_targets(one, 32, 8);
  CHECK(g.grid_h == 4);
  CHECK(g.at(2, 1) == 1);
  int labeled = 0;
  for (int c : g.cells) labeled += c != 0;
  CHECK(labeled == 1);

  const std::vector<ObjectLabel> same_cell{{1, 9, 9}, {2, 14, 10}};
  g = rasterize_targets(same_cell, 32, 8);
  labeled = 0;
  for (int c : g.cells) labeled += c != 0;
  CHECK(labeled == 1);
  CHECK(g.at(1, 1) == 1);  // earlier object keeps the cell

  g = rasterize_targets({}, 32, 8);
  for (int c : g.cells) CHECK(c == 0);

  const std::vector<ObjectLabel> outside{{1, 5, 5}, {1, 40, 3}};
  try {
    rasterize_targets(outside, 32, 8);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("1") != std::string::npos);
  }
}

TEST_CASE("per_cell_loss") {
  TargetGrid t{2, 2, {0, 1, 0, 0}};
  Tensor confident({1, 2, 2, 2});
  for (int i = 0; i < 4; ++i) {
    confident.values()[2 * i + static_cast<std::size_t>(t.cells[i])] = 20.0f;
  }
  CHECK(per_cell_loss(confident, t, 0.1) < 1e-3);

  TargetGrid bg{2, 2, {0, 0, 0, 0}};
  CHECK(per_cell_loss(Tensor({1, 2, 2, 2}), bg, 1.0) == doctest::Approx(std::log(2.0)).epsilon(1e-7));

  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const int k = static_cast<int>(rng.uniform_int(2, 4));
    Tensor z = oracle::random_tensor({1, 3, 3, k}, rng, -4, 4);
    TargetGrid g{3, 3, std::vector<int>(9)};
    for (int& c : g.cells) c = static_cast<int>(rng.uniform_int(0, k - 1));
    const double w = rng.uniform(0.05, 1.0);
    double total = 0;
    for (int cell = 0; cell < 9; ++cell) {
      double denom = 0;
      for (int c = 0; c < k; ++c) denom += std::exp(static_cast<double>(z.values()[cell * k + c]));
      const double p = std::exp(static_cast<double>(z.values()[cell * k + g.cells[cell]])) / denom;
      total += (g.cells[cell] == 0 ? w : 1.0) * -std::log(p);
    }
    CHECK(per_cell_loss(z, g, w) == doctest::Approx(total / 9).epsilon(1e-6));
    CHECK(per_cell_loss(z, g, w) >= 0.0);
  }
}

TEST_CASE("gradients match central finite differences for every layer kind") {
  // relu6 corners make the loss piecewise smooth; a step of 1e-5 in double
  // stays inside one piece for nearly every parameter.
  ModelConfig mc;
  mc.input_size = 32;
  mc.num_classes = 2;
  const auto samples = gradcheck::run(build_fomo(mc, 77), 20, 77, 1e-5);
  CHECK(samples.size() == 4);
  for (const auto& [kind, list] : samples) {
    CHECK(list.size() == 20);
    for (const auto& s : list) {
      INFO(s.param << "[" << s.index << "] analytic " << s.analytic << " numeric " << s.numeric);
      CHECK(s.rel_error < 1e-3);
    }
  }
}

TEST_CASE("tiny model: head gradients at h = 1e-3") {
  // The loss is smooth in the head parameters, so a coarse step is exact
  // to second order.
  const auto samples = gradcheck::run(gradcheck::tiny_model(2, 5), 20, 5, 1e-3);
  REQUIRE(samples.count(LayerKind::head) == 1);
  for (const auto& s : samples.at(LayerKind::head)) {
    INFO(s.param << "[" << s.index << "] analytic " << s.analytic << " numeric " << s.numeric);
    CHECK(s.rel_error < 1e-3);
  }
  for (const auto& [kind, list] : gradcheck::run(gradcheck::tiny_model(2, 5), 20, 5, 1e-5))
    for (const auto& s : list) CHECK(s.rel_error < 1e-3);
}

namespace {

struct Batch {
  std::vector<Tensor> images;
  std::vector<TargetGrid> targets;
};

Batch random_batch(int n, std::uint64_t seed) {
  Rng rng(seed);
  Batch b;
  for (int i = 0; i < n; ++i) {
    b.images.push_back(oracle::random_tensor({1, 32, 32, 3}, rng, 0, 1));
    TargetGrid t{4, 4, std::vector<int>(16, 0)};
    for (int& c : t.cells) c = rng.uniform() < 0.25 ? 1 : 0;
    b.targets.push_back(t);
  }
  return b;
}

}  // namespace

TEST_CASE("zero head: bias gradient equals the weighted softmax minus one-hot mean") {
  ModelConfig mc;
  mc.input_size = 32;
  auto m = build_fomo(mc, 41);
  std::fill(m.layers.back().weights.begin(), m.layers.back().weights.end(), 0.0f);
  std::fill(m.layers.back().bias.begin(), m.layers.back().bias.end(), 0.0f);
  const Batch b = random_batch(3, 42);
  TrainConfig cfg;
  const auto g = gradients(m, b.images, b.targets, cfg);
  const auto& bias_grad = g.back();
  double expect[2] = {0, 0};
  int cells = 0;
  for (const auto& t : b.targets)
    for (int c : t.cells) {
      const double w = c == 0 ? cfg.background_weight : 1.0;
      for (int k = 0; k < 2; ++k) expect[k] += w * (0.5 - (k == c ? 1.0 : 0.0));
      ++cells;
    }
  for (int k = 0; k < 2; ++k) CHECK(bias_grad[k] == doctest::Approx(expect[k] / cells).epsilon(1e-6));
}

TEST_CASE("duplicating the batch leaves the mean gradient unchanged") {
  ModelConfig mc;
  mc.input_size = 32;
  const auto m = build_fomo(mc, 43);
  Batch b = random_batch(2, 44);
  const auto g1 = gradients(m, b.images, b.targets, TrainConfig{});
  Batch d = b;
  d.images.insert(d.images.end(), b.images.begin(), b.images.end());
  d.targets.insert(d.targets.end(), b.targets.begin(), b.targets.end());
  const auto g2 = gradients(m, d.images, d.targets, TrainConfig{});
  REQUIRE(g1.size() == g2.size());
  for (std::size_t p = 0; p < g1.size(); ++p)
    for (std::size_t i = 0; i < g1[p].size(); ++i) CHECK(std::abs(g1[p][i] - g2[p][i]) <= 1e-6);
}

TEST_CASE("train: empty dataset, smoke run and determinism") {
  ModelConfig mc;
  mc.input_size = 32;
  const auto m = build_fomo(mc, 45);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 4;
  CHECK_THROWS_AS(train(m, Dataset{}, cfg), ConfigError);

  SynthConfig sc;
  sc.image_size = 32;
  sc.n_images = 10;
  sc.max_objects = 1;
  const Dataset ds = synthesize(sc).first;
  const auto r1 = train(m, ds, cfg);
  REQUIRE(r1.history.size() == 2);
  CHECK(r1.history[1].loss < r1.history[0].loss);
  const auto r2 = train(m, ds, cfg);
  CHECK(r1.history == r2.history);
  CHECK(serialize_model(r1.model) == serialize_model(r2.model));
  CHECK(r1.model.format == ModelFormat::f32);
  CHECK_NOTHROW(r1.model.validate());
}
