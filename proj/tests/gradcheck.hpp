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

// Central finite-difference check of TrainableFomo<double> gradients.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "lvx/model.hpp"
#include "lvx/rng.hpp"
#include "lvx/train.hpp"

namespace gradcheck {

struct Sample {
  std::string param;
  std::size_t index;
  double analytic;
  double numeric;
  double rel_error;
};

inline double relative_error(double a, double n) {
  const double scale = std::max(std::abs(a), std::abs(n));
  if (scale < 1e-8) return 0.0;  // both vanish
  return std::abs(a - n) / scale;
}

/// The default 32-pixel topology with every hidden width cut to 2 or 4
/// channels, so few activations sit near a relu6 corner.
inline lvx::FomoModel tiny_model(int num_classes, std::uint64_t seed) {
  lvx::ModelConfig mc;
  mc.input_size = 32;
  mc.num_classes = num_classes;
  lvx::FomoModel m = lvx::build_fomo(mc, seed);
  const auto narrow = [](int c) { return c == 3 ? 3 : (c == 96 || c == 48 ? 4 : 2); };
  lvx::Rng rng(seed);
  for (auto& l : m.layers) {
    l.cin = narrow(l.cin);
    if (l.kind != lvx::LayerKind::head) l.cout = narrow(l.cout);
    if (!l.has_weights()) continue;
    const lvx::Shape ws = l.weight_shape();
    const double std = std::sqrt(2.0 / (ws.h * ws.w * (l.kind == lvx::LayerKind::depthwise ? 1 : ws.c)));
    l.weights.resize(ws.size());
    for (float& w : l.weights) w = static_cast<float>(rng.normal() * std);
    l.bias.assign(static_cast<std::size_t>(l.cout), 0.0f);
  }
  m.validate();
  return m;
}

/// Checks `per_kind` randomly chosen parameters for every layer kind that owns
/// weights. Returns every sample; the caller applies the tolerance.
inline std::map<lvx::LayerKind, std::vector<Sample>> run(const lvx::FomoModel& model, int per_kind,
                                                         std::uint64_t seed, double h, int batch = 2) {
  lvx::Rng rng(seed + 1);
  const int g = model.config.grid_size();
  const int s = model.config.input_size;
  const int k = model.config.num_classes;

  std::vector<lvx::Tensor> images;
  std::vector<lvx::TargetGrid> targets;
  for (int b = 0; b < batch; ++b) {
    lvx::Tensor img({1, s, s, 3});
    for (float& v : img.values()) v = static_cast<float>(rng.uniform());
    images.push_back(img);
    lvx::TargetGrid t{g, g, std::vector<int>(static_cast<std::size_t>(g * g), 0)};
    for (int& c : t.cells) c = rng.uniform() < 0.3 ? static_cast<int>(rng.uniform_int(1, k)) : 0;
    targets.push_back(t);
  }

  lvx::TrainableFomo<double> net(model);
  auto params = net.parameters();
  std::vector<std::vector<double>> grads;
  net.loss_and_gradients(images, targets, 0.1, grads);

  std::map<std::string, lvx::LayerKind> kind_of;
  for (const auto& l : model.layers) kind_of[l.name] = l.kind;

  std::map<lvx::LayerKind, std::vector<std::size_t>> by_kind;
  for (std::size_t p = 0; p < params.size(); ++p) {
    const std::string layer = params[p].name.substr(0, params[p].name.rfind('.'));
    by_kind[kind_of.at(layer)].push_back(p);
  }

  std::map<lvx::LayerKind, std::vector<Sample>> out;
  for (const auto& [kind, plist] : by_kind) {
    for (int s = 0; s < per_kind; ++s) {
      const std::size_t p = plist[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(plist.size()) - 1))];
      auto& values = params[p].values;
      const auto i = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(values.size()) - 1));
      const double saved = values[i];
      values[i] = saved + h;
      const double up = net.loss(images, targets, 0.1);
      values[i] = saved - h;
      const double down = net.loss(images, targets, 0.1);
      values[i] = saved;
      const double numeric = (up - down) / (2 * h);
      out[kind].push_back({params[p].name, i, grads[p][i], numeric, relative_error(grads[p][i], numeric)});
    }
  }
  return out;
}

}  // namespace gradcheck
