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

#include "lvx/error.hpp"
#include "lvx/profile.hpp"
#include "lvx/quant.hpp"
#include "oracles.hpp"

using namespace lvx;

namespace {

FomoModel single_conv(ModelFormat format) {
  FomoModel m;
  m.config = ModelConfig{32, 1, 0.35, 8};
  m.format = format;
  Layer l;
  l.name = "conv";
  l.kind = LayerKind::conv;
  l.kh = l.kw = 3;
  l.stride = 2;
  l.cin = 3;
  l.cout = 8;
  m.layers.push_back(l);
  return m;
}

FomoModel int8_model(int size) {
  const auto m = build_fomo(ModelConfig{size, 1, 0.35, 8}, 81);
  Rng rng(82);
  const std::vector<Tensor> calib{oracle::random_tensor({1, size, size, 3}, rng, 0, 1)};
  return quantize_model(m, calibrate(m, calib));
}

}  // namespace

TEST_CASE("plan_memory single conv layer") {
  const auto q = plan_memory(single_conv(ModelFormat::int8));
  REQUIRE(q.layers.size() == 1);
  CHECK(q.layers[0].input_bytes == 3072);
  CHECK(q.layers[0].output_bytes == 2048);
  CHECK(q.layers[0].live_bytes == 5120);
  CHECK(q.peak_bytes == 5120);
  const auto f = plan_memory(single_conv(ModelFormat::f32));
  CHECK(f.peak_bytes == 4 * 5120);
}

TEST_CASE("count_macs formula") {
  // 3*3*3*8 per output pixel over a 16x16 output.
  CHECK(count_macs(single_conv(ModelFormat::f32)) == 3ull * 3 * 3 * 8 * 16 * 16);
  const auto m32 = build_fomo(ModelConfig{32, 1, 0.35, 8}, 83);
  const auto m64 = build_fomo(ModelConfig{64, 1, 0.35, 8}, 83);
  const auto m96 = build_fomo(ModelConfig{96, 1, 0.35, 8}, 83);
  CHECK(count_macs(m96) == 9 * count_macs(m32));
  CHECK(count_macs(m64) == 4 * count_macs(m32));

  // Head alone: cin * (k+1) * g * g.
  const auto& head = m32.layers.back();
  CHECK(head.kind == LayerKind::head);
  FomoModel prefix = m32;
  prefix.layers.pop_back();
  const std::uint64_t rest = count_macs(prefix);
  CHECK(count_macs(m32) - rest == static_cast<std::uint64_t>(head.cin) * 2 * 4 * 4);
}

TEST_CASE("plan_memory invariants on the default models") {
  for (int size : {32, 64, 96}) {
    const auto m = build_fomo(ModelConfig{size, 1, 0.35, 8}, 84);
    const auto plan = plan_memory(m);
    std::size_t peak = 0;
    for (const auto& l : plan.layers) peak = std::max(peak, l.live_bytes);
    CHECK(plan.peak_bytes == peak);
    CHECK(plan.arena_bytes >= plan.peak_bytes);
    CHECK(plan.weight_bytes == m.weight_bytes());

    for (std::size_t a = 0; a < plan.buffers.size(); ++a)
      for (std::size_t b = a + 1; b < plan.buffers.size(); ++b) {
        const auto& x = plan.buffers[a];
        const auto& y = plan.buffers[b];
        const bool live_together = x.first_step <= y.last_step && y.first_step <= x.last_step;
        const bool disjoint = x.offset + x.bytes <= y.offset || y.offset + y.bytes <= x.offset;
        CHECK((!live_together || disjoint));
      }

    // The residual add keeps its skip source alive.
    const auto shapes = m.activation_shapes();
    for (std::size_t i = 0; i < m.layers.size(); ++i) {
      if (m.layers[i].kind != LayerKind::residual_add) continue;
      const auto src = static_cast<std::size_t>(m.layers[i].skip_source);
      bool kept = false;
      for (const auto& b : plan.buffers)
        if (std::find(b.activations.begin(), b.activations.end(), static_cast<int>(src)) != b.activations.end())
          kept = b.last_step >= static_cast<int>(i);
      CHECK(kept);
      CHECK(plan.layers[i].live_bytes >= 2 * shapes[src].size() * 4);
    }

    // Weight values never matter.
    auto other = build_fomo(ModelConfig{size, 1, 0.35, 8}, 85);
    CHECK(plan_memory(other).peak_bytes == plan.peak_bytes);
    CHECK(plan_memory(other).arena_bytes == plan.arena_bytes);
  }
}

TEST_CASE("peak ordering across sizes and formats") {
  std::size_t prev = 0;
  for (int size : {32, 64, 96}) {
    const auto q = int8_model(size);
    const auto f = build_fomo(ModelConfig{size, 1, 0.35, 8}, 81);
    const auto pq = plan_memory(q).peak_bytes, pf = plan_memory(f).peak_bytes;
    CHECK(pq > prev);
    CHECK(pq < pf);
    CHECK(pf == 4 * pq);
    prev = pq;
  }
}

TEST_CASE("bench_latency report structure") {
  const auto q = int8_model(32);
  Rng rng(86);
  const auto r = bench_latency(q, oracle::random_tensor({1, 32, 32, 3}, rng, 0, 1), 10);
  CHECK(r.repeats == 10);
  CHECK(r.samples_ms.size() == 10);
  CHECK(r.median_ms <= r.p95_ms);
  CHECK(r.mac_count == count_macs(q));
  CHECK(r.mcu_projection_ms == doctest::Approx(static_cast<double>(r.mac_count) / 5e6 * 1000.0));
  CHECK_THROWS_AS(bench_latency(q, Tensor({1, 32, 32, 3}), 9), ConfigError);
  CHECK_THROWS_AS(bench_latency(q, Tensor({1, 32, 32, 3}), 10, 0.0), ConfigError);

  const std::string table = format_profile_table({{"int8", 32, 12.0, 1.0, 200.0, 9.0, r.mac_count}});
  CHECK(table.find("PRO(KB)") != std::string::npos);
  CHECK(table.find("int8") != std::string::npos);
}
