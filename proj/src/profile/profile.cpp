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

#include "lvx/profile.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "lvx/error.hpp"

namespace lvx {

MemoryPlan plan_memory(const FomoModel& model) {
  const auto shapes = model.activation_shapes();
  const std::size_t elem = model.format == ModelFormat::int8 ? 1 : 4;
  const int n_layers = static_cast<int>(model.layers.size());
  const int n_acts = static_cast<int>(shapes.size());

  std::vector<int> buffer_of(static_cast<std::size_t>(n_acts), -1);
  MemoryPlan plan;
  plan.weight_bytes = model.weight_bytes();
  auto new_buffer = [&](int act, int step) {
    BufferPlacement b;
    b.activations = {act};
    b.bytes = shapes[static_cast<std::size_t>(act)].size() * elem;
    b.first_step = b.last_step = step;
    plan.buffers.push_back(b);
    buffer_of[static_cast<std::size_t>(act)] = static_cast<int>(plan.buffers.size()) - 1;
  };
  auto touch = [&](int act, int step) {
    auto& b = plan.buffers[static_cast<std::size_t>(buffer_of[static_cast<std::size_t>(act)])];
    b.last_step = std::max(b.last_step, step);
  };

  new_buffer(0, 0);
  for (int i = 0; i < n_layers; ++i) {
    const Layer& l = model.layers[static_cast<std::size_t>(i)];
    touch(i, i);
    if (l.kind == LayerKind::residual_add) touch(l.skip_source, i);
    if (l.kind == LayerKind::relu6 || l.kind == LayerKind::residual_add) {
      const int b = buffer_of[static_cast<std::size_t>(i)];
      buffer_of[static_cast<std::size_t>(i + 1)] = b;
      plan.buffers[static_cast<std::size_t>(b)].activations.push_back(i + 1);
    } else {
      new_buffer(i + 1, i);
    }
  }

  for (int i = 0; i < n_layers; ++i) {
    LayerMemory lm;
    lm.name = model.layers[static_cast<std::size_t>(i)].name;
    lm.input_bytes = shapes[static_cast<std::size_t>(i)].size() * elem;
    lm.output_bytes = shapes[static_cast<std::size_t>(i + 1)].size() * elem;
    for (const auto& b : plan.buffers)
      if (b.first_step <= i && i <= b.last_step) lm.live_bytes += b.bytes;
    plan.peak_bytes = std::max(plan.peak_bytes, lm.live_bytes);
    plan.layers.push_back(lm);
  }

  // Greedy by size: each buffer takes the lowest offset clear of every
  // already placed buffer whose lifetime overlaps its own.
  std::vector<std::size_t> order(plan.buffers.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return plan.buffers[a].bytes > plan.buffers[b].bytes;
  });
  std::vector<std::size_t> placed;
  for (std::size_t idx : order) {
    auto& b = plan.buffers[idx];
    std::vector<std::pair<std::size_t, std::size_t>> busy;
    for (std::size_t p : placed) {
      const auto& o = plan.buffers[p];
      if (o.first_step <= b.last_step && b.first_step <= o.last_step)
        busy.emplace_back(o.offset, o.offset + o.bytes);
    }
    std::sort(busy.begin(), busy.end());
    std::size_t offset = 0;
    for (const auto& [lo, hi] : busy) {
      if (offset + b.bytes <= lo) break;
      offset = std::max(offset, hi);
    }
    b.offset = offset;
    plan.arena_bytes = std::max(plan.arena_bytes, offset + b.bytes);
    placed.push_back(idx);
  }
  return plan;
}

std::uint64_t count_macs(const FomoModel& model) {
  const auto shapes = model.activation_shapes();
  std::uint64_t macs = 0;
  for (std::size_t i = 0; i < model.layers.size(); ++i) {
    const Layer& l = model.layers[i];
    const Shape& out = shapes[i + 1];
    const std::uint64_t spatial = static_cast<std::uint64_t>(out.h) * out.w;
    if (l.kind == LayerKind::depthwise)
      macs += static_cast<std::uint64_t>(l.kh) * l.kw * l.cin * spatial;
    else if (l.has_weights())
      macs += static_cast<std::uint64_t>(l.kh) * l.kw * l.cin * l.cout * spatial;
  }
  return macs;
}

LatencyReport bench_latency(const FomoModel& model, const Tensor& image, int repeats,
                            double throughput_macs_per_s, int warmup) {
  if (repeats < 10) throw ConfigError("latency benchmark needs at least 10 repeats");
  if (!(throughput_macs_per_s > 0.0)) throw ConfigError("throughput constant must be positive");
  using clock = std::chrono::steady_clock;
  for (int i = 0; i < warmup; ++i) (void)forward(model, image);

  LatencyReport r;
  r.repeats = repeats;
  for (int i = 0; i < repeats; ++i) {
    const auto t0 = clock::now();
    const GridHeatmap hm = forward(model, image);
    const auto t1 = clock::now();
    if (hm.grid_h == 0) throw InternalError("empty heatmap");
    r.samples_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  std::vector<double> sorted = r.samples_ms;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  r.mean_ms = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(n);
  r.median_ms = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n)));
  r.p95_ms = sorted[std::max<std::size_t>(rank, 1) - 1];
  r.mac_count = count_macs(model);
  r.throughput_macs_per_s = throughput_macs_per_s;
  r.mcu_projection_ms = static_cast<double>(r.mac_count) / throughput_macs_per_s * 1000.0;
  return r;
}

std::string format_profile_table(const std::vector<ProfileRow>& rows) {
  std::ostringstream os;
  os << std::fixed;
  os << "Format  Size   PRO(KB)   Latency(ms)  MCU(ms)    Weights(KB)  MACs\n";
  for (const auto& r : rows) {
    os << std::left << std::setw(8) << r.format << std::right << std::setw(2) << r.input_size << "x"
       << std::left << std::setw(3) << r.input_size << std::right << std::setprecision(1)
       << std::setw(8) << r.pro_kb << "  " << std::setprecision(3) << std::setw(11)
       << r.latency_ms << "  " << std::setprecision(1) << std::setw(8) << r.mcu_ms << "  "
       << std::setw(11) << r.weight_kb << "  " << r.macs << '\n';
  }
  return os.str();
}

}  // namespace lvx
