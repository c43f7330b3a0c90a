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

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "lvx/model.hpp"

namespace lvx {

struct LayerMemory {
  std::string name;
  std::size_t input_bytes = 0;
  std::size_t output_bytes = 0;
  std::size_t live_bytes = 0;  // every buffer alive while this layer runs
};

/// One arena buffer. relu6 and residual_add run in place, so several
/// activations can share a buffer.
struct BufferPlacement {
  std::vector<int> activations;
  std::size_t bytes = 0;
  std::size_t offset = 0;
  int first_step = 0;
  int last_step = 0;
};

struct MemoryPlan {
  std::vector<LayerMemory> layers;
  std::vector<BufferPlacement> buffers;
  std::size_t peak_bytes = 0;   // max live bytes over layers; weights excluded
  std::size_t arena_bytes = 0;  // extent of the offset layout
  std::size_t weight_bytes = 0;
};

/// Depends only on layer shapes and the model format, never on weight values.
MemoryPlan plan_memory(const FomoModel& model);

std::uint64_t count_macs(const FomoModel& model);

struct LatencyReport {
  std::vector<double> samples_ms;
  double mean_ms = 0.0;
  double median_ms = 0.0;
  double p95_ms = 0.0;
  int repeats = 0;
  std::uint64_t mac_count = 0;
  double throughput_macs_per_s = 0.0;
  double mcu_projection_ms = 0.0;
};

constexpr double kDefaultMcuThroughput = 5e6;

/// Times `repeats` forward passes after `warmup` untimed ones. repeats >= 10.
LatencyReport bench_latency(const FomoModel& model, const Tensor& image, int repeats,
                            double throughput_macs_per_s = kDefaultMcuThroughput, int warmup = 3);

struct ProfileRow {
  std::string format;
  int input_size = 0;
  double pro_kb = 0.0;
  double latency_ms = 0.0;
  double mcu_ms = 0.0;
  double weight_kb = 0.0;
  std::uint64_t macs = 0;
};

std::string format_profile_table(const std::vector<ProfileRow>& rows);

}  // namespace lvx
