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

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "lvx/dataio.hpp"
#include "lvx/error.hpp"
#include "lvx/rng.hpp"

namespace lvx {

void SynthConfig::validate() const {
  if (image_size < 8) throw ConfigError("image_size must be at least 8");
  if (n_images < 1) throw ConfigError("n_images must be positive");
  if (min_objects < 0 || max_objects < min_objects)
    throw ConfigError("objects-per-image range is invalid");
  if (min_radius < 2.0 || max_radius < min_radius) throw ConfigError("radius range must start at >= 2 px");
  if (contrast < 0.0 || contrast > 1.0) throw ConfigError("contrast must lie in [0, 1]");
  if (noise_amplitude < 0.0 || noise_amplitude > 0.5) throw ConfigError("noise amplitude out of range");
  if (class_name.empty()) throw ConfigError("class name must not be empty");
}

ColorPair sample_colors(double contrast, std::uint64_t seed_bits) {
  // Colours sit on opposite ends of a cube diagonal through a random
  // midpoint, so every channel differs by exactly `contrast`.
  Rng rng(seed_bits);
  ColorPair p{};
  for (int ch = 0; ch < 3; ++ch) {
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    const double mid = rng.uniform(contrast / 2, 1.0 - contrast / 2);
    p.background[ch] = mid - sign * contrast / 2;
    p.object[ch] = mid + sign * contrast / 2;
  }
  return p;
}

namespace {

struct Ellipse {
  double cx, cy, rx, ry, theta;

  bool contains(double px, double py) const {
    const double dx = px - cx, dy = py - cy;
    const double c = std::cos(theta), s = std::sin(theta);
    const double u = (c * dx + s * dy) / rx;
    const double v = (-s * dx + c * dy) / ry;
    return u * u + v * v <= 1.0;
  }
  double extent() const { return std::max(rx, ry); }
};

constexpr int kPlacementRetries = 200;

}  // namespace

std::pair<Dataset, DatasetManifest> synthesize(const SynthConfig& config) {
  config.validate();
  const int s = config.image_size;
  Rng rng(config.seed);
  Dataset data;
  DatasetManifest manifest;
  manifest.classes = {config.class_name};

  for (int n = 0; n < config.n_images; ++n) {
    const ColorPair colors = sample_colors(config.contrast, rng.next_u64());
    const int count = rng.uniform_int(config.min_objects, config.max_objects);
    std::vector<Ellipse> objects;
    for (int k = 0; k < count; ++k) {
      bool placed = false;
      for (int attempt = 0; attempt < kPlacementRetries && !placed; ++attempt) {
        Ellipse e;
        e.rx = rng.uniform(config.min_radius, config.max_radius);
        e.ry = rng.uniform(config.min_radius, config.max_radius);
        e.theta = rng.uniform(0.0, M_PI);
        const double margin = e.extent() + 1.0;
        if (2 * margin >= s) continue;
        e.cx = rng.uniform(margin, s - margin);
        e.cy = rng.uniform(margin, s - margin);
        placed = std::all_of(objects.begin(), objects.end(), [&](const Ellipse& o) {
          return std::hypot(o.cx - e.cx, o.cy - e.cy) >= o.extent() + e.extent() + 2.0;
        });
        if (placed) objects.push_back(e);
      }
      if (!placed)
        throw ConfigError("could not place object " + std::to_string(k) + " of image " +
                          std::to_string(n) + " after " + std::to_string(kPlacementRetries) +
                          " attempts");
    }

    Tensor img(Shape{1, s, s, 3});
    const bool noisy = config.background == BackgroundStyle::noise;
    for (int y = 0; y < s; ++y)
      for (int x = 0; x < s; ++x) {
        const bool inside = std::any_of(objects.begin(), objects.end(), [&](const Ellipse& e) {
          return e.contains(x + 0.5, y + 0.5);
        });
        const double* base = inside ? colors.object : colors.background;
        for (int ch = 0; ch < 3; ++ch) {
          double v = base[ch];
          if (noisy) v += rng.uniform(-config.noise_amplitude, config.noise_amplitude);
          // Quantize to what the PPM file will hold.
          img.at(0, y, x, ch) = static_cast<float>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)) / 255.0f;
        }
      }

    char name[64];
    std::snprintf(name, sizeof(name), "%s_%04d.ppm", config.id_prefix.c_str(), n);
    ManifestEntry entry{name, s, s, {}};
    LabeledImage item;
    item.id = name;
    item.image = std::move(img);
    for (const Ellipse& e : objects) {
      entry.objects.push_back({config.class_name, e.cx, e.cy});
      item.objects.push_back({1, e.cx, e.cy});
    }
    manifest.entries.push_back(std::move(entry));
    data.push_back(std::move(item));
  }
  manifest.validate();
  return {std::move(data), std::move(manifest)};
}

DatasetManifest gen_synthetic(const SynthConfig& config, const std::filesystem::path& out_dir) {
  auto [data, manifest] = synthesize(config);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  for (const LabeledImage& item : data) write_image(item.image, out_dir / item.id);
  write_manifest(manifest, out_dir / "manifest.json");
  return manifest;
}

}  // namespace lvx
