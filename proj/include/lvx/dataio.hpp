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

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "lvx/labels.hpp"
#include "lvx/tensor.hpp"

namespace lvx {

// --- PPM (binary P6, maxval 255, no comments) -------------------------------

/// Pixels scaled to [0, 1]; result shape (1, h, w, 3).
Tensor decode_ppm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_ppm(const Tensor& image);
Tensor load_image(const std::filesystem::path& path);
void write_image(const Tensor& image, const std::filesystem::path& path);

// --- Manifest ----------------------------------------------------------------

inline constexpr const char* kManifestSchema = "lvx-manifest/1";

struct ManifestObject {
  std::string class_name;
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const ManifestObject&, const ManifestObject&) = default;
};

struct ManifestEntry {
  std::string image;  // relative to the manifest's directory
  int width = 0;
  int height = 0;
  std::vector<ManifestObject> objects;
  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct DatasetManifest {
  std::string version = kManifestSchema;
  std::vector<std::string> classes;
  std::vector<ManifestEntry> entries;

  /// 1-based class id, 0 if unknown.
  int class_id(const std::string& name) const;
  /// Throws ValidationError naming the offending entry.
  void validate() const;
  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

std::string manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(const std::string& text);
DatasetManifest load_manifest(const std::filesystem::path& path);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

/// Accepts a manifest file or a directory holding manifest.json.
std::filesystem::path manifest_path(const std::filesystem::path& data);

/// Loads every entry, resizing images (and their centroids) to input_size.
/// Checks each image's size against the manifest.
Dataset load_dataset(const std::filesystem::path& data, int input_size);

// --- Resize --------------------------------------------------------------------

/// Bilinear, half-pixel centres, edge clamped. Output (1, target, target, c).
Tensor resize(const Tensor& image, int target);

/// Scales centroids by the same factors as resize().
std::vector<ObjectLabel> rescale_labels(std::span<const ObjectLabel> objects, int from_w,
                                        int from_h, int target);

// --- Synthetic terrain ---------------------------------------------------------

enum class BackgroundStyle { flat, noise };

struct SynthConfig {
  int image_size = 64;
  int n_images = 120;
  int min_objects = 1;
  int max_objects = 3;
  double min_radius = 4.0;
  double max_radius = 8.0;
  BackgroundStyle background = BackgroundStyle::noise;
  double contrast = 0.9;  // object/background colour distance over sqrt(3)
  double noise_amplitude = 0.05;
  std::uint64_t seed = 42;
  std::string class_name = "roi";
  std::string id_prefix = "img";

  void validate() const;
};

/// Background and object base colours at exactly the requested contrast.
struct ColorPair {
  double background[3];
  double object[3];
};
ColorPair sample_colors(double contrast, std::uint64_t seed_bits);

/// Renders the corpus in memory; the manifest names the files gen_synthetic would write.
std::pair<Dataset, DatasetManifest> synthesize(const SynthConfig& config);

/// Writes <prefix>_NNNN.ppm files and manifest.json into out_dir.
DatasetManifest gen_synthetic(const SynthConfig& config, const std::filesystem::path& out_dir);

}  // namespace lvx
