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

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lvx/dataio.hpp"
#include "lvx/error.hpp"

namespace lvx {

using nlohmann::ordered_json;

int DatasetManifest::class_id(const std::string& name) const {
  for (std::size_t i = 0; i < classes.size(); ++i)
    if (classes[i] == name) return static_cast<int>(i) + 1;
  return 0;
}

void DatasetManifest::validate() const {
  if (version != kManifestSchema)
    throw ValidationError("unsupported manifest schema '" + version + "'");
  if (classes.empty()) throw ValidationError("manifest declares no classes");
  std::set<std::string> unique(classes.begin(), classes.end());
  if (unique.size() != classes.size()) throw ValidationError("manifest class names are not unique");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const ManifestEntry& e = entries[i];
    const std::string where = "entry " + std::to_string(i) + " (" + e.image + ")";
    if (e.image.empty()) throw ValidationError(where + ": empty image path");
    if (e.width < 1 || e.height < 1) throw ValidationError(where + ": non-positive image size");
    for (std::size_t j = 0; j < e.objects.size(); ++j) {
      const ManifestObject& o = e.objects[j];
      if (!class_id(o.class_name))
        throw ValidationError(where + ": object " + std::to_string(j) + " has undeclared class '" +
                              o.class_name + "'");
      if (!(o.x >= 0.0 && o.x < e.width && o.y >= 0.0 && o.y < e.height))
        throw ValidationError(where + ": object " + std::to_string(j) + " centroid (" +
                              std::to_string(o.x) + ", " + std::to_string(o.y) +
                              ") outside the image");
    }
  }
}

std::string manifest_to_json(const DatasetManifest& m) {
  ordered_json j;
  j["schema"] = m.version;
  j["classes"] = m.classes;
  auto entries = ordered_json::array();
  for (const ManifestEntry& e : m.entries) {
    auto objects = ordered_json::array();
    for (const ManifestObject& o : e.objects)
      objects.push_back({{"class", o.class_name}, {"x", o.x}, {"y", o.y}});
    entries.push_back(
        {{"image", e.image}, {"width", e.width}, {"height", e.height}, {"objects", objects}});
  }
  j["entries"] = entries;
  return j.dump(1) + "\n";
}

DatasetManifest manifest_from_json(const std::string& text) {
  DatasetManifest m;
  try {
    const auto j = ordered_json::parse(text);
    m.version = j.at("schema").get<std::string>();
    m.classes = j.at("classes").get<std::vector<std::string>>();
    for (const auto& e : j.at("entries")) {
      ManifestEntry entry;
      entry.image = e.at("image").get<std::string>();
      entry.width = e.at("width").get<int>();
      entry.height = e.at("height").get<int>();
      if (e.contains("objects"))
        for (const auto& o : e.at("objects"))
          entry.objects.push_back(
              {o.at("class").get<std::string>(), o.at("x").get<double>(), o.at("y").get<double>()});
      m.entries.push_back(std::move(entry));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed manifest: ") + e.what());
  }
  m.validate();
  return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open manifest " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return manifest_from_json(ss.str());
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  manifest.validate();
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << manifest_to_json(manifest);
  if (!f) throw IoError("failed writing " + path.string());
}

std::filesystem::path manifest_path(const std::filesystem::path& data) {
  if (std::filesystem::is_directory(data)) return data / "manifest.json";
  return data;
}

Dataset load_dataset(const std::filesystem::path& data, int input_size) {
  const auto mpath = manifest_path(data);
  const DatasetManifest m = load_manifest(mpath);
  const auto root = mpath.parent_path();
  Dataset out;
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    const ManifestEntry& e = m.entries[i];
    Tensor img = load_image(root / e.image);
    if (img.shape().w != e.width || img.shape().h != e.height)
      throw ValidationError("entry " + std::to_string(i) + " (" + e.image + "): image is " +
                            std::to_string(img.shape().w) + "x" + std::to_string(img.shape().h) +
                            ", manifest says " + std::to_string(e.width) + "x" +
                            std::to_string(e.height));
    std::vector<ObjectLabel> labels;
    for (const auto& o : e.objects) labels.push_back({m.class_id(o.class_name), o.x, o.y});
    LabeledImage item;
    item.id = e.image;
    item.image = resize(img, input_size);
    item.objects = rescale_labels(labels, e.width, e.height, input_size);
    out.push_back(std::move(item));
  }
  return out;
}

}  // namespace lvx
