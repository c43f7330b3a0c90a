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
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

#include "lvx/dataio.hpp"
#include "lvx/error.hpp"

namespace lvx {
namespace {

std::size_t read_header_int(std::span<const std::uint8_t> b, std::size_t& pos, const char* what) {
  while (pos < b.size() && std::isspace(b[pos])) ++pos;
  if (pos < b.size() && b[pos] == '#') throw FormatError("PPM comments are not supported");
  const std::size_t start = pos;
  std::size_t v = 0;
  while (pos < b.size() && std::isdigit(b[pos])) {
    v = v * 10 + (b[pos] - '0');
    if (v > 1u << 20) throw FormatError(std::string("PPM ") + what + " too large");
    ++pos;
  }
  if (pos == start) throw FormatError(std::string("PPM header is missing the ") + what);
  return v;
}

}  // namespace

Tensor decode_ppm(std::span<const std::uint8_t> b) {
  if (b.size() < 2 || b[0] != 'P' || b[1] != '6') throw FormatError("not a binary PPM (P6)");
  std::size_t pos = 2;
  const auto w = read_header_int(b, pos, "width");
  const auto h = read_header_int(b, pos, "height");
  const auto maxval = read_header_int(b, pos, "maxval");
  if (maxval != 255) throw FormatError("PPM maxval must be 255");
  if (w == 0 || h == 0) throw FormatError("PPM has zero extent");
  if (pos >= b.size() || !std::isspace(b[pos])) throw FormatError("PPM header not terminated");
  ++pos;
  const std::size_t need = w * h * 3;
  if (b.size() - pos < need) throw FormatError("PPM pixel data truncated");
  Tensor t(Shape{1, static_cast<int>(h), static_cast<int>(w), 3});
  for (std::size_t i = 0; i < need; ++i) t.values()[i] = static_cast<float>(b[pos + i]) / 255.0f;
  return t;
}

std::vector<std::uint8_t> encode_ppm(const Tensor& image) {
  const Shape& s = image.shape();
  if (s.n != 1 || s.c != 3) throw ShapeError("PPM needs a (1, h, w, 3) image, got " + s.str());
  const std::string header =
      "P6\n" + std::to_string(s.w) + " " + std::to_string(s.h) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + image.size());
  for (float v : image.values())
    out.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f)));
  return out;
}

Tensor load_image(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open image " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  try {
    return decode_ppm(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_image(const Tensor& image, const std::filesystem::path& path) {
  const auto bytes = encode_ppm(image);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("failed writing " + path.string());
}

Tensor resize(const Tensor& image, int target) {
  const Shape& s = image.shape();
  if (target < 1) throw ConfigError("resize target must be positive");
  if (s.n != 1) throw ShapeError("resize expects a single image, got " + s.str());
  if (s.h == target && s.w == target) return image;
  Tensor out(Shape{1, target, target, s.c});
  const double sy = static_cast<double>(s.h) / target;
  const double sx = static_cast<double>(s.w) / target;
  for (int y = 0; y < target; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(s.h - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, s.h - 1);
    const double wy = fy - y0;
    for (int x = 0; x < target; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(s.w - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, s.w - 1);
      const double wx = fx - x0;
      for (int c = 0; c < s.c; ++c) {
        const double top = (1 - wx) * image.at(0, y0, x0, c) + wx * image.at(0, y0, x1, c);
        const double bot = (1 - wx) * image.at(0, y1, x0, c) + wx * image.at(0, y1, x1, c);
        out.at(0, y, x, c) = static_cast<float>((1 - wy) * top + wy * bot);
      }
    }
  }
  return out;
}

std::vector<ObjectLabel> rescale_labels(std::span<const ObjectLabel> objects, int from_w,
                                        int from_h, int target) {
  std::vector<ObjectLabel> out(objects.begin(), objects.end());
  for (auto& o : out) {
    o.x *= static_cast<double>(target) / from_w;
    o.y *= static_cast<double>(target) / from_h;
  }
  return out;
}

}  // namespace lvx
