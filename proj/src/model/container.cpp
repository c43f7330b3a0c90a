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

// LVTX1 layout:
//   "LVTX1" | u32 header_len | header (UTF-8 JSON) | weight blob | u32 crc32
// All integers little-endian. Blob offsets in the header are relative to
// the start of the blob and 4-byte aligned.

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "lvx/error.hpp"
#include "lvx/model.hpp"

namespace lvx {
namespace {

using nlohmann::json;

constexpr char kMagic[5] = {'L', 'V', 'T', 'X', '1'};
constexpr std::size_t kMagicLen = sizeof(kMagic);

static_assert(std::endian::native == std::endian::little,
              "container I/O assumes a little-endian host");

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  return static_cast<std::uint32_t>(
      ::crc32(0L, bytes.data(), static_cast<uInt>(bytes.size())));
}

json params_json(const QuantParams& p) { return {{"scale", p.scale}, {"zero_point", p.zero_point}}; }

QuantParams params_from(const json& j) {
  return QuantParams{j.at("scale").get<float>(), j.at("zero_point").get<std::int32_t>()};
}

class BlobWriter {
 public:
  template <class T>
  json append(const std::vector<T>& v) {
    while (blob_.size() % 4 != 0) blob_.push_back(0);
    const std::size_t offset = blob_.size();
    blob_.resize(offset + v.size() * sizeof(T));
    if (!v.empty()) std::memcpy(blob_.data() + offset, v.data(), v.size() * sizeof(T));
    return {{"offset", offset}, {"count", v.size()}};
  }
  std::vector<std::uint8_t>& bytes() { return blob_; }

 private:
  std::vector<std::uint8_t> blob_;
};

template <class T>
std::vector<T> read_blob(std::span<const std::uint8_t> blob, const json& ref) {
  const auto offset = ref.at("offset").get<std::size_t>();
  const auto count = ref.at("count").get<std::size_t>();
  if (offset > blob.size() || count > (blob.size() - offset) / sizeof(T))
    throw FormatError("weight blob reference out of range");
  std::vector<T> v(count);
  if (count) std::memcpy(v.data(), blob.data() + offset, count * sizeof(T));
  return v;
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const FomoModel& model) {
  BlobWriter blob;
  json layers = json::array();
  for (const Layer& l : model.layers) {
    json j = {{"name", l.name},
              {"kind", to_string(l.kind)},
              {"kh", l.kh},
              {"kw", l.kw},
              {"stride", l.stride},
              {"cin", l.cin},
              {"cout", l.cout},
              {"padding", l.padding == Padding::same ? "same" : "valid"},
              {"skip_source", l.skip_source}};
    if (l.has_weights()) {
      if (model.format == ModelFormat::f32) {
        j["dtype"] = "f32";
        j["weights"] = blob.append(l.weights);
        j["bias"] = blob.append(l.bias);
      } else {
        j["dtype"] = "int8";
        j["weights"] = blob.append(l.qweights);
        j["bias"] = blob.append(l.qbias);
      }
    }
    if (l.quant) {
      j["quant"] = {{"input", params_json(l.quant->input)},
                    {"weight", params_json(l.quant->weight)},
                    {"output", params_json(l.quant->output)},
                    {"skip", params_json(l.quant->skip)}};
    }
    layers.push_back(std::move(j));
  }
  const json header = {{"format", to_string(model.format)},
                       {"config",
                        {{"input_size", model.config.input_size},
                         {"num_classes", model.config.num_classes},
                         {"width_multiplier", model.config.width_multiplier},
                         {"cell_size", model.config.cell_size}}},
                       {"layers", std::move(layers)},
                       {"blob_bytes", blob.bytes().size()}};
  const std::string text = header.dump();

  std::vector<std::uint8_t> out(kMagic, kMagic + kMagicLen);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  out.insert(out.end(), blob.bytes().begin(), blob.bytes().end());
  put_u32(out, crc32_of(out));
  return out;
}

FomoModel deserialize_model(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kMagicLen) throw TruncatedFileError("model file shorter than its magic");
  if (std::memcmp(bytes.data(), kMagic, kMagicLen) != 0)
    throw MagicMismatchError("not an LVTX1 model (bad magic)");
  if (bytes.size() < kMagicLen + 8) throw TruncatedFileError("model file truncated in preamble");
  const std::size_t header_len = get_u32(bytes.data() + kMagicLen);
  const std::size_t header_at = kMagicLen + 4;
  if (header_at + header_len + 4 > bytes.size())
    throw TruncatedFileError("model file truncated in header");

  json header;
  bool header_ok = true;
  try {
    header = json::parse(bytes.begin() + header_at, bytes.begin() + header_at + header_len);
    const auto blob_bytes = header.at("blob_bytes").get<std::size_t>();
    if (header_at + header_len + blob_bytes + 4 > bytes.size())
      throw TruncatedFileError("model file truncated in weight blob");
  } catch (const json::exception&) {
    header_ok = false;
  }

  const std::size_t body = bytes.size() - 4;
  if (crc32_of(bytes.first(body)) != get_u32(bytes.data() + body))
    throw ChecksumMismatchError("model file checksum mismatch");
  if (!header_ok) throw FormatError("model header is not valid JSON");

  try {
    const auto blob_bytes = header.at("blob_bytes").get<std::size_t>();
    if (header_at + header_len + blob_bytes != body)
      throw FormatError("model file has trailing bytes");
    const auto blob = bytes.subspan(header_at + header_len, blob_bytes);

    FomoModel m;
    const std::string fmt = header.at("format").get<std::string>();
    if (fmt != "f32" && fmt != "int8") throw FormatError("unknown model format '" + fmt + "'");
    m.format = fmt == "int8" ? ModelFormat::int8 : ModelFormat::f32;
    const json& c = header.at("config");
    m.config.input_size = c.at("input_size").get<int>();
    m.config.num_classes = c.at("num_classes").get<int>();
    m.config.width_multiplier = c.at("width_multiplier").get<double>();
    m.config.cell_size = c.at("cell_size").get<int>();

    for (const json& j : header.at("layers")) {
      Layer l;
      l.name = j.at("name").get<std::string>();
      l.kind = layer_kind_from_string(j.at("kind").get<std::string>());
      l.kh = j.at("kh").get<int>();
      l.kw = j.at("kw").get<int>();
      l.stride = j.at("stride").get<int>();
      l.cin = j.at("cin").get<int>();
      l.cout = j.at("cout").get<int>();
      l.padding = j.at("padding").get<std::string>() == "valid" ? Padding::valid : Padding::same;
      l.skip_source = j.at("skip_source").get<int>();
      if (j.contains("dtype")) {
        if (j.at("dtype") == "f32") {
          l.weights = read_blob<float>(blob, j.at("weights"));
          l.bias = read_blob<float>(blob, j.at("bias"));
        } else {
          l.qweights = read_blob<std::int8_t>(blob, j.at("weights"));
          l.qbias = read_blob<std::int32_t>(blob, j.at("bias"));
        }
      }
      if (j.contains("quant")) {
        const json& q = j.at("quant");
        l.quant = LayerQuant{params_from(q.at("input")), params_from(q.at("weight")),
                             params_from(q.at("output")), params_from(q.at("skip"))};
      }
      m.layers.push_back(std::move(l));
    }
    m.validate();
    return m;
  } catch (const json::exception& e) {
    throw FormatError(std::string("model header: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("model is inconsistent: ") + e.what());
  }
}

void save_model(const FomoModel& model, const std::filesystem::path& path) {
  const auto bytes = serialize_model(model);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("failed writing " + path.string());
}

FomoModel load_model(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace lvx
