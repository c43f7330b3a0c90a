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

#include <string>
#include <vector>

#include "lvx/tensor.hpp"

namespace lvx {

/// Ground-truth object centroid in pixel coordinates of its image.
struct ObjectLabel {
  int class_id = 1;  // >= 1; 0 is background
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const ObjectLabel&, const ObjectLabel&) = default;
};

struct LabeledImage {
  std::string id;
  Tensor image;  // (1, s, s, 3), values in [0, 1]
  std::vector<ObjectLabel> objects;
};

using Dataset = std::vector<LabeledImage>;

}  // namespace lvx
