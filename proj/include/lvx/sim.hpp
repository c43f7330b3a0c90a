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
#include <span>
#include <string>
#include <vector>

#include "lvx/decode.hpp"
#include "lvx/model.hpp"

namespace lvx {

struct Roi {
  double x = 0.0;  // strip coordinates, pixels
  double y = 0.0;
  double radius = 0.0;
  int class_id = 1;
};

/// Unrolled tunnel wall: a (1, H, L, 3) strip with circular regions of interest.
struct Corridor {
  Tensor strip;
  std::vector<Roi> rois;
  int num_classes = 1;

  int height() const { return strip.shape().h; }
  int length() const { return strip.shape().w; }
};

struct CorridorConfig {
  int height = 128;
  int length = 1536;
  int n_rois = 3;
  double roi_radius = 16.0;
  double contrast = 0.9;
  double noise_amplitude = 0.05;
  std::uint64_t seed = 42;

  void validate() const;
};

Corridor make_corridor(const CorridorConfig& config);

enum class RobotMode { cruise, emphasis };

struct RobotState {
  double position = 0.0;  // robot position along the strip
  double pan_x = 0.0;     // window centre offset from position
  double view_y = 0.0;    // window centre across the strip
  double zoom = 1.0;      // 1 = full-height window, up to 4
  double speed = 4.0;     // px per frame
  double cruise_speed = 4.0;
  RobotMode mode = RobotMode::cruise;
  int remaining = 0;   // emphasis frames left
  int refractory = 0;  // frames before another trigger is allowed
  double target_x = 0.0;
  double target_y = 0.0;
  friend bool operator==(const RobotState&, const RobotState&) = default;
};

/// Square camera window in strip coordinates.
struct Window {
  double x0 = 0.0;
  double y0 = 0.0;
  double size = 0.0;

  double center_x() const { return x0 + size / 2; }
  double center_y() const { return y0 + size / 2; }
};

/// Window of side H / zoom centred on (position + pan_x, view_y), clamped inside the strip.
Window camera_window(const Corridor& corridor, const RobotState& state);

/// Area of the RoI disc inside the window over the window area.
double roi_coverage(const Roi& roi, const Window& window);

Tensor render_frame(const Corridor& corridor, const RobotState& state, int model_input_size);

struct LookCloseParams {
  double approach_zoom = 2.5;
  int dwell_frames = 12;
  double slow_factor = 0.3;
  double tau = 0.5;
  double recenter_gain = 0.5;
};

/// Where the frame the detections came from sits in the strip.
struct FrameGeometry {
  Window window;
  int input_size = 64;
};

/// Advances the robot one frame under the "Look Close" emphasis function:
/// a confident detection slows the robot, ramps the zoom toward approach_zoom
/// over dwell_frames and recentres the window on the detection. After the
/// dwell the robot resumes cruising and ignores detections for dwell_frames.
RobotState ef_look_close(std::span<const Detection> detections, const RobotState& state,
                         const FrameGeometry& geometry, const LookCloseParams& params);

class FrameDetector {
 public:
  virtual ~FrameDetector() = default;
  virtual int num_classes() const = 0;
  virtual std::vector<Detection> detect(const Tensor& frame, const FrameGeometry& geometry) const = 0;
};

class ModelDetector : public FrameDetector {
 public:
  ModelDetector(const FomoModel& model, double tau) : model_(model), tau_(tau) {}
  int num_classes() const override { return model_.config.num_classes; }
  std::vector<Detection> detect(const Tensor& frame, const FrameGeometry& geometry) const override;

 private:
  const FomoModel& model_;
  double tau_;
};

/// Reports every RoI whose centre is inside the window, with confidence 1.
class OracleDetector : public FrameDetector {
 public:
  explicit OracleDetector(const Corridor& corridor) : corridor_(corridor) {}
  int num_classes() const override { return corridor_.num_classes; }
  std::vector<Detection> detect(const Tensor& frame, const FrameGeometry& geometry) const override;

 private:
  const Corridor& corridor_;
};

struct SimParams {
  LookCloseParams look_close;
  double cruise_speed = 4.0;
  int input_size = 64;
  double roi_coverage_threshold = 0.25;
  double sensor_noise = 0.01;
  int max_frames = 100000;
};

struct FrameLog {
  int frame = 0;
  double position = 0.0;
  double view_y = 0.0;
  double zoom = 1.0;
  bool emphasis = false;
  int detections = 0;
  double max_coverage = 0.0;
};

struct SimReport {
  int total_frames = 0;
  int emphasis_frames = 0;
  int roi_frames = 0;
  int triggers = 0;
  std::vector<int> dwell;  // per RoI: frames with its centre inside the window
  std::vector<FrameLog> trajectory;
  bool ef_enabled = false;
  std::uint64_t seed = 0;
};

/// Drives the robot from one end of the strip to the other. Throws
/// ConfigError when the detector's classes do not match the corridor's.
SimReport run_episode(const Corridor& corridor, const FrameDetector& detector, bool ef_enabled,
                      std::uint64_t seed, const SimParams& params = {});

SimReport run_episode(const Corridor& corridor, const FomoModel& model, bool ef_enabled,
                      std::uint64_t seed, const SimParams& params = {});

std::string sim_report_to_json(const SimReport& report);
std::string trajectory_to_csv(const SimReport& report);

}  // namespace lvx
