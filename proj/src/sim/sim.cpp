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

#include "lvx/sim.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "lvx/dataio.hpp"
#include "lvx/error.hpp"
#include "lvx/rng.hpp"

namespace lvx {

void CorridorConfig::validate() const {
  if (height < 16 || length < 3 * height) throw ConfigError("corridor length must be at least three times its height");
  if (n_rois < 0) throw ConfigError("n_rois must not be negative");
  if (roi_radius < 2.0 || 2 * roi_radius + 2 >= height)
    throw ConfigError("RoI radius must fit inside the corridor height");
  if (contrast < 0.0 || contrast > 1.0) throw ConfigError("contrast must lie in [0, 1]");
}

Corridor make_corridor(const CorridorConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const ColorPair colors = sample_colors(config.contrast, rng.next_u64());
  Corridor c;
  c.strip = Tensor(Shape{1, config.height, config.length, 3});

  // RoIs go in evenly sized slots past the first window, one per slot.
  const double start = config.height;
  const double slot = config.n_rois > 0 ? (config.length - 2.0 * start) / config.n_rois : 0.0;
  const double r = config.roi_radius;
  for (int k = 0; k < config.n_rois; ++k) {
    Roi roi;
    roi.radius = r;
    const double lo = start + k * slot + r + 1;
    const double hi = start + (k + 1) * slot - r - 1;
    roi.x = hi > lo ? rng.uniform(lo, hi) : (lo + hi) / 2;
    roi.y = rng.uniform(r + 1, config.height - r - 1);
    c.rois.push_back(roi);
  }

  for (int y = 0; y < config.height; ++y)
    for (int x = 0; x < config.length; ++x) {
      const bool inside = std::any_of(c.rois.begin(), c.rois.end(), [&](const Roi& roi) {
        return std::hypot(x + 0.5 - roi.x, y + 0.5 - roi.y) <= roi.radius;
      });
      const double* base = inside ? colors.object : colors.background;
      for (int ch = 0; ch < 3; ++ch) {
        const double v = base[ch] + rng.uniform(-config.noise_amplitude, config.noise_amplitude);
        c.strip.at(0, y, x, ch) =
            static_cast<float>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)) / 255.0f;
      }
    }
  return c;
}

Window camera_window(const Corridor& corridor, const RobotState& state) {
  const double zoom = std::clamp(state.zoom, 1.0, 4.0);
  Window w;
  w.size = corridor.height() / zoom;
  const double cx = std::clamp(state.position + state.pan_x, w.size / 2, corridor.length() - w.size / 2);
  const double cy = std::clamp(state.view_y, w.size / 2, corridor.height() - w.size / 2);
  w.x0 = cx - w.size / 2;
  w.y0 = cy - w.size / 2;
  return w;
}

double roi_coverage(const Roi& roi, const Window& w) {
  constexpr int kSteps = 512;
  const double xa = std::max(w.x0, roi.x - roi.radius);
  const double xb = std::min(w.x0 + w.size, roi.x + roi.radius);
  if (xb <= xa) return 0.0;
  const double dx = (xb - xa) / kSteps;
  double area = 0.0;
  for (int i = 0; i < kSteps; ++i) {
    const double x = xa + (i + 0.5) * dx;
    const double half = std::sqrt(std::max(0.0, roi.radius * roi.radius - (x - roi.x) * (x - roi.x)));
    const double lo = std::max(w.y0, roi.y - half);
    const double hi = std::min(w.y0 + w.size, roi.y + half);
    if (hi > lo) area += (hi - lo) * dx;
  }
  return area / (w.size * w.size);
}

Tensor render_frame(const Corridor& corridor, const RobotState& state, int model_input_size) {
  if (model_input_size < 1) throw ConfigError("model input size must be positive");
  const Window w = camera_window(corridor, state);
  const int s = model_input_size;
  const int H = corridor.height(), L = corridor.length();
  const double step = w.size / s;
  Tensor out(Shape{1, s, s, 3});
  for (int i = 0; i < s; ++i) {
    const double fy = std::clamp(w.y0 + (i + 0.5) * step - 0.5, 0.0, H - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, H - 1);
    const double wy = fy - y0;
    for (int j = 0; j < s; ++j) {
      const double fx = std::clamp(w.x0 + (j + 0.5) * step - 0.5, 0.0, L - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, L - 1);
      const double wx = fx - x0;
      for (int c = 0; c < 3; ++c) {
        const double top = (1 - wx) * corridor.strip.at(0, y0, x0, c) + wx * corridor.strip.at(0, y0, x1, c);
        const double bot = (1 - wx) * corridor.strip.at(0, y1, x0, c) + wx * corridor.strip.at(0, y1, x1, c);
        out.at(0, i, j, c) = static_cast<float>((1 - wy) * top + wy * bot);
      }
    }
  }
  return out;
}

RobotState ef_look_close(std::span<const Detection> detections, const RobotState& state,
                         const FrameGeometry& geometry, const LookCloseParams& params) {
  if (params.dwell_frames < 1) throw ConfigError("dwell_frames must be positive");
  RobotState next = state;
  const Detection* best = nullptr;
  for (const Detection& d : detections)
    if (d.confidence >= params.tau && (!best || d.confidence > best->confidence)) best = &d;

  if (next.mode == RobotMode::cruise) {
    if (next.refractory > 0) {
      --next.refractory;
    } else if (best) {
      next.mode = RobotMode::emphasis;
      next.remaining = params.dwell_frames;
      next.speed = params.slow_factor * next.cruise_speed;
    }
  }

  if (next.mode == RobotMode::emphasis) {
    const double scale = geometry.window.size / geometry.input_size;
    if (best) {
      next.target_x = geometry.window.x0 + best->x * scale;
      next.target_y = geometry.window.y0 + best->y * scale;
    }
    next.zoom = std::min(params.approach_zoom,
                         next.zoom + (params.approach_zoom - 1.0) / params.dwell_frames);
    const double cx = geometry.window.center_x();
    const double cy = geometry.window.center_y();
    next.pan_x = cx + params.recenter_gain * (next.target_x - cx) - next.position;
    next.view_y = cy + params.recenter_gain * (next.target_y - cy);
    if (--next.remaining == 0) {
      next.mode = RobotMode::cruise;
      next.speed = next.cruise_speed;
      next.zoom = 1.0;
      next.pan_x = 0.0;
      next.refractory = params.dwell_frames;
    }
  }
  next.position += next.speed;
  return next;
}

std::vector<Detection> ModelDetector::detect(const Tensor& frame, const FrameGeometry&) const {
  return lvx::detect(model_, frame, tau_);
}

std::vector<Detection> OracleDetector::detect(const Tensor&, const FrameGeometry& g) const {
  std::vector<Detection> out;
  const double scale = g.input_size / g.window.size;
  for (const Roi& r : corridor_.rois) {
    if (r.x < g.window.x0 || r.x >= g.window.x0 + g.window.size || r.y < g.window.y0 ||
        r.y >= g.window.y0 + g.window.size)
      continue;
    out.push_back({r.class_id, 1.0f, (r.x - g.window.x0) * scale, (r.y - g.window.y0) * scale, 1});
  }
  return out;
}

SimReport run_episode(const Corridor& corridor, const FrameDetector& detector, bool ef_enabled,
                      std::uint64_t seed, const SimParams& params) {
  if (detector.num_classes() != corridor.num_classes)
    throw ConfigError("detector has " + std::to_string(detector.num_classes()) +
                      " classes, corridor has " + std::to_string(corridor.num_classes));
  for (const Roi& r : corridor.rois)
    if (r.class_id < 1 || r.class_id > corridor.num_classes)
      throw ConfigError("corridor RoI class out of range");

  Rng rng(seed);
  SimReport rep;
  rep.ef_enabled = ef_enabled;
  rep.seed = seed;
  rep.dwell.assign(corridor.rois.size(), 0);

  RobotState state;
  state.cruise_speed = state.speed = params.cruise_speed;
  state.position = corridor.height() / 2.0;
  state.view_y = corridor.height() / 2.0;
  const double end = corridor.length() - corridor.height() / 2.0;

  while (state.position < end) {
    if (rep.total_frames >= params.max_frames) throw ConfigError("episode exceeded max_frames");
    const FrameGeometry geo{camera_window(corridor, state), params.input_size};
    Tensor frame = render_frame(corridor, state, params.input_size);
    if (params.sensor_noise > 0.0)
      for (float& v : frame.values())
        v = std::clamp(v + static_cast<float>(rng.uniform(-params.sensor_noise, params.sensor_noise)),
                       0.0f, 1.0f);
    const auto dets = detector.detect(frame, geo);

    FrameLog log;
    log.frame = rep.total_frames;
    log.position = state.position;
    log.view_y = state.view_y;
    log.zoom = state.zoom;
    log.emphasis = state.mode == RobotMode::emphasis;
    log.detections = static_cast<int>(dets.size());
    for (std::size_t r = 0; r < corridor.rois.size(); ++r) {
      const Roi& roi = corridor.rois[r];
      log.max_coverage = std::max(log.max_coverage, roi_coverage(roi, geo.window));
      if (roi.x >= geo.window.x0 && roi.x < geo.window.x0 + geo.window.size &&
          roi.y >= geo.window.y0 && roi.y < geo.window.y0 + geo.window.size)
        ++rep.dwell[r];
    }
    if (log.max_coverage >= params.roi_coverage_threshold) ++rep.roi_frames;
    if (log.emphasis) ++rep.emphasis_frames;
    ++rep.total_frames;
    rep.trajectory.push_back(log);

    if (ef_enabled) {
      const RobotState next = ef_look_close(dets, state, geo, params.look_close);
      if (state.mode == RobotMode::cruise && next.mode == RobotMode::emphasis) ++rep.triggers;
      state = next;
    } else {
      state.position += state.speed;
    }
  }
  return rep;
}

SimReport run_episode(const Corridor& corridor, const FomoModel& model, bool ef_enabled,
                      std::uint64_t seed, const SimParams& params) {
  ModelDetector det(model, params.look_close.tau);
  SimParams p = params;
  p.input_size = model.config.input_size;
  return run_episode(corridor, det, ef_enabled, seed, p);
}

std::string sim_report_to_json(const SimReport& r) {
  nlohmann::ordered_json j;
  j["ef_enabled"] = r.ef_enabled;
  j["seed"] = r.seed;
  j["total_frames"] = r.total_frames;
  j["emphasis_frames"] = r.emphasis_frames;
  j["roi_frames"] = r.roi_frames;
  j["triggers"] = r.triggers;
  j["dwell"] = r.dwell;
  return j.dump(2) + "\n";
}

std::string trajectory_to_csv(const SimReport& r) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "frame,position,view_y,zoom,emphasis,detections,max_coverage\n";
  for (const FrameLog& f : r.trajectory)
    os << f.frame << ',' << f.position << ',' << f.view_y << ',' << f.zoom << ','
       << (f.emphasis ? 1 : 0) << ',' << f.detections << ',' << f.max_coverage << '\n';
  return os.str();
}

}  // namespace lvx
