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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lvx/dataio.hpp"
#include "lvx/decode.hpp"
#include "lvx/error.hpp"
#include "lvx/eval.hpp"
#include "lvx/model.hpp"
#include "lvx/profile.hpp"
#include "lvx/quant.hpp"
#include "lvx/rng.hpp"
#include "lvx/sim.hpp"
#include "lvx/simd.hpp"
#include "lvx/train.hpp"

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw lvx::IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw lvx::IoError("failed writing '" + path.string() + "'");
}

struct GenArgs {
  lvx::SynthConfig synth;
  std::string background = "noise";
  std::string out = "data";
};

int run_gen(const GenArgs& a) {
  lvx::SynthConfig c = a.synth;
  if (a.background == "flat") c.background = lvx::BackgroundStyle::flat;
  else if (a.background == "noise") c.background = lvx::BackgroundStyle::noise;
  else throw lvx::ConfigError("--background must be flat or noise");
  const auto manifest = lvx::gen_synthetic(c, a.out);
  std::printf("wrote %zu images to %s\n", manifest.entries.size(), a.out.c_str());
  return 0;
}

struct TrainArgs {
  std::string data;
  std::string out = "model.lvtx";
  std::string log;
  int input_size = 64;
  double width = 0.35;
  lvx::TrainConfig train;
};

int run_train(const TrainArgs& a) {
  const auto manifest = lvx::load_manifest(lvx::manifest_path(a.data));
  const lvx::Dataset ds = lvx::load_dataset(a.data, a.input_size);
  lvx::ModelConfig mc;
  mc.input_size = a.input_size;
  mc.num_classes = static_cast<int>(manifest.classes.size());
  mc.width_multiplier = a.width;
  const lvx::FomoModel init = lvx::build_fomo(mc, a.train.seed);

  std::string log;
  const auto result = lvx::train(init, ds, a.train, [&](const lvx::EpochRecord& r) {
    char line[128];
    std::snprintf(line, sizeof line, "epoch %d loss %.6f val_f1 %.4f\n", r.epoch, r.loss, r.val_f1);
    std::fputs(line, stdout);
    std::fflush(stdout);
    log += line;
  });
  lvx::save_model(result.model, a.out);
  if (!a.log.empty()) write_text(a.log, log);
  std::printf("best epoch %d, model written to %s\n", result.best_epoch, a.out.c_str());
  return 0;
}

struct QuantArgs {
  std::string model;
  std::string data;
  std::string out = "model-int8.lvtx";
  int count = 32;
  std::uint64_t seed = 42;
};

int run_quantize(const QuantArgs& a) {
  const lvx::FomoModel model = lvx::load_model(a.model);
  const lvx::Dataset ds = lvx::load_dataset(a.data, model.config.input_size);
  const auto images = lvx::select_calibration_images(ds, a.count, a.seed);
  const auto stats = lvx::calibrate(model, images);
  lvx::save_model(lvx::quantize_model(model, stats), a.out);
  std::printf("calibrated on %zu images, int8 model written to %s\n", images.size(), a.out.c_str());
  return 0;
}

struct EvalArgs {
  std::string model;
  std::string data;
  std::string json;
  double tau = 0.5;
  double tolerance = 1.0;
};

int run_eval(const EvalArgs& a) {
  const lvx::FomoModel model = lvx::load_model(a.model);
  const lvx::Dataset ds = lvx::load_dataset(a.data, model.config.input_size);
  const auto report = lvx::evaluate(model, ds, a.tau, a.tolerance);
  std::fputs(lvx::format_report_table(report).c_str(), stdout);
  if (!a.json.empty()) write_text(a.json, lvx::report_to_json(report));
  return 0;
}

struct ProfileArgs {
  std::vector<std::string> models;
  int repeats = 50;
  double throughput = lvx::kDefaultMcuThroughput;
  std::uint64_t seed = 42;
};

int run_profile(const ProfileArgs& a) {
  std::vector<lvx::ProfileRow> rows;
  for (const std::string& path : a.models) {
    const lvx::FomoModel model = lvx::load_model(path);
    const int s = model.config.input_size;
    lvx::Rng rng(a.seed);
    lvx::Tensor image(lvx::Shape{1, s, s, 3});
    for (float& v : image.values()) v = static_cast<float>(rng.uniform());
    const auto plan = lvx::plan_memory(model);
    const auto lat = lvx::bench_latency(model, image, a.repeats, a.throughput);
    lvx::ProfileRow row;
    row.format = std::string(lvx::to_string(model.format));
    row.input_size = s;
    row.pro_kb = plan.peak_bytes / 1024.0;
    row.latency_ms = lat.median_ms;
    row.mcu_ms = lat.mcu_projection_ms;
    row.weight_kb = plan.weight_bytes / 1024.0;
    row.macs = lat.mac_count;
    rows.push_back(row);
  }
  std::printf("kernels: %s\n", lvx::simd::backend_name(lvx::simd::active().backend).data());
  std::fputs(lvx::format_profile_table(rows).c_str(), stdout);
  return 0;
}

struct SimArgs {
  std::string model;
  std::string ef = "on";
  std::string out;
  std::string csv;
  lvx::CorridorConfig corridor;
  double tau = 0.5;
};

int run_simulate(const SimArgs& a) {
  if (a.ef != "on" && a.ef != "off") throw lvx::ConfigError("--ef must be on or off");
  const lvx::FomoModel model = lvx::load_model(a.model);
  const lvx::Corridor corridor = lvx::make_corridor(a.corridor);
  lvx::SimParams params;
  params.look_close.tau = a.tau;
  const auto report = lvx::run_episode(corridor, model, a.ef == "on", a.corridor.seed, params);
  const std::string json = lvx::sim_report_to_json(report);
  if (a.out.empty()) std::fputs(json.c_str(), stdout);
  else write_text(a.out, json);
  if (!a.csv.empty()) write_text(a.csv, lvx::trajectory_to_csv(report));
  return 0;
}

struct DetectArgs {
  std::string model;
  std::string image;
  std::string out;
  double tau = 0.5;
};

int run_detect(const DetectArgs& a) {
  const lvx::FomoModel model = lvx::load_model(a.model);
  lvx::Tensor image = lvx::load_image(a.image);
  image = lvx::resize(image, model.config.input_size);
  const auto dets = lvx::detect(model, image, a.tau);
  const std::string id = fs::path(a.image).stem().string();
  if (a.out.empty()) {
    lvx::write_detections(std::cout, id, dets);
  } else {
    std::ostringstream os;
    lvx::write_detections(os, id, dets);
    write_text(a.out, os.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lvx: grid-centroid object detection toolkit"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen-data", "Generate a synthetic labelled corpus");
  g->add_option("--out", gen.out, "Output directory")->capture_default_str();
  g->add_option("--n", gen.synth.n_images, "Number of images")->capture_default_str();
  g->add_option("--size", gen.synth.image_size, "Image side in pixels")->capture_default_str();
  g->add_option("--contrast", gen.synth.contrast, "Object/background colour distance in [0,1]")
      ->capture_default_str();
  g->add_option("--min-objects", gen.synth.min_objects)->capture_default_str();
  g->add_option("--max-objects", gen.synth.max_objects)->capture_default_str();
  g->add_option("--min-radius", gen.synth.min_radius)->capture_default_str();
  g->add_option("--max-radius", gen.synth.max_radius)->capture_default_str();
  g->add_option("--background", gen.background, "flat or noise")->capture_default_str();
  g->add_option("--prefix", gen.synth.id_prefix, "Image file prefix")->capture_default_str();
  g->add_option("--seed", gen.synth.seed)->capture_default_str();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a detector on a manifest directory");
  t->add_option("--data", tr.data, "Dataset directory or manifest")->required();
  t->add_option("--out", tr.out, "Model file")->capture_default_str();
  t->add_option("--log", tr.log, "Also write the epoch log to this file");
  t->add_option("--input-size", tr.input_size, "32, 64 or 96")->capture_default_str();
  t->add_option("--width", tr.width, "Width multiplier")->capture_default_str();
  t->add_option("--epochs", tr.train.epochs)->capture_default_str();
  t->add_option("--batch", tr.train.batch_size)->capture_default_str();
  t->add_option("--lr", tr.train.learning_rate)->capture_default_str();
  t->add_option("--background-weight", tr.train.background_weight)->capture_default_str();
  t->add_option("--val-fraction", tr.train.validation_fraction)->capture_default_str();
  t->add_flag("--flip", tr.train.horizontal_flip, "Random horizontal flips");
  t->add_option("--tau", tr.train.tau)->capture_default_str();
  t->add_option("--tolerance", tr.train.tolerance_cells, "Match radius in cells")->capture_default_str();
  t->add_option("--seed", tr.train.seed)->capture_default_str();

  QuantArgs qa;
  auto* q = app.add_subcommand("quantize", "Convert a float model to int8");
  q->add_option("--model", qa.model)->required();
  q->add_option("--data", qa.data, "Calibration dataset")->required();
  q->add_option("--out", qa.out)->capture_default_str();
  q->add_option("--calib-count", qa.count)->capture_default_str();
  q->add_option("--seed", qa.seed)->capture_default_str();

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Score a model against a labelled dataset");
  e->add_option("--model", ev.model)->required();
  e->add_option("--data", ev.data)->required();
  e->add_option("--json", ev.json, "Also write the report as JSON");
  e->add_option("--tau", ev.tau)->capture_default_str();
  e->add_option("--tolerance", ev.tolerance, "Match radius in cells")->capture_default_str();

  ProfileArgs pr;
  auto* p = app.add_subcommand("profile", "Peak RAM and latency per model");
  p->add_option("--model", pr.models, "Model file, repeatable")->required();
  p->add_option("--repeats", pr.repeats)->capture_default_str();
  p->add_option("--throughput", pr.throughput, "MCU MACs per second")->capture_default_str();
  p->add_option("--seed", pr.seed, "Seed for the benchmark input")->capture_default_str();

  SimArgs sa;
  auto* s = app.add_subcommand("simulate", "Run one corridor episode");
  s->add_option("--model", sa.model)->required();
  s->add_option("--ef", sa.ef, "Emphasis function on or off")->capture_default_str();
  s->add_option("--out", sa.out, "Report file (stdout if omitted)");
  s->add_option("--csv", sa.csv, "Per-frame trajectory CSV");
  s->add_option("--rois", sa.corridor.n_rois)->capture_default_str();
  s->add_option("--length", sa.corridor.length)->capture_default_str();
  s->add_option("--height", sa.corridor.height)->capture_default_str();
  s->add_option("--roi-radius", sa.corridor.roi_radius)->capture_default_str();
  s->add_option("--contrast", sa.corridor.contrast)->capture_default_str();
  s->add_option("--tau", sa.tau)->capture_default_str();
  s->add_option("--seed", sa.corridor.seed)->capture_default_str();

  DetectArgs da;
  auto* d = app.add_subcommand("detect", "Detect objects in one PPM image");
  d->add_option("--model", da.model)->required();
  d->add_option("--image", da.image)->required();
  d->add_option("--out", da.out, "Detections file (stdout if omitted)");
  d->add_option("--tau", da.tau)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    std::cerr << ex.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (g->parsed()) return run_gen(gen);
    if (t->parsed()) return run_train(tr);
    if (q->parsed()) return run_quantize(qa);
    if (e->parsed()) return run_eval(ev);
    if (p->parsed()) return run_profile(pr);
    if (s->parsed()) return run_simulate(sa);
    if (d->parsed()) return run_detect(da);
  } catch (const lvx::IoError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  } catch (const lvx::Error& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 1;
}
