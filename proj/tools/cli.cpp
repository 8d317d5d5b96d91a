// Copyright 2026 The VortexSeg Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vortexseg/explain.hpp"
#include "vortexseg/pipeline.hpp"
#include "vortexseg/render.hpp"
#include "vortexseg/synthgen.hpp"
#include "vortexseg/train.hpp"

namespace vortexseg::cli {
namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Vec2 parse_point(const std::string& text, const char* flag) {
  Vec2 p;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%lf,%lf%c", &p.y, &p.z, &tail) != 2) {
    throw UsageError(std::string(flag) + " expects Y,Z in meters, got '" + text + "'");
  }
  return p;
}

void write_text(const fs::path& path, const std::string& text) {
  write_file_bytes(path, std::span(reinterpret_cast<const uint8_t*>(text.data()), text.size()));
}

// Model flags that are not stored in a checkpoint.
struct ModelFlags {
  bool static_graph = false;
  bool polar = false;
  bool raw_velocity = false;

  void add(CLI::App* cmd) {
    cmd->add_flag("--static-graph", static_graph, "Build EdgeConv graphs from (y, z) instead of features");
    cmd->add_flag("--polar", polar, "Feed (phi, R, vr) instead of (y, z, vr)");
    cmd->add_flag("--raw-velocity", raw_velocity, "Feed radial velocity in m/s instead of per-scan normalized");
  }
  ModelConfig apply(ModelConfig c) const {
    c.dynamic_graph = !static_graph;
    c.input_mode = polar ? InputMode::kPolar : InputMode::kCartesian;
    return c;
  }
  PipelineConfig apply(PipelineConfig c) const {
    c.normalize_velocity = !raw_velocity;
    return c;
  }
};

// Pipeline flags shared by eval, explain and render.
struct PipelineFlags {
  size_t points = kDefaultPointCount;
  double label_radius = kDefaultLabelRadius;
  std::string cluster = "agglo";
  double linkage = ClusterParams{}.linkage_threshold;
  double eps = ClusterParams{}.dbscan_eps;
  size_t min_pts = ClusterParams{}.dbscan_min_pts;
  double optics_eps_max = ClusterParams{}.optics_eps_max;
  double optics_eps = ClusterParams{}.optics_eps;
  size_t optics_min_pts = ClusterParams{}.optics_min_pts;
  size_t min_cluster_size = ClusterParams{}.min_cluster_size;
  bool fixed_min_cluster = false;
  double d_match = kDefaultMatchDistance;

  void add(CLI::App* cmd) {
    cmd->add_option("--points", points, "Points sampled per scan")->capture_default_str();
    cmd->add_option("--label-radius", label_radius, "Label disk radius (m)")->capture_default_str();
    cmd->add_option("--cluster", cluster, "Refinement: agglo, dbscan or optics")
        ->check(CLI::IsMember({"agglo", "dbscan", "optics"}))
        ->capture_default_str();
    cmd->add_option("--linkage", linkage, "Ward linkage threshold (m)")->capture_default_str();
    cmd->add_option("--eps", eps, "DBSCAN eps (m)")->capture_default_str();
    cmd->add_option("--min-pts", min_pts, "DBSCAN min_pts")->capture_default_str();
    cmd->add_option("--optics-eps-max", optics_eps_max, "OPTICS eps_max (m)")->capture_default_str();
    cmd->add_option("--optics-eps", optics_eps, "OPTICS extraction eps (m)")->capture_default_str();
    cmd->add_option("--optics-min-pts", optics_min_pts, "OPTICS min_pts")->capture_default_str();
    cmd->add_option("--min-cluster-size", min_cluster_size, "Smallest kept cluster, per 12000 points")
        ->capture_default_str();
    cmd->add_flag("--fixed-min-cluster-size", fixed_min_cluster,
                  "Use --min-cluster-size as is instead of scaling it with --points");
    cmd->add_option("--d-match", d_match, "Match distance (m)")->capture_default_str();
  }
  PipelineConfig build(InputMode mode) const {
    PipelineConfig c;
    c.n_points = points;
    c.label_radius = label_radius;
    c.input_mode = mode;
    c.cluster.algorithm = algorithm_from_name(cluster);
    c.cluster.linkage_threshold = linkage;
    c.cluster.dbscan_eps = eps;
    c.cluster.dbscan_min_pts = min_pts;
    c.cluster.optics_eps_max = optics_eps_max;
    c.cluster.optics_eps = optics_eps;
    c.cluster.optics_min_pts = optics_min_pts;
    c.cluster.min_cluster_size = min_cluster_size;
    c.scale_min_cluster_size = !fixed_min_cluster;
    c.d_match = d_match;
    c.cluster.validate();
    return c;
  }
};

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  std::string out;
  size_t count = 2000;
  uint64_t seed = 0;
  SceneConfig scene;
  ScanGeometry geom;
};

void add_generate(CLI::App& app, GenerateArgs& a) {
  auto* cmd = app.add_subcommand("generate", "Write a synthetic scan dataset");
  cmd->add_option("--out", a.out, "Output directory")->required();
  cmd->add_option("--count", a.count, "Number of scans")->capture_default_str();
  cmd->add_option("--seed", a.seed, "Dataset seed")->capture_default_str();
  cmd->add_option("--noise-sigma", a.scene.noise_sigma, "Velocity noise (m/s)")->capture_default_str();
  cmd->add_option("--min-vortices", a.scene.min_vortices)->capture_default_str();
  cmd->add_option("--max-vortices", a.scene.max_vortices)->capture_default_str();
  cmd->add_option("--crosswind-max", a.scene.crosswind_max, "Largest |crosswind| (m/s)")->capture_default_str();
  cmd->add_option("--beams", a.geom.n_beams)->capture_default_str();
  cmd->add_option("--gates", a.geom.n_gates)->capture_default_str();
  cmd->add_option("--elevation-min", a.geom.elevation_min, "Degrees")->capture_default_str();
  cmd->add_option("--elevation-max", a.geom.elevation_max, "Degrees")->capture_default_str();
  cmd->add_option("--range-min", a.geom.range_min, "Meters")->capture_default_str();
  cmd->add_option("--range-max", a.geom.range_max, "Meters")->capture_default_str();
}

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  a.geom.validate();
  a.scene.validate();
  std::vector<LidarScan> scans = generate_scans(a.count, a.seed, a.scene, a.geom);
  write_dataset(a.out, scans);
  out << "wrote " << scans.size() << " scans to " << a.out << "\n";
  return 0;
}

// ------------------------------------------------------------------- train

struct TrainArgs {
  std::string data;
  std::string model = "dgcnn";
  std::optional<size_t> epochs;
  std::optional<size_t> batch;
  double lr = kDefaultLearningRate;
  size_t k = kDefaultK;
  size_t points = kDefaultPointCount;
  double label_radius = kDefaultLabelRadius;
  std::string out;
  std::string log;
  uint64_t seed = 0;
  size_t threads = 0;
  ModelFlags flags;
};

void add_train(CLI::App& app, TrainArgs& a) {
  auto* cmd = app.add_subcommand("train", "Train a segmentation model");
  cmd->add_option("--data", a.data, "Dataset directory")->required();
  cmd->add_option("--model", a.model, "dgcnn or pointnet")
      ->check(CLI::IsMember({"dgcnn", "pointnet"}))
      ->capture_default_str();
  cmd->add_option("--epochs", a.epochs, "Default: 50 (dgcnn), 100 (pointnet)");
  cmd->add_option("--batch", a.batch, "Default: 4 (dgcnn), 16 (pointnet)");
  cmd->add_option("--lr", a.lr)->capture_default_str();
  cmd->add_option("--k", a.k, "Neighbors per EdgeConv graph")->capture_default_str();
  cmd->add_option("--points", a.points, "Points sampled per scan")->capture_default_str();
  cmd->add_option("--label-radius", a.label_radius, "Label disk radius (m)")->capture_default_str();
  cmd->add_option("--out", a.out, "Checkpoint path")->required();
  cmd->add_option("--log", a.log, "Loss log path (default: <out>.log)");
  cmd->add_option("--seed", a.seed, "Initialization and shuffle seed")->capture_default_str();
  cmd->add_option("--threads", a.threads, "Worker threads (0 = VORTEXSEG_THREADS or all cores)");
  a.flags.add(cmd);
}

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  const bool dgcnn = a.model == "dgcnn";
  ModelConfig config = a.flags.apply(dgcnn ? ModelConfig::dgcnn() : ModelConfig::pointnet());
  config.k = a.k;
  TrainOptions options;
  options.epochs = a.epochs.value_or(dgcnn ? kDgcnnEpochs : kPointNetEpochs);
  options.batch_size = a.batch.value_or(dgcnn ? kDgcnnBatch : kPointNetBatch);
  options.lr = a.lr;
  options.seed = a.seed;
  options.threads = a.threads;

  PipelineConfig pipeline;
  pipeline.n_points = a.points;
  pipeline.label_radius = a.label_radius;
  pipeline.input_mode = config.input_mode;
  pipeline = a.flags.apply(pipeline);
  std::vector<TrainingSample> samples = training_set(load_dataset(a.data), pipeline);

  char header[256];
  std::snprintf(header, sizeof(header), "# model=%s epochs=%zu batch=%zu lr=%g k=%zu points=%zu seed=%llu\n",
                a.model.c_str(), options.epochs, options.batch_size, options.lr, config.k, a.points,
                static_cast<unsigned long long>(a.seed));
  std::string log = header;
  options.on_epoch = [&](size_t epoch, double loss) {
    char line[64];
    std::snprintf(line, sizeof(line), "%zu\t%.9g\n", epoch, loss);
    log += line;
    err << "epoch " << epoch << "/" << options.epochs << " loss " << loss << "\n";
  };
  TrainResult result = train(samples, config, options);
  write_checkpoint(result.checkpoint, a.out);
  write_text(a.log.empty() ? a.out + ".log" : a.log, log);
  out << "wrote " << a.out << " (" << a.model << ", " << options.epochs << " epochs, batch " << options.batch_size
      << ")\n";
  return 0;
}

// -------------------------------------------------------------------- eval

struct EvalArgs {
  std::string data;
  std::string ckpt;
  bool oracle = false;
  std::string records;
  size_t threads = 0;
  PipelineFlags pipeline;
  ModelFlags flags;
};

void add_eval(CLI::App& app, EvalArgs& a) {
  auto* cmd = app.add_subcommand("eval", "Evaluate detections against ground truth");
  cmd->add_option("--data", a.data, "Dataset directory")->required();
  auto* ckpt = cmd->add_option("--ckpt", a.ckpt, "Checkpoint");
  auto* oracle = cmd->add_flag("--oracle", a.oracle, "Use truth-derived labels instead of a model");
  ckpt->excludes(oracle);
  cmd->add_option("--records", a.records, "Write per-truth records to this file");
  cmd->add_option("--threads", a.threads, "Worker threads (0 = VORTEXSEG_THREADS or all cores)");
  a.pipeline.add(cmd);
  a.flags.add(cmd);
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  if (a.ckpt.empty() && !a.oracle) throw UsageError("eval needs --ckpt or --oracle");
  std::vector<DatasetEntry> data = load_dataset(a.data);
  ModelConfig model = a.flags.apply(ModelConfig{});
  std::optional<ParamSet<float>> params;
  std::string label = "oracle labels";
  if (!a.oracle) {
    Checkpoint ckpt = read_checkpoint(a.ckpt);
    model = config_from_checkpoint(ckpt, model);
    params = params_from_checkpoint(ckpt, model);
    label = std::string(arch_name(model.arch));
  }
  PipelineConfig pipeline = a.flags.apply(a.pipeline.build(model.input_mode));
  label += " + " + a.pipeline.cluster;
  EvalReport report = evaluate(data, model, params ? &*params : nullptr, pipeline, a.threads);
  out << format_table(report, label);
  if (!a.records.empty()) write_text(a.records, format_records(report));
  return 0;
}

// ----------------------------------------------------------------- explain

struct ExplainArgs {
  std::string scan;
  std::string ckpt;
  std::string method;
  std::string center;
  std::string dest;
  double radius = kDefaultPerturbRadius;
  bool automatic = false;
  std::string out_dir;
  PipelineFlags pipeline;
  ModelFlags flags;
};

void add_explain(CLI::App& app, ExplainArgs& a) {
  auto* cmd = app.add_subcommand("explain", "Perturb a vortex core and report the model's response");
  cmd->add_option("--scan", a.scan, "Scan file")->required();
  cmd->add_option("--ckpt", a.ckpt, "Checkpoint")->required();
  cmd->add_option("--method", a.method, "mask, move or swap")
      ->required()
      ->check(CLI::IsMember({"mask", "move", "swap"}));
  cmd->add_option("--center", a.center, "Target core Y,Z (m)");
  cmd->add_option("--dest", a.dest, "Move destination or swap partner Y,Z (m)");
  cmd->add_option("--radius", a.radius, "Perturbation radius (m)")->capture_default_str();
  cmd->add_flag("--auto", a.automatic, "Target the strongest detection and pick missing centers");
  cmd->add_option("--out-dir", a.out_dir, "Write report.txt and before/after panels here");
  a.pipeline.add(cmd);
  a.flags.add(cmd);
}

int cmd_explain(const ExplainArgs& a, std::ostream& out) {
  const PerturbMethod method = method_from_name(a.method);
  if (!a.automatic) {
    if (a.center.empty()) throw UsageError("explain needs --center (or --auto)");
    if (method != PerturbMethod::kMask && a.dest.empty()) {
      throw UsageError(std::string("--method ") + a.method + " needs --dest (or --auto)");
    }
  }
  LidarScan scan = read_scan(a.scan);
  Checkpoint ckpt = read_checkpoint(a.ckpt);
  ModelConfig model = config_from_checkpoint(ckpt, a.flags.apply(ModelConfig{}));
  ParamSet<float> params = params_from_checkpoint(ckpt, model);
  PipelineConfig pipeline = a.flags.apply(a.pipeline.build(model.input_mode));

  PerturbationSpec spec;
  if (a.automatic) {
    Detected d = detect(model, params, scan, pipeline);
    auto chosen = auto_spec(method, scan, d.detections, a.radius, pipeline.d_match);
    if (!chosen) throw std::runtime_error("--auto found no suitable detection for --method " + a.method);
    spec = *chosen;
    if (!a.center.empty()) spec.target_center = parse_point(a.center, "--center");
  } else {
    spec.method = method;
    spec.radius = a.radius;
    spec.target_center = parse_point(a.center, "--center");
  }
  if (!a.dest.empty()) {
    Vec2 p = parse_point(a.dest, "--dest");
    if (method == PerturbMethod::kMove) spec.destination = p;
    if (method == PerturbMethod::kSwap) spec.second_center = p;
  }

  ExplainThresholds thresholds;
  thresholds.d_match = pipeline.d_match;
  ExplainRun run = explain(model, params, scan, spec, pipeline, thresholds);
  std::string report = format_report(run.report);
  out << report;
  if (!a.out_dir.empty()) {
    fs::path dir = a.out_dir;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
    write_text(dir / "report.txt", report);
    const PointCloud& cloud = run.before.prepared.cloud;
    std::vector<Image> panels = {
        render_velocity(scan), render_velocity(run.perturbed),
        render_segmentation(cloud, run.before.predicted, run.before.detections),
        render_segmentation(cloud, run.after.predicted, run.after.detections)};
    write_ppm(panels[0], dir / "velocity_before.ppm");
    write_ppm(panels[1], dir / "velocity_after.ppm");
    write_ppm(panels[2], dir / "segmentation_before.ppm");
    write_ppm(panels[3], dir / "segmentation_after.ppm");
    write_ppm(hconcat(panels), dir / "panels.ppm");
  }
  return 0;
}

// ------------------------------------------------------------------ render

struct RenderArgs {
  std::string scan;
  std::string out;
  std::string ckpt;
  bool truth = false;
  PipelineFlags pipeline;
  ModelFlags flags;
};

void add_render(CLI::App& app, RenderArgs& a) {
  auto* cmd = app.add_subcommand("render", "Render a scan (and optionally its segmentation) as PPM");
  cmd->add_option("--scan", a.scan, "Scan file")->required();
  cmd->add_option("--out", a.out, "Output prefix; writes <out>_velocity.ppm and <out>_segmentation.ppm")
      ->required();
  auto* ckpt = cmd->add_option("--ckpt", a.ckpt, "Segment with this checkpoint");
  auto* truth = cmd->add_flag("--truth", a.truth, "Segment with the truth labels");
  ckpt->excludes(truth);
  a.pipeline.add(cmd);
  a.flags.add(cmd);
}

int cmd_render(const RenderArgs& a, std::ostream& out) {
  LidarScan scan = read_scan(a.scan);
  write_ppm(render_velocity(scan), a.out + "_velocity.ppm");
  out << "wrote " << a.out << "_velocity.ppm\n";
  if (a.ckpt.empty() && !a.truth) return 0;

  ModelConfig model = a.flags.apply(ModelConfig{});
  Detected d;
  if (a.truth) {
    d = detect_oracle(scan, a.flags.apply(a.pipeline.build(model.input_mode)));
  } else {
    Checkpoint ckpt = read_checkpoint(a.ckpt);
    model = config_from_checkpoint(ckpt, model);
    d = detect(model, params_from_checkpoint(ckpt, model), scan, a.flags.apply(a.pipeline.build(model.input_mode)));
  }
  write_ppm(render_segmentation(d.prepared.cloud, d.predicted, d.detections), a.out + "_segmentation.ppm");
  out << "wrote " << a.out << "_segmentation.ppm\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Wake-vortex detection in Doppler LiDAR scans", "vortexseg"};
  app.require_subcommand(1);
  GenerateArgs gen;
  TrainArgs tr;
  EvalArgs ev;
  ExplainArgs ex;
  RenderArgs rd;
  add_generate(app, gen);
  add_train(app, tr);
  add_eval(app, ev);
  add_explain(app, ex);
  add_render(app, rd);

  // CLI11 consumes a vector of arguments from the back; args[0] is the program.
  std::vector<std::string> reversed(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(reversed.begin(), reversed.end());
  try {
    app.parse(reversed);
  } catch (const CLI::Error& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;  // --help succeeds
  }

  try {
    if (app.got_subcommand("generate")) return cmd_generate(gen, out);
    if (app.got_subcommand("train")) return cmd_train(tr, out, err);
    if (app.got_subcommand("eval")) return cmd_eval(ev, out);
    if (app.got_subcommand("explain")) return cmd_explain(ex, out);
    if (app.got_subcommand("render")) return cmd_render(rd, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace vortexseg::cli
