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

// Acceptance runner: evaluates each numbered acceptance criterion and prints
// one PASS/FAIL line per criterion. Exits non-zero when any selected
// criterion fails.

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "oracles.hpp"
#include "vortexseg/explain.hpp"
#include "vortexseg/nn_ops.hpp"
#include "vortexseg/pipeline.hpp"
#include "vortexseg/train.hpp"

namespace vortexseg::acceptance {
namespace {

namespace fs = std::filesystem;
using testing::max_gradient_error;
using testing::random_matrix;
using testing::random_vector;
using testing::weighted_sum;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// ------------------------------------------------------------ shared model

// Training protocol of criterion 6, reused by criterion 8.
constexpr size_t kTrainScans = 150;
constexpr uint64_t kTrainSeed = 1001;
constexpr size_t kTestScans = 40;
constexpr uint64_t kTestSeed = 2002;
constexpr size_t kProtocolPoints = 1024;
constexpr size_t kProtocolEpochs = 15;
constexpr size_t kProtocolBatch = 4;
constexpr uint64_t kInitSeed = 7;

PipelineConfig protocol_pipeline() {
  PipelineConfig pc;
  pc.n_points = kProtocolPoints;
  return pc;
}

std::vector<DatasetEntry> as_entries(const std::vector<LidarScan>& scans, const std::string& prefix) {
  std::vector<DatasetEntry> out;
  for (size_t i = 0; i < scans.size(); ++i) out.push_back({prefix + std::to_string(i), scans[i]});
  return out;
}

struct TrainedModel {
  ModelConfig config;
  ParamSet<float> params;
  double train_seconds = 0.0;
};

TrainedModel train_protocol_model(Arch arch, size_t epochs, size_t batch) {
  Stopwatch watch;
  SceneConfig scene;  // noise_sigma 0.3
  auto samples = training_set(as_entries(generate_scans(kTrainScans, kTrainSeed, scene), "train"),
                              protocol_pipeline());
  ModelConfig config = arch == Arch::kDgcnn ? ModelConfig::dgcnn() : ModelConfig::pointnet();
  config.k = kDefaultK;
  TrainOptions options;
  options.epochs = epochs;
  options.batch_size = batch;
  options.lr = kDefaultLearningRate;
  options.seed = kInitSeed;
  options.on_epoch = [&](size_t epoch, double loss) {
    std::fprintf(stderr, "  [%s] epoch %zu/%zu loss %.4f (%.0f s)\n", std::string(arch_name(arch)).c_str(), epoch,
                 epochs, loss, watch.seconds());
  };
  TrainResult result = train(samples, config, options);
  return {config, params_from_checkpoint(result.checkpoint, config), watch.seconds()};
}

struct Context {
  std::optional<fs::path> work_dir;
  std::optional<TrainedModel> dgcnn;

  fs::path scratch(const std::string& name) const {
    fs::path base = work_dir ? *work_dir : fs::temp_directory_path() / "vortexseg_acceptance";
    fs::create_directories(base);
    return base / name;
  }

  fs::path dgcnn_checkpoint_path() const { return scratch("dgcnn_protocol.wvck"); }

  // Trains and stores the criterion-6 DGCNN.
  const TrainedModel& train_dgcnn() {
    dgcnn = train_protocol_model(Arch::kDgcnn, kProtocolEpochs, kProtocolBatch);
    if (work_dir) {
      Checkpoint ckpt = to_checkpoint(dgcnn->config, dgcnn->params);
      write_checkpoint(ckpt, dgcnn_checkpoint_path());
    }
    return *dgcnn;
  }

  // The criterion-6 DGCNN: in memory, else from the work directory, else
  // trained now.
  const TrainedModel& protocol_dgcnn() {
    if (dgcnn) return *dgcnn;
    if (work_dir && fs::exists(dgcnn_checkpoint_path())) {
      Checkpoint ckpt = read_checkpoint(dgcnn_checkpoint_path());
      ModelConfig config = config_from_checkpoint(ckpt);
      dgcnn = TrainedModel{config, params_from_checkpoint(ckpt, config), 0.0};
      std::fprintf(stderr, "  using %s\n", dgcnn_checkpoint_path().c_str());
      return *dgcnn;
    }
    return train_dgcnn();
  }
};

// ------------------------------------------------------------- criterion 1

Outcome gradient_correctness(Context&) {
  Stopwatch watch;
  constexpr double kOpTol = 1e-6;
  constexpr double kModelTol = 1e-4;
  std::map<std::string, double> op_error;
  auto record = [&](const std::string& op, double e) { op_error[op] = std::max(op_error[op], e); };

  for (uint64_t seed = 0; seed < 5; ++seed) {
    SplitMix64 rng(seed);
    {
      Matrix<double> x = random_matrix(5, 4, rng);
      Matrix<double> w = random_matrix(4, 3, rng);
      std::vector<double> b = random_vector(3, rng);
      Matrix<double> c = random_matrix(5, 3, rng);
      auto loss = [&] { return weighted_sum(nn::linear_forward<double>(x, w, b), c); };
      Matrix<double> dx;
      Matrix<double> dw(4, 3);
      std::vector<double> db(3, 0.0);
      nn::linear_backward<double>(x, w, c, &dx, dw, db);
      record("linear", max_gradient_error(x.data, dx.data, loss));
      record("linear", max_gradient_error(w.data, dw.data, loss));
      record("linear", max_gradient_error(b, db, loss));
    }
    {
      Matrix<double> local = random_matrix(5, 3, rng);
      std::vector<double> global = random_vector(4, rng);
      Matrix<double> w = random_matrix(7, 2, rng);
      std::vector<double> b = random_vector(2, rng);
      Matrix<double> c = random_matrix(5, 2, rng);
      auto loss = [&] { return weighted_sum(nn::broadcast_linear_forward<double>(local, global, w, b), c); };
      Matrix<double> dlocal;
      std::vector<double> dglobal;
      Matrix<double> dw(7, 2);
      std::vector<double> db(2, 0.0);
      nn::broadcast_linear_backward<double>(local, global, w, c, &dlocal, &dglobal, dw, db);
      record("broadcast_linear", max_gradient_error(local.data, dlocal.data, loss));
      record("broadcast_linear", max_gradient_error(global, dglobal, loss));
      record("broadcast_linear", max_gradient_error(w.data, dw.data, loss));
      record("broadcast_linear", max_gradient_error(b, db, loss));
    }
    {
      Matrix<double> x = random_matrix(6, 5, rng);
      for (auto& v : x.data) {
        if (std::abs(v) < 0.05) v += 0.1;  // stay off the kink
      }
      Matrix<double> c = random_matrix(6, 5, rng);
      auto loss = [&] { return weighted_sum(nn::leaky_relu_forward<double>(x), c); };
      record("leaky_relu", max_gradient_error(x.data, nn::leaky_relu_backward<double>(x, c).data, loss));
    }
    {
      const size_t n = 6, k = 2, d = 3, d_out = 4;
      Matrix<double> x = random_matrix(n, d, rng);
      KnnGraph g = knn_bruteforce(std::span<const double>(x.data), n, d, k);
      Matrix<double> w = random_matrix(2 * d, d_out, rng);
      std::vector<double> b = random_vector(d_out, rng);
      Matrix<double> c = random_matrix(n, d_out, rng);
      auto loss = [&] { return weighted_sum(nn::edgeconv_forward<double>(x, g, w, b, nullptr), c); };
      nn::EdgeConvCache<double> cache;
      nn::edgeconv_forward<double>(x, g, w, b, &cache);
      Matrix<double> dx;
      Matrix<double> dw(2 * d, d_out);
      std::vector<double> db(d_out, 0.0);
      nn::edgeconv_backward<double>(x, g, w, cache, c, &dx, dw, db);
      record("edgeconv", max_gradient_error(x.data, dx.data, loss));
      record("edgeconv", max_gradient_error(w.data, dw.data, loss));
      record("edgeconv", max_gradient_error(b, db, loss));
    }
    {
      Matrix<double> x = random_matrix(5, 4, rng);
      std::vector<double> c = random_vector(4, rng);
      auto loss = [&] {
        auto y = nn::global_maxpool_forward<double>(x, nullptr);
        double s = 0.0;
        for (size_t j = 0; j < y.size(); ++j) s += y[j] * c[j];
        return s;
      };
      std::vector<uint32_t> arg;
      nn::global_maxpool_forward<double>(x, &arg);
      record("global_maxpool",
             max_gradient_error(x.data, nn::global_maxpool_backward<double>(5, c, arg).data, loss));
    }
    {
      Matrix<double> z = random_matrix(4, 3, rng, -3.0, 3.0);
      std::vector<uint8_t> labels;
      for (size_t i = 0; i < 4; ++i) labels.push_back(static_cast<uint8_t>(rng.below(3)));
      auto loss = [&] { return nn::softmax_cross_entropy<double>(z, labels).loss; };
      record("softmax_cross_entropy",
             max_gradient_error(z.data, nn::softmax_cross_entropy<double>(z, labels).grad.data, loss));
    }
  }

  // Full DGCNN, n = 16, k = 4, static graph: every coordinate at reduced
  // widths, sampled coordinates at the standard widths.
  double model_error = 0.0;
  {
    ModelConfig config = testing::small_config(Arch::kDgcnn);
    config.dynamic_graph = false;
    for (uint64_t seed = 0; seed < 3; ++seed) {
      SplitMix64 rng(50 + seed);
      auto in = testing::make_input(16, kNumClasses, rng);
      auto params = testing::random_params(config, 60 + seed);
      model_error = std::max(model_error, testing::check_gradients(config, params, in, testing::all_coords(params)));
    }
    ModelConfig full = ModelConfig::dgcnn();
    full.k = 4;
    full.dynamic_graph = false;
    SplitMix64 rng(70);
    auto in = testing::make_input(16, kNumClasses, rng);
    auto params = testing::random_params(full, 71);
    model_error =
        std::max(model_error, testing::check_gradients(full, params, in, testing::sampled_coords(params, 8, rng)));
  }

  bool pass = model_error < kModelTol;
  std::string detail;
  for (const auto& [op, e] : op_error) {
    pass = pass && e < kOpTol;
    detail += format("%s %.1e, ", op.c_str(), e);
  }
  double t = watch.seconds();
  pass = pass && t < 60.0;
  detail += format("dgcnn(n=16,k=4,static) %.1e; %.1f s", model_error, t);
  return {pass, detail};
}

// ------------------------------------------------------------- criterion 2

Outcome clustering_oracles(Context&) {
  Stopwatch watch;
  size_t dbscan_ok = 0, ward_ok = 0, optics_ok = 0;
  for (uint64_t seed = 0; seed < 200; ++seed) {
    SplitMix64 rng(1000 + seed);
    size_t n_blobs = 1 + rng.below(3);
    size_t per_blob = 4 + rng.below(16);
    auto pts = testing::blobs(rng, n_blobs, per_blob, rng.uniform(1.0, 6.0), rng.below(65 - n_blobs * per_blob),
                              120.0);
    double eps = rng.uniform(2.0, 12.0);
    size_t min_pts = 1 + rng.below(8);
    dbscan_ok += dbscan(pts, eps, min_pts).assignment == testing::dbscan_oracle(pts, eps, min_pts);
  }
  for (uint64_t seed = 0; seed < 100; ++seed) {
    SplitMix64 rng(2000 + seed);
    size_t n = 2 + rng.below(9);
    auto pts = rng.below(2) ? testing::random_points(n, rng, 100.0) : testing::blobs(rng, 2, n / 2, 5.0, n % 2, 100.0);
    double threshold = rng.uniform(5.0, 120.0);
    auto got = ward_merge_sequence(pts, threshold);
    auto want = testing::ward_oracle(pts, threshold);
    bool same = got.size() == want.size();
    for (size_t s = 0; same && s < got.size(); ++s) {
      same = got[s].first == want[s].first && got[s].second == want[s].second &&
             std::abs(got[s].cost - want[s].cost) <= 1e-9 * std::max(1.0, want[s].cost);
    }
    ward_ok += same;
  }
  for (uint64_t seed = 0; seed < 100; ++seed) {
    SplitMix64 rng(3000 + seed);
    auto pts = testing::blobs(rng, 1 + rng.below(4), 10 + rng.below(40), rng.uniform(2.0, 8.0), rng.below(100), 200.0);
    size_t min_pts = 2 + rng.below(10);
    double eps = rng.uniform(4.0, 12.0);
    OpticsResult o = optics(pts, min_pts, eps * rng.uniform(1.0, 3.0));
    ClusterResult a = extract_dbscan(o, pts, eps);
    ClusterResult b = dbscan(pts, eps, min_pts);
    // Core points: same partition; every point OPTICS assigns is also
    // assigned by DBSCAN.
    std::vector<size_t> core;
    bool same = true;
    for (size_t i = 0; i < pts.size(); ++i) {
      if (o.core_distance[i] <= eps) {
        core.push_back(i);
        same = same && a.assignment[i] != kNoise && b.assignment[i] != kNoise;
      } else if (a.assignment[i] != kNoise) {
        same = same && b.assignment[i] != kNoise;
      }
    }
    for (size_t i : core) {
      for (size_t j : core) same = same && (a.assignment[i] == a.assignment[j]) == (b.assignment[i] == b.assignment[j]);
    }
    optics_ok += same;
  }
  double t = watch.seconds();
  bool pass = dbscan_ok == 200 && ward_ok == 100 && optics_ok == 100 && t < 120.0;
  return {pass, format("dbscan %zu/200, ward %zu/100, optics %zu/100; %.1f s", dbscan_ok, ward_ok, optics_ok, t)};
}

// ------------------------------------------------------------- criterion 3

Outcome knn_oracle(Context&) {
  Stopwatch watch;
  size_t ok = 0, large = 0;
  for (uint64_t seed = 0; seed < 50; ++seed) {
    SplitMix64 rng(4000 + seed);
    std::vector<double> xy;
    size_t n, k;
    if (seed % 10 == 0) {
      // Full-size scan: sample a synthetic scan's cells.
      n = kDefaultPointCount;
      k = kDefaultK;
      ++large;
      LidarScan scan = generate_scans(1, 5000 + seed, SceneConfig{})[0];
      PointCloud cloud = sample_points(scan, n, rng.next());
      for (size_t i = 0; i < n; ++i) {
        xy.push_back(cloud.y[i]);
        xy.push_back(cloud.z[i]);
      }
    } else {
      n = 2 + rng.below(600);
      k = 1 + rng.below(std::min<size_t>(n - 1, 30));
      auto pts = testing::random_points(n, rng, rng.uniform(1.0, 1000.0));
      if (seed % 3 == 0) {
        for (auto& p : pts) p = {std::round(p.y / 10.0), std::round(p.z / 10.0)};  // many ties
      }
      xy = testing::flatten(pts);
    }
    ok += knn_grid(xy, n, k) == knn_bruteforce(xy, n, 2, k);
  }
  double t = watch.seconds();
  bool pass = ok == 50 && t < 120.0;
  return {pass, format("%zu/50 identical (%zu with 12000 points, k=20); %.1f s", ok, large, t)};
}

// ------------------------------------------------------------- criterion 4

template <typename F>
std::optional<FormatError::Kind> error_kind(F&& decode) {
  try {
    decode();
  } catch (const FormatError& e) {
    return e.kind();
  }
  return std::nullopt;
}

Outcome format_round_trips(Context&) {
  Stopwatch watch;
  size_t scans_ok = 0, ckpts_ok = 0, corrupt_ok = 0, corrupt_total = 0;
  SplitMix64 rng(6000);
  for (int i = 0; i < 100; ++i) {
    LidarScan s = testing::random_scan(rng);
    auto bytes = encode_scan(s);
    LidarScan back = decode_scan(bytes);
    scans_ok += back == s && encode_scan(back) == bytes;
    Checkpoint c = testing::random_checkpoint(rng);
    auto cbytes = encode_checkpoint(c);
    Checkpoint cback = decode_checkpoint(cbytes);
    ckpts_ok += cback == c && encode_checkpoint(cback) == cbytes;

    auto expect = [&](std::optional<FormatError::Kind> got, FormatError::Kind want) {
      ++corrupt_total;
      corrupt_ok += got == want;
    };
    auto bad = bytes;
    bad[rng.below(4)] ^= 0x20;
    expect(error_kind([&] { decode_scan(bad); }), FormatError::Kind::kBadMagic);
    auto cbad = cbytes;
    cbad[rng.below(4)] ^= 0x20;
    expect(error_kind([&] { decode_checkpoint(cbad); }), FormatError::Kind::kBadMagic);
    std::vector<uint8_t> cut(bytes.begin(), bytes.begin() + static_cast<ptrdiff_t>(rng.below(bytes.size())));
    expect(error_kind([&] { decode_scan(cut); }), FormatError::Kind::kTruncated);
    std::vector<uint8_t> ccut(cbytes.begin(), cbytes.begin() + static_cast<ptrdiff_t>(rng.below(cbytes.size())));
    expect(error_kind([&] { decode_checkpoint(ccut); }), FormatError::Kind::kTruncated);
  }
  // File round trip and a missing file.
  fs::path dir = fs::temp_directory_path() / "vortexseg_acceptance_c4";
  fs::create_directories(dir);
  LidarScan s = testing::random_scan(rng);
  write_scan(s, dir / "s.wvls");
  bool files_ok = read_scan(dir / "s.wvls") == s;
  files_ok = files_ok && error_kind([&] { read_scan(dir / "missing.wvls"); }) == FormatError::Kind::kIo;
  fs::remove_all(dir);

  double t = watch.seconds();
  bool pass = scans_ok == 100 && ckpts_ok == 100 && corrupt_ok == corrupt_total && files_ok && t < 60.0;
  return {pass, format("WVLS %zu/100, WVCK %zu/100 bit-exact; corruption errors %zu/%zu; file i/o %s; %.1f s",
                       scans_ok, ckpts_ok, corrupt_ok, corrupt_total, files_ok ? "ok" : "BAD", t)};
}

// ------------------------------------------------------------- criterion 5

Outcome oracle_pipeline(Context&) {
  Stopwatch watch;
  auto data = as_entries(generate_scans(100, 7000, SceneConfig{}), "scan");
  bool pass = true;
  std::string detail;
  for (auto algorithm : {ClusterAlgorithm::kAgglomerative, ClusterAlgorithm::kDbscan, ClusterAlgorithm::kOptics}) {
    PipelineConfig pc;  // 12000 points, default clustering parameters
    pc.cluster.algorithm = algorithm;
    EvalReport r = evaluate(data, ModelConfig{}, nullptr, pc);
    pass = pass && r.recall == 1.0 && r.mean_error_no_fn <= 5.0;
    detail += format("%s recall %.2f%% ME_no_fn %.2f m FP %zu, ", std::string(algorithm_name(algorithm)).c_str(),
                     100.0 * r.recall, r.mean_error_no_fn, r.false_positives);
  }
  double t = watch.seconds();
  pass = pass && t < 300.0;
  return {pass, detail + format("%.1f s", t)};
}

// ------------------------------------------------------------- criterion 6

struct ProtocolScore {
  EvalReport report;
  double accuracy = 0.0;
};

ProtocolScore score_on_test_set(const TrainedModel& m) {
  auto test = as_entries(generate_scans(kTestScans, kTestSeed, SceneConfig{}), "test");
  PipelineConfig pc = protocol_pipeline();  // Agglomerative refinement
  ProtocolScore s{evaluate(test, m.config, &m.params, pc), 0.0};
  for (const auto& e : test) {
    Detected d = detect(m.config, m.params, e.scan, pc);
    s.accuracy += point_accuracy(d.predicted, d.prepared.cloud.label) / double(test.size());
  }
  return s;
}

Outcome end_to_end_training(Context& ctx) {
  Stopwatch watch;
  const TrainedModel& dgcnn = ctx.protocol_dgcnn();
  ProtocolScore d = score_on_test_set(dgcnn);
  TrainedModel pointnet = train_protocol_model(Arch::kPointNet, kProtocolEpochs, kProtocolBatch);
  ProtocolScore p = score_on_test_set(pointnet);
  double t = watch.seconds() + dgcnn.train_seconds;
  bool dgcnn_ok = d.report.recall >= 0.85 && d.report.mean_error_no_fn <= 20.0;
  bool pointnet_ok = p.report.recall >= 0.70;
  bool ordering = d.report.recall > p.report.recall;
  bool pass = dgcnn_ok && pointnet_ok && ordering && t <= 90.0 * 60.0;
  return {pass, format("dgcnn recall %.2f%% ME_no_fn %.2f m acc %.4f [%s]; pointnet recall %.2f%% ME_no_fn %.2f m "
                       "acc %.4f [%s]; dgcnn > pointnet %s; %.0f s",
                       100.0 * d.report.recall, d.report.mean_error_no_fn, d.accuracy, dgcnn_ok ? "ok" : "below target",
                       100.0 * p.report.recall, p.report.mean_error_no_fn, p.accuracy,
                       pointnet_ok ? "ok" : "below target", ordering ? "yes" : "no", t)};
}

// ------------------------------------------------------------- criterion 7

Outcome overfit_smoke(Context&) {
  Stopwatch watch;
  PipelineConfig pc;
  pc.n_points = 256;
  auto samples = training_set(as_entries(generate_scans(8, 8000, SceneConfig{}), "scan"), pc);
  ModelConfig config = ModelConfig::dgcnn();
  TrainOptions options;
  options.epochs = 20;
  options.seed = 1;
  TrainResult r = train(samples, config, options);
  ParamSet<float> params = params_from_checkpoint(r.checkpoint, config);
  double accuracy = 0.0;
  for (const auto& s : samples) {
    accuracy += point_accuracy(predict(config, params, s.features, s.spatial), s.labels) / double(samples.size());
  }
  double loss = r.epoch_loss.back();
  double t = watch.seconds();
  bool pass = loss < 0.05 && accuracy > 0.98 && t < 300.0;
  return {pass, format("final loss %.4f, training accuracy %.4f; %.1f s", loss, accuracy, t)};
}

// ------------------------------------------------------------- criterion 8

Outcome explanation_behavior(Context& ctx) {
  Stopwatch watch;
  const TrainedModel& m = ctx.protocol_dgcnn();
  const PipelineConfig pc = protocol_pipeline();
  constexpr size_t kScans = 20;
  // Held-out scans from the test stream, in order.
  auto scans = generate_scans(400, kTestSeed, SceneConfig{});

  size_t n_mask = 0, suppressed = 0, ring = 0;
  size_t n_move = 0, relocated = 0;
  size_t n_swap = 0, intermingled = 0;
  for (const auto& scan : scans) {
    if (n_mask >= kScans && n_move >= kScans && n_swap >= kScans) break;
    Detected d = detect(m.config, m.params, scan, pc);
    if (d.detections.empty()) continue;
    Matching mt = match(scan.truth, d.detections);
    bool strongest_matched = false;
    for (const auto& p : mt.pairs) strongest_matched |= p.detection == 0;

    if (strongest_matched && n_mask < kScans) {
      // Radius of half the label disk: the ring (r, 2r] then lies inside
      // the labeled vortex region.
      PerturbationSpec spec;
      spec.method = PerturbMethod::kMask;
      spec.radius = kDefaultLabelRadius / 2.0;
      spec.target_center = d.detections[0].center;
      ExplainReport r = explain(m.config, m.params, scan, spec, pc).report;
      ++n_mask;
      suppressed += r.masked_core_suppressed;
      ring += r.surrounding_ring_retained;
    }
    if (strongest_matched && n_move < kScans) {
      if (auto spec = auto_spec(PerturbMethod::kMove, scan, d.detections, kDefaultPerturbRadius)) {
        ExplainReport r = explain(m.config, m.params, scan, *spec, pc).report;
        ++n_move;
        relocated += r.relocated_core_detected;
      }
    }
    if (n_swap < kScans && scan.truth.size() >= 2) {
      // Both members of the pair detected: exchange their cores.
      const Detection* a = nullptr;
      const Detection* b = nullptr;
      for (const auto& p : mt.pairs) {
        if (p.truth == 0) a = &d.detections[p.detection];
        if (p.truth == 1) b = &d.detections[p.detection];
      }
      if (a && b) {
        PerturbationSpec spec;
        spec.method = PerturbMethod::kSwap;
        spec.target_center = a->center;
        spec.second_center = b->center;
        spec.radius = std::min(kDefaultPerturbRadius, 0.49 * distance(a->center, b->center));
        ExplainReport r = explain(m.config, m.params, scan, spec, pc).report;
        ++n_swap;
        intermingled += r.swap_intermingled;
      }
    }
  }
  auto rate = [](size_t k, size_t n) { return n == 0 ? 0.0 : double(k) / double(n); };
  double t = watch.seconds();
  bool mask_ok = n_mask == kScans && rate(suppressed, n_mask) >= 0.8 && rate(ring, n_mask) >= 0.6;
  bool move_ok = n_move == kScans && rate(relocated, n_move) >= 0.6;
  bool swap_ok = n_swap == kScans && rate(intermingled, n_swap) >= 0.6;
  bool pass = mask_ok && move_ok && swap_ok && t < 600.0;
  return {pass, format("mask: suppressed %zu/%zu, ring retained %zu/%zu [%s]; move: relocated %zu/%zu [%s]; "
                       "swap: intermingled %zu/%zu [%s]; %.1f s",
                       suppressed, n_mask, ring, n_mask, mask_ok ? "ok" : "below target", relocated, n_move,
                       move_ok ? "ok" : "below target", intermingled, n_swap, swap_ok ? "ok" : "below target", t)};
}

// ------------------------------------------------------------- criterion 9

struct CliResult {
  int code = 0;
  std::string out;
};

CliResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "vortexseg");
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str()};
}

// Byte contents of every regular file under `dir`, keyed by relative path.
std::map<std::string, std::vector<uint8_t>> snapshot(const fs::path& dir) {
  std::map<std::string, std::vector<uint8_t>> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = read_file_bytes(e.path());
  }
  return files;
}

Outcome determinism(Context& ctx) {
  Stopwatch watch;
  fs::path root = ctx.scratch("determinism");
  fs::remove_all(root);
  std::vector<std::map<std::string, std::vector<uint8_t>>> runs;
  std::vector<std::string> stdout_eval;
  bool codes_ok = true;
  for (int run = 0; run < 2; ++run) {
    fs::path dir = root / ("run" + std::to_string(run));
    std::string data = (dir / "data").string();
    std::string out = (dir / "out").string();
    fs::create_directories(out);
    codes_ok &= run_cli({"generate", "--out", data, "--count", "6", "--seed", "99"}).code == 0;
    for (std::string model : {"dgcnn", "pointnet"}) {
      std::string ckpt = out + "/" + model + ".wvck";
      codes_ok &= run_cli({"train", "--data", data, "--model", model, "--epochs", "2", "--batch", "2", "--points",
                           "256", "--seed", "5", "--out", ckpt})
                      .code == 0;
      CliResult e = run_cli({"eval", "--data", data, "--ckpt", ckpt, "--points", "256", "--records",
                             out + "/" + model + ".records.tsv"});
      codes_ok &= e.code == 0;
      stdout_eval.push_back(e.out);
    }
    CliResult o = run_cli({"eval", "--data", data, "--oracle", "--points", "2000"});
    codes_ok &= o.code == 0;
    stdout_eval.push_back(o.out);
    runs.push_back(snapshot(dir));
  }
  bool files_same = runs[0] == runs[1];
  std::string differing;
  for (const auto& [name, bytes] : runs[0]) {
    auto it = runs[1].find(name);
    if (it == runs[1].end() || it->second != bytes) differing += " " + name;
  }
  bool stdout_same = std::equal(stdout_eval.begin(), stdout_eval.begin() + 3, stdout_eval.begin() + 3);
  fs::remove_all(root);
  double t = watch.seconds();
  bool pass = codes_ok && files_same && stdout_same && runs[0].size() >= 12;
  return {pass, format("%zu files byte-identical: %s%s; eval stdout identical: %s; exit codes %s; %.1f s",
                       runs[0].size(), files_same ? "yes" : "no", differing.c_str(), stdout_same ? "yes" : "no",
                       codes_ok ? "ok" : "BAD", t)};
}

// ------------------------------------------------------------ criterion 10

Outcome metric_arithmetic(Context&) {
  // One TP 5 m from its truth (3-4-5 offset), one FN at (300, 80).
  std::vector<VortexSpec> truth = {{VortexClass::kPort, {400.0, 100.0}, 300.0, 3.0},
                                   {VortexClass::kStarboard, {300.0, 80.0}, 300.0, 3.0}};
  std::vector<Detection> detections = {{VortexClass::kPort, {403.0, 104.0}, 50}};
  EvalReport r = metrics({evaluate_scan("hand", truth, detections)});
  const double expected_me = (5.0 + std::sqrt(300.0 * 300.0 + 80.0 * 80.0)) / 2.0;
  bool pass = r.recall == 0.5 && r.mean_error_no_fn == 5.0 && r.mean_error == expected_me &&
              std::abs(r.mean_error - 157.74) < 0.005 && r.true_positives == 1 && r.false_negatives == 1;
  return {pass, format("recall %.3f, ME %.4f m, ME_no_fn %.4f m", r.recall, r.mean_error, r.mean_error_no_fn)};
}

// ------------------------------------------------------------------ runner

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome(Context&)> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all = {
      {1, "gradient correctness", gradient_correctness},
      {2, "clustering oracles", clustering_oracles},
      {3, "kNN oracle", knn_oracle},
      {4, "format round trips", format_round_trips},
      {5, "oracle-label pipeline", oracle_pipeline},
      {6, "end-to-end trainability", end_to_end_training},
      {7, "overfit smoke test", overfit_smoke},
      {8, "explanation behavior", explanation_behavior},
      {9, "determinism", determinism},
      {10, "metric arithmetic", metric_arithmetic},
  };
  return all;
}

int main_impl(int argc, char** argv) {
  CLI::App app{"Runs the vortexseg acceptance criteria"};
  std::vector<int> selected;
  std::string work_dir;
  bool prepare = false;
  app.add_option("criteria", selected, "Criterion numbers to run (default: all)")->check(CLI::Range(1, 10));
  app.add_option("--work-dir", work_dir, "Directory for the shared checkpoint and scratch files");
  app.add_flag("--prepare", prepare, "Train the shared DGCNN checkpoint into --work-dir and exit");
  CLI11_PARSE(app, argc, argv);

  Context ctx;
  if (!work_dir.empty()) ctx.work_dir = fs::path(work_dir);
  if (prepare) {
    if (!ctx.work_dir) {
      std::fprintf(stderr, "--prepare needs --work-dir\n");
      return 2;
    }
    const TrainedModel& m = ctx.train_dgcnn();
    std::printf("trained %s in %.0f s -> %s\n", std::string(arch_name(m.config.arch)).c_str(), m.train_seconds,
                ctx.dgcnn_checkpoint_path().c_str());
    return 0;
  }
  if (selected.empty()) {
    for (const auto& c : criteria()) selected.push_back(c.id);
  }

  bool all_pass = true;
  for (int id : selected) {
    const Criterion& c = criteria()[static_cast<size_t>(id - 1)];
    Outcome o;
    try {
      o = c.run(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all_pass = all_pass && o.pass;
    std::printf("criterion %2d %s: %s (%s)\n", c.id, o.pass ? "PASS" : "FAIL", c.title, o.detail.c_str());
    std::fflush(stdout);
  }
  return all_pass ? 0 : 1;
}

}  // namespace
}  // namespace vortexseg::acceptance

int main(int argc, char** argv) { return vortexseg::acceptance::main_impl(argc, argv); }
