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

#include "vortexseg/explain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace vortexseg {

std::string_view method_name(PerturbMethod m) {
  switch (m) {
    case PerturbMethod::kMask:
      return "mask";
    case PerturbMethod::kMove:
      return "move";
    case PerturbMethod::kSwap:
      return "swap";
  }
  return "unknown";
}

PerturbMethod method_from_name(std::string_view name) {
  if (name == "mask") return PerturbMethod::kMask;
  if (name == "move") return PerturbMethod::kMove;
  if (name == "swap") return PerturbMethod::kSwap;
  throw std::invalid_argument("unknown perturbation method '" + std::string(name) + "'");
}

std::vector<size_t> disk_cells(const ScanGeometry& geom, Vec2 center, double radius) {
  std::vector<size_t> out;
  const double r2 = radius * radius;
  for (size_t i = 0; i < geom.cell_count(); ++i) {
    if ((geom.cell_position(i) - center).norm_sq() <= r2) out.push_back(i);
  }
  return out;
}

namespace {

std::string fmt_point(Vec2 p) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "(%.1f, %.1f)", p.y, p.z);
  return buf;
}

void require_region(const ScanGeometry& geom, Vec2 center, double radius, const char* what) {
  if (!geom.contains(center)) {
    throw std::invalid_argument(std::string(what) + " " + fmt_point(center) + " lies outside the scan sector");
  }
  if (disk_cells(geom, center, radius).empty()) {
    throw std::invalid_argument(std::string(what) + " " + fmt_point(center) + " covers no grid cell");
  }
}

}  // namespace

void PerturbationSpec::validate(const ScanGeometry& geom) const {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw std::invalid_argument("perturbation radius must be positive");
  require_region(geom, target_center, radius, "center");
  switch (method) {
    case PerturbMethod::kMask:
      break;
    case PerturbMethod::kMove:
      if (!destination) throw std::invalid_argument("move requires a destination");
      require_region(geom, *destination, radius, "destination");
      break;
    case PerturbMethod::kSwap:
      if (!second_center) throw std::invalid_argument("swap requires a second center");
      require_region(geom, *second_center, radius, "second center");
      if (distance(target_center, *second_center) <= 2.0 * radius) {
        throw std::invalid_argument("swap disks overlap: centers closer than twice the radius");
      }
      break;
  }
}

LidarScan mask_core(const LidarScan& scan, Vec2 center, double radius, float fill) {
  std::vector<size_t> cells = disk_cells(scan.geom, center, radius);
  if (cells.empty()) throw std::invalid_argument("mask_core: disk " + fmt_point(center) + " covers no grid cell");
  LidarScan out = scan;
  for (size_t c : cells) out.vr[c] = fill;
  return out;
}

LidarScan mask_core(const LidarScan& scan, Vec2 center, double radius) {
  return mask_core(scan, center, radius, static_cast<float>(scan.mean_velocity()));
}

LidarScan move_core(const LidarScan& scan, Vec2 center, double radius, Vec2 destination) {
  const ScanGeometry& geom = scan.geom;
  require_region(geom, center, radius, "move source");
  require_region(geom, destination, radius, "move destination");
  const float mean = static_cast<float>(scan.mean_velocity());
  const Vec2 delta = destination - center;
  LidarScan out = scan;
  std::vector<bool> written(geom.cell_count(), false);
  std::vector<size_t> source = disk_cells(geom, center, radius);
  for (size_t c : source) {
    size_t target = geom.flat_index(geom.nearest_cell(geom.cell_position(c) + delta));
    out.vr[target] = scan.vr[c];
    written[target] = true;
  }
  for (size_t c : source) {
    if (!written[c]) out.vr[c] = mean;
  }
  return out;
}

LidarScan swap_cores(const LidarScan& scan, Vec2 a, Vec2 b, double radius) {
  const ScanGeometry& geom = scan.geom;
  require_region(geom, a, radius, "swap center");
  require_region(geom, b, radius, "swap center");
  if (distance(a, b) <= 2.0 * radius) throw std::invalid_argument("swap_cores: disks overlap");

  const double r2 = radius * radius;
  std::vector<bool> paired(geom.cell_count(), false);
  std::vector<std::pair<size_t, size_t>> pairs;
  auto pair_from = [&](Vec2 from, Vec2 to) {
    for (size_t c : disk_cells(geom, from, radius)) {
      if (paired[c]) continue;
      size_t partner = geom.flat_index(geom.nearest_cell(to + (geom.cell_position(c) - from)));
      if (paired[partner] || (geom.cell_position(partner) - to).norm_sq() > r2) continue;
      paired[c] = paired[partner] = true;
      pairs.emplace_back(c, partner);
    }
  };
  pair_from(a, b);
  pair_from(b, a);

  LidarScan out = scan;
  for (auto [p, q] : pairs) std::swap(out.vr[p], out.vr[q]);
  return out;
}

LidarScan apply_perturbation(const LidarScan& scan, const PerturbationSpec& spec) {
  spec.validate(scan.geom);
  switch (spec.method) {
    case PerturbMethod::kMask:
      return mask_core(scan, spec.target_center, spec.radius);
    case PerturbMethod::kMove:
      return move_core(scan, spec.target_center, spec.radius, *spec.destination);
    case PerturbMethod::kSwap:
      return swap_cores(scan, spec.target_center, *spec.second_center, spec.radius);
  }
  throw std::invalid_argument("unknown perturbation method");
}

const RegionResponse* ExplainReport::region(std::string_view name) const {
  for (const auto& r : regions) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

std::optional<VortexClass> region_class(const LidarScan& scan, const PointCloud& cloud,
                                        std::span<const uint8_t> predicted, Vec2 center, double radius) {
  const VortexSpec* nearest = nullptr;
  for (const auto& v : scan.truth) {
    double d = distance(v.center, center);
    if (d <= radius && (nearest == nullptr || d < distance(nearest->center, center))) nearest = &v;
  }
  if (nearest != nullptr) return nearest->vortex_class;

  std::array<size_t, kNumClasses> counts{};
  const double r2 = radius * radius;
  for (size_t i = 0; i < cloud.size(); ++i) {
    if ((cloud.position(i) - center).norm_sq() <= r2) ++counts[predicted[i]];
  }
  if (counts[1] == 0 && counts[2] == 0) return std::nullopt;
  return counts[1] >= counts[2] ? VortexClass::kPort : VortexClass::kStarboard;
}

namespace {

// Points with inner < |p - center| <= outer (inner < 0 includes the center).
RegionResponse respond(const std::string& name, const PointCloud& cloud, std::span<const uint8_t> before,
                       std::span<const uint8_t> after, Vec2 center, double inner, double outer) {
  RegionResponse r;
  r.name = name;
  const double in2 = inner < 0.0 ? -1.0 : inner * inner;
  const double out2 = outer * outer;
  for (size_t i = 0; i < cloud.size(); ++i) {
    double d2 = (cloud.position(i) - center).norm_sq();
    if (d2 <= in2 || d2 > out2) continue;
    ++r.points;
    r.before[before[i]] += 1.0;
    r.after[after[i]] += 1.0;
  }
  if (r.points > 0) {
    for (int c = 0; c < kNumClasses; ++c) {
      r.before[c] /= static_cast<double>(r.points);
      r.after[c] /= static_cast<double>(r.points);
    }
  }
  return r;
}

std::vector<DetectionChange> compare_detections(const std::vector<Detection>& before,
                                                const std::vector<Detection>& after, double d_match) {
  std::vector<VortexSpec> anchors;
  for (const auto& d : before) anchors.push_back({d.vortex_class, d.center});
  Matching m = match(anchors, after, d_match);
  std::vector<DetectionChange> out;
  for (const auto& p : m.pairs) {
    out.push_back({DetectionChange::Kind::kKept, before[p.truth].vortex_class, before[p.truth].center,
                   after[p.detection].center, p.distance});
  }
  for (size_t t : m.unmatched_truth) {
    out.push_back({DetectionChange::Kind::kVanished, before[t].vortex_class, before[t].center, {}, 0.0});
  }
  for (size_t d : m.unmatched_detection) {
    out.push_back({DetectionChange::Kind::kAppeared, after[d].vortex_class, {}, after[d].center, 0.0});
  }
  return out;
}

bool suppressed(const RegionResponse& r, uint8_t cls, double suppression) {
  double b = r.before[cls];
  return b > 0.0 && r.after[cls] <= (1.0 - suppression) * b;
}

}  // namespace

ExplainRun explain(const ModelConfig& model, const ParamSet<float>& params, const LidarScan& scan,
                   const PerturbationSpec& spec, const PipelineConfig& config, const ExplainThresholds& thresholds) {
  ExplainRun run;
  run.perturbed = apply_perturbation(scan, spec);
  run.before = detect(model, params, scan, config);
  run.after = detect(model, params, run.perturbed, config);
  const PointCloud& cloud = run.before.prepared.cloud;
  const auto& pb = run.before.predicted;
  const auto& pa = run.after.predicted;

  ExplainReport& rep = run.report;
  rep.spec = spec;
  rep.detections_before = run.before.detections;
  rep.detections_after = run.after.detections;
  rep.changes = compare_detections(rep.detections_before, rep.detections_after, thresholds.d_match);
  rep.target_class = region_class(scan, cloud, pb, spec.target_center, spec.radius);
  const double r = spec.radius;

  switch (spec.method) {
    case PerturbMethod::kMask: {
      rep.regions.push_back(respond("core", cloud, pb, pa, spec.target_center, -1.0, r));
      rep.regions.push_back(respond("ring", cloud, pb, pa, spec.target_center, r, 2.0 * r));
      if (rep.target_class) {
        auto cls = static_cast<uint8_t>(*rep.target_class);
        rep.masked_core_suppressed = suppressed(rep.regions[0], cls, thresholds.suppression);
        const RegionResponse& ring = rep.regions[1];
        rep.surrounding_ring_retained =
            ring.before[cls] > 0.0 && ring.after[cls] >= thresholds.ring_retention * ring.before[cls];
      }
      break;
    }
    case PerturbMethod::kMove: {
      rep.regions.push_back(respond("source", cloud, pb, pa, spec.target_center, -1.0, r));
      rep.regions.push_back(respond("destination", cloud, pb, pa, *spec.destination, -1.0, r));
      if (rep.target_class) {
        auto cls = static_cast<uint8_t>(*rep.target_class);
        rep.masked_core_suppressed = suppressed(rep.regions[0], cls, thresholds.suppression);
        for (const auto& d : rep.detections_after) {
          if (d.vortex_class == *rep.target_class && distance(d.center, *spec.destination) <= thresholds.d_match) {
            rep.relocated_core_detected = true;
          }
        }
      }
      break;
    }
    case PerturbMethod::kSwap: {
      rep.regions.push_back(respond("disk_a", cloud, pb, pa, spec.target_center, -1.0, r));
      rep.regions.push_back(respond("disk_b", cloud, pb, pa, *spec.second_center, -1.0, r));
      rep.second_class = region_class(scan, cloud, pb, *spec.second_center, r);
      if (rep.target_class && rep.second_class) {
        // Each disk must show at least one point of the class swapped into it.
        const RegionResponse& a = rep.regions[0];
        const RegionResponse& b = rep.regions[1];
        auto ca = static_cast<uint8_t>(*rep.target_class);
        auto cb = static_cast<uint8_t>(*rep.second_class);
        rep.swap_intermingled = a.after[cb] > 0.0 && b.after[ca] > 0.0;
      }
      break;
    }
  }
  return run;
}

std::optional<Vec2> choose_move_destination(const ScanGeometry& geom, Vec2 center, double radius,
                                            std::span<const Vec2> avoid, double d_avoid) {
  const Polar p = cartesian_to_polar(center);
  static constexpr double kShifts[] = {150.0, -150.0, 200.0, -200.0, 120.0, -120.0, 250.0, -250.0, 100.0, -100.0};
  for (double shift : kShifts) {
    if (p.range + shift <= 0.0) continue;
    Vec2 dest = polar_to_cartesian(p.phi_deg, p.range + shift);
    if (!geom.contains(dest, radius)) continue;
    bool clear = true;
    for (Vec2 a : avoid) clear = clear && distance(a, dest) >= d_avoid;
    if (clear) return dest;
  }
  return std::nullopt;
}

std::optional<PerturbationSpec> auto_spec(PerturbMethod method, const LidarScan& scan,
                                          std::span<const Detection> detections, double radius, double d_match) {
  if (detections.empty()) return std::nullopt;
  const Detection& strongest = detections.front();
  PerturbationSpec spec;
  spec.method = method;
  spec.radius = radius;
  spec.target_center = strongest.center;
  switch (method) {
    case PerturbMethod::kMask:
      break;
    case PerturbMethod::kMove: {
      std::vector<Vec2> avoid;
      for (const auto& v : scan.truth) avoid.push_back(v.center);
      for (const auto& d : detections) avoid.push_back(d.center);
      auto dest = choose_move_destination(scan.geom, strongest.center, radius, avoid, d_match + radius);
      if (!dest) return std::nullopt;
      spec.destination = dest;
      break;
    }
    case PerturbMethod::kSwap: {
      const Detection* partner = nullptr;
      for (const auto& d : detections) {
        if (d.vortex_class == strongest.vortex_class) continue;
        if (partner == nullptr || distance(d.center, strongest.center) < distance(partner->center, strongest.center)) {
          partner = &d;
        }
      }
      if (partner == nullptr) return std::nullopt;
      spec.second_center = partner->center;
      // Keep the two disks disjoint for closely spaced pairs.
      spec.radius = std::min(radius, 0.49 * distance(strongest.center, partner->center));
      break;
    }
  }
  try {
    spec.validate(scan.geom);
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
  return spec;
}

std::string format_report(const ExplainReport& report) {
  std::string out;
  char buf[256];
  auto line = [&](const char* key, const std::string& value) {
    out += key;
    out += '\t';
    out += value;
    out += '\n';
  };
  const PerturbationSpec& s = report.spec;
  line("method", std::string(method_name(s.method)));
  std::snprintf(buf, sizeof(buf), "%.3f", s.radius);
  line("radius_m", buf);
  line("center", fmt_point(s.target_center));
  if (s.destination) line("destination", fmt_point(*s.destination));
  if (s.second_center) line("second_center", fmt_point(*s.second_center));
  line("target_class", report.target_class ? std::string(class_name(*report.target_class)) : "none");
  if (s.method == PerturbMethod::kSwap) {
    line("second_class", report.second_class ? std::string(class_name(*report.second_class)) : "none");
  }
  for (const auto& r : report.regions) {
    std::snprintf(buf, sizeof(buf), "points=%zu before=%.4f/%.4f/%.4f after=%.4f/%.4f/%.4f", r.points, r.before[0],
                  r.before[1], r.before[2], r.after[0], r.after[1], r.after[2]);
    line(("region." + r.name).c_str(), buf);
  }
  auto det_list = [&](const std::vector<Detection>& ds) {
    std::string v;
    for (const auto& d : ds) {
      std::snprintf(buf, sizeof(buf), "%s%s%s:%zu", v.empty() ? "" : " ", std::string(class_name(d.vortex_class)).c_str(),
                    fmt_point(d.center).c_str(), d.support);
      v += buf;
    }
    return v.empty() ? std::string("none") : v;
  };
  line("detections_before", det_list(report.detections_before));
  line("detections_after", det_list(report.detections_after));
  for (const auto& c : report.changes) {
    std::string cls(class_name(c.vortex_class));
    switch (c.kind) {
      case DetectionChange::Kind::kKept:
        std::snprintf(buf, sizeof(buf), "kept %s %s -> %s shift=%.2f", cls.c_str(), fmt_point(c.before).c_str(),
                      fmt_point(c.after).c_str(), c.shift);
        break;
      case DetectionChange::Kind::kAppeared:
        std::snprintf(buf, sizeof(buf), "appeared %s %s", cls.c_str(), fmt_point(c.after).c_str());
        break;
      case DetectionChange::Kind::kVanished:
        std::snprintf(buf, sizeof(buf), "vanished %s %s", cls.c_str(), fmt_point(c.before).c_str());
        break;
    }
    line("change", buf);
  }
  auto flag = [](bool b) { return std::string(b ? "true" : "false"); };
  line("masked_core_suppressed", flag(report.masked_core_suppressed));
  line("surrounding_ring_retained", flag(report.surrounding_ring_retained));
  line("relocated_core_detected", flag(report.relocated_core_detected));
  line("swap_intermingled", flag(report.swap_intermingled));
  return out;
}

}  // namespace vortexseg
