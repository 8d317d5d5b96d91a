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

#include "vortexseg/evalx.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace vortexseg {

Matching match(std::span<const VortexSpec> truth, std::span<const Detection> detections, double d_match) {
  // Detection ties are broken by canonical rank (support descending, then
  // center, then class) so the result does not depend on input order.
  std::vector<size_t> order(detections.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    const Detection& x = detections[a];
    const Detection& y = detections[b];
    return std::tuple(-static_cast<double>(x.support), x.center.y, x.center.z, x.vortex_class, a) <
           std::tuple(-static_cast<double>(y.support), y.center.y, y.center.z, y.vortex_class, b);
  });
  std::vector<size_t> rank(detections.size());
  for (size_t r = 0; r < order.size(); ++r) rank[order[r]] = r;

  std::vector<MatchPair> candidates;
  for (size_t t = 0; t < truth.size(); ++t) {
    for (size_t d = 0; d < detections.size(); ++d) {
      if (truth[t].vortex_class != detections[d].vortex_class) continue;
      double dist = distance(truth[t].center, detections[d].center);
      if (dist <= d_match) candidates.push_back({t, d, dist});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [&](const MatchPair& a, const MatchPair& b) {
    return std::tuple(a.distance, a.truth, rank[a.detection]) < std::tuple(b.distance, b.truth, rank[b.detection]);
  });

  Matching out;
  std::vector<bool> truth_used(truth.size(), false);
  std::vector<bool> det_used(detections.size(), false);
  for (const auto& c : candidates) {
    if (truth_used[c.truth] || det_used[c.detection]) continue;
    truth_used[c.truth] = true;
    det_used[c.detection] = true;
    out.pairs.push_back(c);
  }
  for (size_t t = 0; t < truth.size(); ++t) {
    if (!truth_used[t]) out.unmatched_truth.push_back(t);
  }
  for (size_t d = 0; d < detections.size(); ++d) {
    if (!det_used[d]) out.unmatched_detection.push_back(d);
  }
  return out;
}

ScanOutcome evaluate_scan(const std::string& scan_id, std::span<const VortexSpec> truth,
                          std::span<const Detection> detections, double d_match) {
  Matching m = match(truth, detections, d_match);
  ScanOutcome out;
  out.scan_id = scan_id;
  out.n_detected = detections.size();
  out.false_positives = m.unmatched_detection.size();
  out.records.resize(truth.size());
  for (size_t t = 0; t < truth.size(); ++t) {
    out.records[t] = {scan_id, truth[t].vortex_class, truth[t].center, MatchStatus::kFalseNegative,
                      truth[t].center.norm()};
  }
  for (const auto& p : m.pairs) {
    out.records[p.truth].status = MatchStatus::kTruePositive;
    out.records[p.truth].error_m = p.distance;
  }
  return out;
}

EvalReport metrics(std::vector<ScanOutcome> scans) {
  EvalReport r;
  double err_all = 0.0;
  double err_tp = 0.0;
  for (const auto& s : scans) {
    r.n_detected += s.n_detected;
    r.false_positives += s.false_positives;
    for (const auto& rec : s.records) {
      ++r.n_truth;
      err_all += rec.error_m;
      if (rec.status == MatchStatus::kTruePositive) {
        ++r.true_positives;
        err_tp += rec.error_m;
      } else {
        ++r.false_negatives;
      }
    }
  }
  if (r.n_truth == 0) throw std::invalid_argument("metrics: no ground-truth vortices, recall is undefined");
  r.recall = static_cast<double>(r.true_positives) / static_cast<double>(r.n_truth);
  r.mean_error = err_all / static_cast<double>(r.n_truth);
  r.mean_error_no_fn = r.true_positives > 0 ? err_tp / static_cast<double>(r.true_positives) : 0.0;
  r.scans = std::move(scans);
  return r;
}

std::string format_table(const EvalReport& report, const std::string& label) {
  char buf[512];
  std::string out;
  std::snprintf(buf, sizeof(buf), "%-32s %10s %10s %14s\n", "Method", "Recall (%)", "ME (m)", "ME w/o FN (m)");
  out += buf;
  std::snprintf(buf, sizeof(buf), "%-32s %10.2f %10.2f %14.2f\n", label.c_str(), 100.0 * report.recall,
                report.mean_error, report.mean_error_no_fn);
  out += buf;
  std::snprintf(buf, sizeof(buf), "truth=%zu detected=%zu TP=%zu FN=%zu FP=%zu\n", report.n_truth,
                report.n_detected, report.true_positives, report.false_negatives, report.false_positives);
  out += buf;
  return out;
}

std::string format_records(const EvalReport& report) {
  std::string out = "scan_id\tclass\ttruth_y\ttruth_z\tstatus\terror_m\n";
  char buf[256];
  for (const auto& s : report.scans) {
    for (const auto& rec : s.records) {
      std::snprintf(buf, sizeof(buf), "%s\t%s\t%.3f\t%.3f\t%s\t%.3f\n", rec.scan_id.c_str(),
                    std::string(class_name(rec.vortex_class)).c_str(), rec.truth_center.y, rec.truth_center.z,
                    rec.status == MatchStatus::kTruePositive ? "TP" : "FN", rec.error_m);
      out += buf;
    }
  }
  return out;
}

}  // namespace vortexseg
