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

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "vortexseg/cluster.hpp"
#include "vortexseg/scan.hpp"

namespace vortexseg {

inline constexpr double kDefaultMatchDistance = 50.0;  // m

struct MatchPair {
  size_t truth = 0;
  size_t detection = 0;
  double distance = 0.0;

  friend bool operator==(const MatchPair&, const MatchPair&) = default;
};

struct Matching {
  std::vector<MatchPair> pairs;             // in acceptance order
  std::vector<size_t> unmatched_truth;      // false negatives, ascending
  std::vector<size_t> unmatched_detection;  // false positives, ascending
};

// Greedy same-class matching: candidate pairs within d_match are accepted in
// ascending distance order (ties by truth index, then by detection rank in
// the canonical order: support descending, then center, then class), each
// truth and detection at most once. Pairs report input indices.
Matching match(std::span<const VortexSpec> truth, std::span<const Detection> detections,
               double d_match = kDefaultMatchDistance);

enum class MatchStatus {
  kTruePositive,
  kFalseNegative,
};

// One line per ground-truth vortex.
struct TruthRecord {
  std::string scan_id;
  VortexClass vortex_class = VortexClass::kPort;
  Vec2 truth_center;
  MatchStatus status = MatchStatus::kFalseNegative;
  double error_m = 0.0;  // match distance, or distance from the origin for FN
};

struct ScanOutcome {
  std::string scan_id;
  std::vector<TruthRecord> records;
  size_t n_detected = 0;
  size_t false_positives = 0;
};

// Matches one scan and turns the result into per-truth records.
ScanOutcome evaluate_scan(const std::string& scan_id, std::span<const VortexSpec> truth,
                          std::span<const Detection> detections, double d_match = kDefaultMatchDistance);

struct EvalReport {
  size_t n_truth = 0;
  size_t n_detected = 0;
  size_t true_positives = 0;
  size_t false_negatives = 0;
  size_t false_positives = 0;
  double recall = 0.0;
  double mean_error = 0.0;        // FN contribute their distance from the origin
  double mean_error_no_fn = 0.0;  // matched distances only; 0 when nothing matched
  std::vector<ScanOutcome> scans;
};

// Aggregates scans in order. Throws std::invalid_argument when there is no
// ground truth at all (recall undefined).
EvalReport metrics(std::vector<ScanOutcome> scans);

// Human-readable summary: recall in percent and errors in meters, two decimals.
std::string format_table(const EvalReport& report, const std::string& label);

// "scan_id\tclass\ttruth_y\ttruth_z\tstatus\terror_m" lines, with a header.
std::string format_records(const EvalReport& report);

}  // namespace vortexseg
