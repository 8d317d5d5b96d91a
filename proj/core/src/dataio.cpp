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

#include "vortexseg/dataio.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>

#include "vortexseg/rng.hpp"

namespace vortexseg {

PointCloud sample_points(const LidarScan& scan, size_t n, uint64_t seed) {
  scan.validate();
  const size_t total = scan.geom.cell_count();
  if (n > total) {
    throw std::invalid_argument("sample_points: requested " + std::to_string(n) + " points from " +
                                std::to_string(total) + " cells");
  }
  std::vector<uint32_t> order(total);
  std::iota(order.begin(), order.end(), 0u);
  SplitMix64 rng = stream_rng(seed, Stream::kSampling);
  for (size_t i = 0; i < n; ++i) {
    size_t j = i + rng.below(total - i);
    std::swap(order[i], order[j]);
  }

  PointCloud cloud;
  cloud.geom = scan.geom;
  cloud.cell.assign(order.begin(), order.begin() + static_cast<ptrdiff_t>(n));
  cloud.phi.resize(n);
  cloud.range.resize(n);
  cloud.y.resize(n);
  cloud.z.resize(n);
  cloud.vr.resize(n);
  cloud.vr_norm.assign(n, 0.0f);
  cloud.label.assign(n, kBackground);
  for (size_t i = 0; i < n; ++i) {
    CellIndex c = scan.geom.cell_at(cloud.cell[i]);
    cloud.phi[i] = scan.geom.elevation(c.beam);
    cloud.range[i] = scan.geom.range(c.gate);
    Vec2 p = scan.geom.cell_position(c);
    cloud.y[i] = p.y;
    cloud.z[i] = p.z;
    cloud.vr[i] = scan.vr[cloud.cell[i]];
  }
  return cloud;
}

PointCloud label_points(PointCloud cloud, std::span<const VortexSpec> truth, double r_label) {
  for (const auto& v : truth) (void)vortex_class_from_id(static_cast<int>(v.vortex_class));
  const double r2 = r_label * r_label;
  for (size_t i = 0; i < cloud.size(); ++i) {
    Vec2 p = cloud.position(i);
    uint8_t best_label = kBackground;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& v : truth) {
      double d = (p - v.center).norm_sq();
      if (d > r2) continue;
      auto label = static_cast<uint8_t>(v.vortex_class);
      if (d < best_d || (d == best_d && label < best_label)) {
        best_d = d;
        best_label = label;
      }
    }
    cloud.label[i] = best_label;
  }
  return cloud;
}

PointCloud normalize_velocity(PointCloud cloud) {
  if (cloud.size() == 0) throw std::invalid_argument("normalize_velocity: empty cloud");
  auto [lo, hi] = std::minmax_element(cloud.vr.begin(), cloud.vr.end());
  const double vmin = *lo;
  const double vmax = *hi;
  cloud.vr_norm.resize(cloud.size());
  if (vmax == vmin) {
    std::fill(cloud.vr_norm.begin(), cloud.vr_norm.end(), 0.5f);
    return cloud;
  }
  for (size_t i = 0; i < cloud.size(); ++i) {
    double t = (cloud.vr[i] - vmin) / (vmax - vmin);
    cloud.vr_norm[i] = static_cast<float>(std::clamp(t, 0.0, 1.0));
  }
  return cloud;
}

// --- binary helpers ----------------------------------------------------------

namespace {

static_assert(std::numeric_limits<float>::is_iec559 && std::numeric_limits<double>::is_iec559);

class ByteWriter {
 public:
  void bytes(const void* p, size_t n) {
    auto* b = static_cast<const uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  template <typename T>
  void uint(T v) {
    for (size_t i = 0; i < sizeof(T); ++i) out_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }
  void u8(uint8_t v) { out_.push_back(v); }
  void f32(float v) { uint(std::bit_cast<uint32_t>(v)); }
  void f64(double v) { uint(std::bit_cast<uint64_t>(v)); }
  std::vector<uint8_t> take() { return std::move(out_); }

 private:
  std::vector<uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const uint8_t> in) : in_(in) {}

  void need(size_t n) const {
    if (in_.size() - pos_ < n) {
      throw FormatError(FormatError::Kind::kTruncated,
                        "truncated payload at byte " + std::to_string(pos_));
    }
  }
  std::span<const uint8_t> bytes(size_t n) {
    need(n);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  template <typename T>
  T uint() {
    auto s = bytes(sizeof(T));
    T v = 0;
    for (size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(s[i]) << (8 * i));
    return v;
  }
  uint8_t u8() { return uint<uint8_t>(); }
  float f32() { return std::bit_cast<float>(uint<uint32_t>()); }
  double f64() { return std::bit_cast<double>(uint<uint64_t>()); }
  size_t remaining() const { return in_.size() - pos_; }

 private:
  std::span<const uint8_t> in_;
  size_t pos_ = 0;
};

void expect_magic(ByteReader& r, const char (&magic)[5]) {
  if (r.remaining() < 4) {
    throw FormatError(FormatError::Kind::kTruncated, "file shorter than its magic");
  }
  auto m = r.bytes(4);
  if (std::memcmp(m.data(), magic, 4) != 0) {
    throw FormatError(FormatError::Kind::kBadMagic, std::string("bad magic, expected ") + magic);
  }
}

void expect_version(ByteReader& r, uint32_t expected) {
  uint32_t version = r.uint<uint32_t>();
  if (version != expected) {
    throw FormatError(FormatError::Kind::kVersionMismatch,
                      "unsupported format version " + std::to_string(version));
  }
}

}  // namespace

std::vector<uint8_t> encode_scan(const LidarScan& scan) {
  scan.validate();
  if (scan.truth.size() > 255) throw std::invalid_argument("encode_scan: too many truth vortices");
  ByteWriter w;
  w.bytes("WVLS", 4);
  w.uint<uint32_t>(kScanFormatVersion);
  w.uint<uint32_t>(scan.geom.n_beams);
  w.uint<uint32_t>(scan.geom.n_gates);
  w.f64(scan.geom.elevation_min);
  w.f64(scan.geom.elevation_max);
  w.f64(scan.geom.range_min);
  w.f64(scan.geom.range_max);
  for (float v : scan.vr) w.f32(v);
  w.u8(static_cast<uint8_t>(scan.truth.size()));
  for (const auto& v : scan.truth) {
    w.u8(static_cast<uint8_t>(v.vortex_class));
    w.f64(v.center.y);
    w.f64(v.center.z);
    w.f64(v.circulation);
    w.f64(v.core_radius);
  }
  w.uint<uint64_t>(scan.seed);
  return w.take();
}

LidarScan decode_scan(std::span<const uint8_t> bytes) {
  ByteReader r(bytes);
  expect_magic(r, "WVLS");
  expect_version(r, kScanFormatVersion);
  LidarScan scan;
  scan.geom.n_beams = r.uint<uint32_t>();
  scan.geom.n_gates = r.uint<uint32_t>();
  scan.geom.elevation_min = r.f64();
  scan.geom.elevation_max = r.f64();
  scan.geom.range_min = r.f64();
  scan.geom.range_max = r.f64();
  try {
    scan.geom.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(FormatError::Kind::kInvalid, e.what());
  }
  const size_t cells = scan.geom.cell_count();
  r.need(cells * 4);
  scan.vr.resize(cells);
  for (auto& v : scan.vr) v = r.f32();
  const size_t n_truth = r.u8();
  for (size_t i = 0; i < n_truth; ++i) {
    VortexSpec v;
    uint8_t cls = r.u8();
    if (cls != 1 && cls != 2) {
      throw FormatError(FormatError::Kind::kInvalid, "invalid vortex class " + std::to_string(cls));
    }
    v.vortex_class = static_cast<VortexClass>(cls);
    v.center.y = r.f64();
    v.center.z = r.f64();
    v.circulation = r.f64();
    v.core_radius = r.f64();
    scan.truth.push_back(v);
  }
  scan.seed = r.uint<uint64_t>();
  if (r.remaining() != 0) {
    throw FormatError(FormatError::Kind::kInvalid, "trailing bytes after scan payload");
  }
  return scan;
}

std::string_view arch_name(Arch arch) {
  switch (arch) {
    case Arch::kDgcnn:
      return "dgcnn";
    case Arch::kPointNet:
      return "pointnet";
  }
  return "unknown";
}

Arch arch_from_name(std::string_view name) {
  if (name == "dgcnn") return Arch::kDgcnn;
  if (name == "pointnet") return Arch::kPointNet;
  throw std::invalid_argument("unknown architecture '" + std::string(name) + "'");
}

size_t NamedTensor::element_count() const {
  size_t n = 1;
  for (uint32_t d : shape) n *= d;
  return n;
}

const NamedTensor* Checkpoint::find(std::string_view name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

void Checkpoint::validate() const {
  if (arch != Arch::kDgcnn && arch != Arch::kPointNet) {
    throw std::invalid_argument("checkpoint: unknown arch id " + std::to_string(static_cast<int>(arch)));
  }
  std::set<std::string_view> names;
  for (const auto& t : tensors) {
    if (t.name.empty() || t.name.size() > 0xFFFF) {
      throw std::invalid_argument("checkpoint: tensor name length out of range");
    }
    if (!names.insert(t.name).second) {
      throw std::invalid_argument("checkpoint: duplicate tensor name '" + t.name + "'");
    }
    if (t.shape.size() > 255) throw std::invalid_argument("checkpoint: too many dimensions");
    if (t.element_count() != t.data.size()) {
      throw std::invalid_argument("checkpoint: tensor '" + t.name + "' data does not match its shape");
    }
  }
}

std::vector<uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  ckpt.validate();
  ByteWriter w;
  w.bytes("WVCK", 4);
  w.uint<uint32_t>(kCheckpointFormatVersion);
  w.u8(static_cast<uint8_t>(ckpt.arch));
  w.uint<uint16_t>(ckpt.k);
  w.uint<uint16_t>(ckpt.n_classes);
  w.uint<uint32_t>(static_cast<uint32_t>(ckpt.tensors.size()));
  for (const auto& t : ckpt.tensors) {
    w.uint<uint16_t>(static_cast<uint16_t>(t.name.size()));
    w.bytes(t.name.data(), t.name.size());
    w.u8(static_cast<uint8_t>(t.shape.size()));
    for (uint32_t d : t.shape) w.uint<uint32_t>(d);
    for (float v : t.data) w.f32(v);
  }
  return w.take();
}

Checkpoint decode_checkpoint(std::span<const uint8_t> bytes) {
  ByteReader r(bytes);
  expect_magic(r, "WVCK");
  expect_version(r, kCheckpointFormatVersion);
  Checkpoint ckpt;
  uint8_t arch = r.u8();
  if (arch != 1 && arch != 2) {
    throw FormatError(FormatError::Kind::kInvalid, "unknown arch id " + std::to_string(arch));
  }
  ckpt.arch = static_cast<Arch>(arch);
  ckpt.k = r.uint<uint16_t>();
  ckpt.n_classes = r.uint<uint16_t>();
  const uint32_t n_tensors = r.uint<uint32_t>();
  std::set<std::string> names;
  for (uint32_t i = 0; i < n_tensors; ++i) {
    NamedTensor t;
    const uint16_t len = r.uint<uint16_t>();
    auto name = r.bytes(len);
    t.name.assign(name.begin(), name.end());
    if (!names.insert(t.name).second) {
      throw FormatError(FormatError::Kind::kInvalid, "duplicate tensor name '" + t.name + "'");
    }
    const uint8_t ndim = r.u8();
    for (uint8_t d = 0; d < ndim; ++d) t.shape.push_back(r.uint<uint32_t>());
    const size_t count = t.element_count();
    r.need(count * 4);
    t.data.resize(count);
    for (auto& v : t.data) v = r.f32();
    ckpt.tensors.push_back(std::move(t));
  }
  if (r.remaining() != 0) {
    throw FormatError(FormatError::Kind::kInvalid, "trailing bytes after checkpoint payload");
  }
  return ckpt;
}

std::vector<uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(FormatError::Kind::kIo, "cannot open " + path.string());
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(FormatError::Kind::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError(FormatError::Kind::kIo, "write failed for " + path.string());
}

void write_scan(const LidarScan& scan, const std::filesystem::path& path) {
  write_file_bytes(path, encode_scan(scan));
}

LidarScan read_scan(const std::filesystem::path& path) { return decode_scan(read_file_bytes(path)); }

void write_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  write_file_bytes(path, encode_checkpoint(ckpt));
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file_bytes(path));
}

void write_manifest(const std::filesystem::path& dir, const std::vector<std::string>& files) {
  std::string text;
  for (const auto& f : files) {
    text += f;
    text += '\n';
  }
  write_file_bytes(dir / kManifestName,
                   std::span(reinterpret_cast<const uint8_t*>(text.data()), text.size()));
}

std::vector<std::string> read_manifest(const std::filesystem::path& dir) {
  auto bytes = read_file_bytes(dir / kManifestName);
  std::vector<std::string> files;
  std::string line;
  for (uint8_t b : bytes) {
    if (b == '\n') {
      if (!line.empty()) files.push_back(line);
      line.clear();
    } else {
      line.push_back(static_cast<char>(b));
    }
  }
  if (!line.empty()) files.push_back(line);
  return files;
}

}  // namespace vortexseg
