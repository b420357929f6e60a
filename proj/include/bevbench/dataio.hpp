// Copyright 2026 The bevbench Authors
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

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bevbench/geom.hpp"
#include "bevbench/grid.hpp"
#include "bevbench/pseudolidar.hpp"
#include "bevbench/weaksup.hpp"

namespace bevbench::io {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// KITTI-style inputs

// One pose per line, 12 reals (row-major 3x4). Rotations within 1e-3 of
// orthonormal are projected onto the nearest rotation; others are kNonRigid.
std::vector<Pose> load_poses(const fs::path& path);
void write_poses(const fs::path& path, const std::vector<Pose>& poses);

// Packed little-endian float32 (x, y, z, remission) records.
PointCloud load_cloud(const fs::path& path);
void write_cloud(const fs::path& path, const PointCloud& cloud);

// One byte (PointClass value) per point.
std::vector<PointClass> load_point_labels(const fs::path& path);
void write_point_labels(const fs::path& path, const std::vector<PointClass>& labels);

// ---------------------------------------------------------------------------
// BEVG container

inline constexpr std::uint16_t kBevgVersion = 1;

enum class ElementType : std::uint8_t { kU8 = 0, kU16 = 1, kF32 = 2 };

namespace tag {
inline constexpr std::uint8_t kClass = 0x01;
inline constexpr std::uint8_t kLaneId = 0x02;
inline constexpr std::uint8_t kOcclusion = 0x03;
inline constexpr std::uint8_t kPredLaneId = 0x04;
inline constexpr std::uint8_t kProbability = 0x10;  // + class index, < 0x30
inline constexpr std::uint8_t kVoxelCount = 0x40;   // + channel, < 0x80
inline constexpr std::uint8_t kVoxelRemission = 0x80;  // + channel, < 0xC0
}  // namespace tag

using GridFile = std::variant<LabelGrid, ConfidenceGrid, VoxelVolume>;

std::vector<std::uint8_t> encode_grid(const GridFile& grid);
// Voxel files do not carry the vertical range; it comes from `voxel_hint`
// (channel count is taken from the file).
GridFile decode_grid(std::span<const std::uint8_t> bytes, const VoxelSpec& voxel_hint = {});

// Written to a temporary sibling and renamed into place.
void write_grid(const fs::path& path, const GridFile& grid);
GridFile read_grid(const fs::path& path, const VoxelSpec& voxel_hint = {});

LabelGrid read_label_grid(const fs::path& path);
ConfidenceGrid read_confidence_grid(const fs::path& path);
VoxelVolume read_voxel_volume(const fs::path& path, const VoxelSpec& hint = {});

std::uint32_t crc32(std::span<const std::uint8_t> bytes);

// ---------------------------------------------------------------------------
// Images

struct RawImage {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 8;
  std::vector<std::uint16_t> samples;  // interleaved
};

RawImage read_png(const fs::path& path);
void write_png(const fs::path& path, const RawImage& image);

// 8-bit single-channel image of PointClass values.
SegmentationImage load_segmentation(const fs::path& path);
// 16-bit single-channel PNG, meters = value / 256, 0 = invalid (KITTI depth).
DepthMap load_depth(const fs::path& path);
void write_depth(const fs::path& path, const DepthMap& depth);
ColorImage load_color(const fs::path& path);

using Rgb = std::array<std::uint8_t, 3>;
using Palette = std::map<SemanticClass, Rgb>;

Palette default_palette();

void export_png(const LabelGrid& grid, const fs::path& path, const Palette& palette);
// Grayscale rendering of one confidence channel.
void export_png(const ConfidenceGrid& grid, const fs::path& path, int channel = 0);

// ---------------------------------------------------------------------------
// Manifest

struct FrameRecord {
  double timestamp = 0.0;
  std::optional<std::string> cloud;
  std::optional<std::string> point_labels;
  std::optional<std::string> semantic;
  std::optional<std::string> depth;
  std::optional<std::string> rgb;
  std::optional<std::string> label;
  std::optional<std::string> prediction;
  std::optional<std::string> dynamic_prediction;
  std::optional<int> pose_index;
};

struct SequenceManifest {
  std::string sequence_id;
  GridSpec grid;
  std::optional<std::string> poses;
  std::optional<CameraIntrinsics> intrinsics;
  Pose cam_from_lidar;
  Palette palette = default_palette();
  std::vector<FrameRecord> frames;
  // Directory the relative paths resolve against.
  fs::path root;

  fs::path resolve(const std::string& relative) const { return root / relative; }
  void validate() const;
};

SequenceManifest load_manifest(const fs::path& path);
void write_manifest(const fs::path& path, const SequenceManifest& manifest);

// Writes bytes via a temporary file and rename.
void write_file_atomic(const fs::path& path, std::span<const std::uint8_t> bytes);
void write_text_atomic(const fs::path& path, const std::string& text);
std::vector<std::uint8_t> read_file(const fs::path& path);

}  // namespace bevbench::io
