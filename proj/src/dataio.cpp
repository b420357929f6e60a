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

#include "bevbench/dataio.hpp"

#include <png.h>
#include <zlib.h>

#include <Eigen/SVD>
#include <bit>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "bevbench/error.hpp"

namespace bevbench::io {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Files

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

void write_file_atomic(const fs::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::kIoError, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIoError, "cannot rename into " + path.string());
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

// ---------------------------------------------------------------------------
// Little-endian helpers

namespace {

class ByteWriter {
 public:
  template <typename T>
  void put(T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::array<std::uint8_t, sizeof(T)> raw;
    std::memcpy(raw.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
    bytes_.insert(bytes_.end(), raw.begin(), raw.end());
  }
  void put_bytes(std::span<const std::uint8_t> b) { bytes_.insert(bytes_.end(), b.begin(), b.end()); }
  std::vector<std::uint8_t>& bytes() { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > bytes_.size()) {
      throw Error(ErrorCode::kTruncatedFile, "unexpected end of data at byte " + std::to_string(pos_));
    }
    std::array<std::uint8_t, sizeof(T)> raw;
    std::memcpy(raw.data(), bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
    pos_ += sizeof(T);
    T v;
    std::memcpy(&v, raw.data(), sizeof(T));
    return v;
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

// ---------------------------------------------------------------------------
// Poses

std::vector<Pose> load_poses(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::vector<Pose> poses;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    std::array<double, 12> v{};
    std::string token;
    int n = 0;
    while (fields >> token) {
      if (n >= 12) {
        throw Error(ErrorCode::kParseError, path.string() + ":" + std::to_string(line_no) + ":" +
                                                std::to_string(n + 1) + ": more than 12 fields");
      }
      char* end = nullptr;
      const double x = std::strtod(token.c_str(), &end);
      if (end == token.c_str() || *end != '\0' || !std::isfinite(x)) {
        throw Error(ErrorCode::kParseError, path.string() + ":" + std::to_string(line_no) + ":" +
                                                std::to_string(n + 1) + ": bad number '" + token +
                                                "'");
      }
      v[static_cast<std::size_t>(n++)] = x;
    }
    if (n != 12) {
      throw Error(ErrorCode::kParseError, path.string() + ":" + std::to_string(line_no) + ":" +
                                              std::to_string(n + 1) + ": expected 12 fields, got " +
                                              std::to_string(n));
    }
    Pose p;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) p.rotation(r, c) = v[static_cast<std::size_t>(4 * r + c)];
      p.translation(r) = v[static_cast<std::size_t>(4 * r + 3)];
    }
    if (!p.is_rigid(1e-3)) {
      throw Error(ErrorCode::kNonRigid,
                  path.string() + ":" + std::to_string(line_no) + ": rotation is not rigid");
    }
    if (!p.is_rigid(1e-12)) {
      Eigen::JacobiSVD<Eigen::Matrix3d> svd(p.rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
      p.rotation = svd.matrixU() * svd.matrixV().transpose();
    }
    poses.push_back(p);
  }
  return poses;
}

void write_poses(const fs::path& path, const std::vector<Pose>& poses) {
  std::string text;
  char buf[64];
  for (const auto& p : poses) {
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 4; ++c) {
        const double x = c < 3 ? p.rotation(r, c) : p.translation(r);
        std::snprintf(buf, sizeof(buf), "%.17g", x);
        if (r != 0 || c != 0) text += ' ';
        text += buf;
      }
    }
    text += '\n';
  }
  write_text_atomic(path, text);
}

// ---------------------------------------------------------------------------
// Clouds and point labels

PointCloud load_cloud(const fs::path& path) {
  const auto bytes = read_file(path);
  if (bytes.size() % 16 != 0) {
    throw Error(ErrorCode::kTruncatedFile, path.string() + ": size " + std::to_string(bytes.size()) +
                                               " is not a multiple of 16 bytes");
  }
  ByteReader r(bytes);
  PointCloud cloud;
  cloud.frame = CloudFrame::kSensor;
  cloud.points.resize(bytes.size() / 16);
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const float x = r.get<float>();
    const float y = r.get<float>();
    const float z = r.get<float>();
    const float rem = r.get<float>();
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z) || !std::isfinite(rem)) {
      throw Error(ErrorCode::kNonFiniteValue, path.string() + ": point " + std::to_string(i));
    }
    cloud.points[i].position = {x, y, z};
    cloud.points[i].remission = rem;
  }
  return cloud;
}

void write_cloud(const fs::path& path, const PointCloud& cloud) {
  ByteWriter w;
  for (const auto& p : cloud.points) {
    w.put(static_cast<float>(p.position.x()));
    w.put(static_cast<float>(p.position.y()));
    w.put(static_cast<float>(p.position.z()));
    w.put(static_cast<float>(p.remission));
  }
  write_file_atomic(path, w.bytes());
}

std::vector<PointClass> load_point_labels(const fs::path& path) {
  const auto bytes = read_file(path);
  std::vector<PointClass> out(bytes.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) out[i] = static_cast<PointClass>(bytes[i]);
  return out;
}

void write_point_labels(const fs::path& path, const std::vector<PointClass>& labels) {
  std::vector<std::uint8_t> bytes(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) bytes[i] = static_cast<std::uint8_t>(labels[i]);
  write_file_atomic(path, bytes);
}

// ---------------------------------------------------------------------------
// BEVG

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  std::size_t off = 0;
  while (off < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - off, 1u << 30));
    crc = ::crc32(crc, bytes.data() + off, chunk);
    off += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

namespace {

struct Channel {
  std::uint8_t tag;
  ElementType type;
};

void put_header(ByteWriter& w, const GridSpec& spec, const std::vector<Channel>& channels) {
  for (char c : {'B', 'E', 'V', 'G'}) w.put(static_cast<std::uint8_t>(c));
  w.put(kBevgVersion);
  w.put(static_cast<std::uint32_t>(spec.rows));
  w.put(static_cast<std::uint32_t>(spec.cols));
  w.put(static_cast<float>(spec.resolution));
  w.put(static_cast<std::uint16_t>(channels.size()));
  for (const auto& c : channels) {
    w.put(c.tag);
    w.put(static_cast<std::uint8_t>(c.type));
  }
}

}  // namespace

std::vector<std::uint8_t> encode_grid(const GridFile& file) {
  ByteWriter w;
  if (const auto* g = std::get_if<LabelGrid>(&file)) {
    put_header(w, g->spec(), {{tag::kClass, ElementType::kU8},
                              {tag::kLaneId, ElementType::kU16},
                              {tag::kOcclusion, ElementType::kU8}});
    for (auto c : g->classes()) w.put(static_cast<std::uint8_t>(c));
    for (auto id : g->lane_ids()) w.put(id);
    for (auto o : g->occlusion()) w.put(o);
  } else if (const auto* g = std::get_if<ConfidenceGrid>(&file)) {
    g->validate();
    if (g->num_classes > 0x20) throw Error(ErrorCode::kInvalidSpec, "too many classes for BEVG");
    std::vector<Channel> ch;
    for (int k = 0; k < g->num_classes; ++k) {
      ch.push_back({static_cast<std::uint8_t>(tag::kProbability + k), ElementType::kF32});
    }
    if (g->lane_ids) ch.push_back({tag::kPredLaneId, ElementType::kU16});
    put_header(w, g->spec, ch);
    for (float p : g->probs) w.put(p);
    if (g->lane_ids) {
      for (auto id : *g->lane_ids) w.put(id);
    }
  } else {
    const auto& v = std::get<VoxelVolume>(file);
    if (v.spec.channels > 0x40) throw Error(ErrorCode::kInvalidSpec, "too many voxel channels");
    std::vector<Channel> ch;
    for (int c = 0; c < v.spec.channels; ++c) {
      ch.push_back({static_cast<std::uint8_t>(tag::kVoxelCount + c), ElementType::kF32});
    }
    for (int c = 0; c < v.spec.channels; ++c) {
      ch.push_back({static_cast<std::uint8_t>(tag::kVoxelRemission + c), ElementType::kF32});
    }
    put_header(w, v.spec.bev, ch);
    for (auto n : v.counts) {
      if (n > (1u << 24)) throw Error(ErrorCode::kInvalidSpec, "voxel count exceeds f32 exact range");
      w.put(static_cast<float>(n));
    }
    for (float r : v.mean_remission) w.put(r);
  }
  w.put(crc32(w.bytes()));
  return std::move(w.bytes());
}

GridFile decode_grid(std::span<const std::uint8_t> bytes, const VoxelSpec& voxel_hint) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), "BEVG", 4) != 0) {
    throw Error(ErrorCode::kBadMagic, "not a BEVG file");
  }
  if (bytes.size() < 4 + 2 + 4 + 4 + 4 + 2 + 4) {
    throw Error(ErrorCode::kTruncatedFile, "BEVG header truncated");
  }
  ByteReader r(bytes.subspan(4));
  const auto version = r.get<std::uint16_t>();
  if (version != kBevgVersion) {
    throw Error(ErrorCode::kVersionUnsupported, "BEVG version " + std::to_string(version));
  }
  const std::uint32_t stored_crc = [&] {
    ByteReader tail(bytes.subspan(bytes.size() - 4));
    return tail.get<std::uint32_t>();
  }();
  if (crc32(bytes.first(bytes.size() - 4)) != stored_crc) {
    throw Error(ErrorCode::kChecksumMismatch, "BEVG checksum mismatch");
  }
  GridSpec spec;
  spec.rows = static_cast<int>(r.get<std::uint32_t>());
  spec.cols = static_cast<int>(r.get<std::uint32_t>());
  spec.resolution = r.get<float>();
  spec.validate();
  const auto n_channels = r.get<std::uint16_t>();
  std::vector<Channel> channels(n_channels);
  for (auto& c : channels) {
    c.tag = r.get<std::uint8_t>();
    const auto t = r.get<std::uint8_t>();
    if (t > 2) throw Error(ErrorCode::kParseError, "unknown element type " + std::to_string(t));
    c.type = static_cast<ElementType>(t);
  }
  const std::size_t cells = spec.size();
  std::size_t payload = 0;
  for (const auto& c : channels) {
    payload += cells * (c.type == ElementType::kU8 ? 1 : c.type == ElementType::kU16 ? 2 : 4);
  }
  if (r.remaining() != payload + 4) {
    throw Error(ErrorCode::kTruncatedFile, "BEVG payload size does not match header");
  }
  auto expect = [&](std::size_t i, std::uint8_t t, ElementType type) {
    if (channels[i].tag != t || channels[i].type != type) {
      throw Error(ErrorCode::kParseError, "unexpected channel descriptor " + std::to_string(i));
    }
  };
  if (n_channels == 0) throw Error(ErrorCode::kParseError, "BEVG file has no channels");
  const std::uint8_t first = channels.front().tag;

  if (first == tag::kClass) {
    if (n_channels != 3) throw Error(ErrorCode::kParseError, "label grid needs 3 channels");
    expect(0, tag::kClass, ElementType::kU8);
    expect(1, tag::kLaneId, ElementType::kU16);
    expect(2, tag::kOcclusion, ElementType::kU8);
    std::vector<SemanticClass> classes(cells);
    std::vector<std::uint16_t> ids(cells);
    std::vector<std::uint8_t> occ(cells);
    for (auto& c : classes) {
      const auto v = r.get<std::uint8_t>();
      if (v >= kNumSemanticClasses) throw Error(ErrorCode::kParseError, "unknown class value");
      c = static_cast<SemanticClass>(v);
    }
    for (auto& id : ids) id = r.get<std::uint16_t>();
    for (auto& o : occ) o = r.get<std::uint8_t>();
    return LabelGrid::from_layers(spec, std::move(classes), std::move(ids), std::move(occ));
  }
  if (first >= tag::kProbability && first < tag::kProbability + 0x20) {
    int k = 0;
    while (k < n_channels && channels[static_cast<std::size_t>(k)].tag == tag::kProbability + k) {
      expect(static_cast<std::size_t>(k), static_cast<std::uint8_t>(tag::kProbability + k),
             ElementType::kF32);
      ++k;
    }
    const bool has_ids = k + 1 == n_channels;
    if (has_ids) expect(static_cast<std::size_t>(k), tag::kPredLaneId, ElementType::kU16);
    if (!has_ids && k != n_channels) throw Error(ErrorCode::kParseError, "bad confidence layout");
    ConfidenceGrid g(spec, k);
    for (auto& p : g.probs) p = r.get<float>();
    if (has_ids) {
      g.lane_ids.emplace(cells);
      for (auto& id : *g.lane_ids) id = r.get<std::uint16_t>();
    }
    g.validate();
    return g;
  }
  if (first == tag::kVoxelCount) {
    if (n_channels % 2 != 0) throw Error(ErrorCode::kParseError, "voxel file needs paired channels");
    const int depth = n_channels / 2;
    for (int c = 0; c < depth; ++c) {
      expect(static_cast<std::size_t>(c), static_cast<std::uint8_t>(tag::kVoxelCount + c),
             ElementType::kF32);
      expect(static_cast<std::size_t>(depth + c),
             static_cast<std::uint8_t>(tag::kVoxelRemission + c), ElementType::kF32);
    }
    VoxelSpec vs = voxel_hint;
    vs.bev = spec;
    vs.channels = depth;
    VoxelVolume v(vs);
    for (auto& n : v.counts) {
      const float f = r.get<float>();
      if (!(f >= 0.0f) || f != std::floor(f)) throw Error(ErrorCode::kParseError, "bad voxel count");
      n = static_cast<std::uint32_t>(f);
    }
    for (auto& m : v.mean_remission) m = r.get<float>();
    return v;
  }
  throw Error(ErrorCode::kParseError, "unknown channel tag " + std::to_string(first));
}

void write_grid(const fs::path& path, const GridFile& grid) {
  write_file_atomic(path, encode_grid(grid));
}

GridFile read_grid(const fs::path& path, const VoxelSpec& voxel_hint) {
  const auto bytes = read_file(path);
  try {
    return decode_grid(bytes, voxel_hint);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

LabelGrid read_label_grid(const fs::path& path) {
  auto g = read_grid(path);
  if (auto* p = std::get_if<LabelGrid>(&g)) return std::move(*p);
  throw Error(ErrorCode::kParseError, path.string() + " is not a label grid");
}

ConfidenceGrid read_confidence_grid(const fs::path& path) {
  auto g = read_grid(path);
  if (auto* p = std::get_if<ConfidenceGrid>(&g)) return std::move(*p);
  throw Error(ErrorCode::kParseError, path.string() + " is not a confidence grid");
}

VoxelVolume read_voxel_volume(const fs::path& path, const VoxelSpec& hint) {
  auto g = read_grid(path, hint);
  if (auto* p = std::get_if<VoxelVolume>(&g)) return std::move(*p);
  throw Error(ErrorCode::kParseError, path.string() + " is not a voxel volume");
}

// ---------------------------------------------------------------------------
// PNG

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f != nullptr) std::fclose(f);
  }
};

[[noreturn]] void png_fail(const fs::path& path, const char* what) {
  throw Error(ErrorCode::kIoError, path.string() + ": " + what);
}

}  // namespace

RawImage read_png(const fs::path& path) {
  std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "rb"));
  if (!fp) png_fail(path, "cannot open");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png != nullptr ? png_create_info_struct(png) : nullptr;
  if (png == nullptr || info == nullptr) {
    png_destroy_read_struct(&png, &info, nullptr);
    png_fail(path, "libpng init failed");
  }
  RawImage img;
  std::vector<png_bytep> rows;
  std::vector<std::uint8_t> buffer;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    png_fail(path, "corrupt PNG");
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if ((color & PNG_COLOR_MASK_ALPHA) != 0) png_set_strip_alpha(png);
  if (depth == 16 && std::endian::native == std::endian::little) png_set_swap(png);
  png_read_update_info(png, info);
  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  img.channels = png_get_channels(png, info);
  img.bit_depth = png_get_bit_depth(png, info);
  const std::size_t stride = png_get_rowbytes(png, info);
  buffer.resize(stride * static_cast<std::size_t>(img.height));
  rows.resize(static_cast<std::size_t>(img.height));
  for (int y = 0; y < img.height; ++y) rows[static_cast<std::size_t>(y)] = buffer.data() + stride * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const std::size_t n = static_cast<std::size_t>(img.width) * img.height * img.channels;
  img.samples.resize(n);
  if (img.bit_depth == 16) {
    for (std::size_t i = 0; i < n; ++i) {
      std::uint16_t v;
      std::memcpy(&v, buffer.data() + 2 * i, 2);
      img.samples[i] = v;
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) img.samples[i] = buffer[i];
  }
  return img;
}

void write_png(const fs::path& path, const RawImage& img) {
  if (img.channels != 1 && img.channels != 3) png_fail(path, "only gray or RGB output");
  if (img.bit_depth != 8 && img.bit_depth != 16) png_fail(path, "bit depth must be 8 or 16");
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(tmp.c_str(), "wb"));
    if (!fp) png_fail(tmp, "cannot open for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png != nullptr ? png_create_info_struct(png) : nullptr;
    if (png == nullptr || info == nullptr) {
      png_destroy_write_struct(&png, &info);
      png_fail(path, "libpng init failed");
    }
    const int bytes_per = img.bit_depth / 8;
    const std::size_t stride = static_cast<std::size_t>(img.width) * img.channels * bytes_per;
    std::vector<std::uint8_t> buffer(stride * static_cast<std::size_t>(img.height));
    for (std::size_t i = 0; i < img.samples.size(); ++i) {
      if (bytes_per == 1) {
        buffer[i] = static_cast<std::uint8_t>(img.samples[i]);
      } else {
        buffer[2 * i] = static_cast<std::uint8_t>(img.samples[i] >> 8);  // PNG is big-endian
        buffer[2 * i + 1] = static_cast<std::uint8_t>(img.samples[i] & 0xff);
      }
    }
    std::vector<png_bytep> rows(static_cast<std::size_t>(img.height));
    for (int y = 0; y < img.height; ++y) rows[static_cast<std::size_t>(y)] = buffer.data() + stride * y;
    if (setjmp(png_jmpbuf(png))) {
      png_destroy_write_struct(&png, &info);
      png_fail(path, "PNG encoding failed");
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
                 static_cast<png_uint_32>(img.height), img.bit_depth,
                 img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_compression_level(png, 6);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) png_fail(path, "cannot rename into place");
}

SegmentationImage load_segmentation(const fs::path& path) {
  const RawImage img = read_png(path);
  if (img.channels != 1 || img.bit_depth != 8) {
    throw Error(ErrorCode::kParseError, path.string() + ": segmentation must be 8-bit gray");
  }
  SegmentationImage seg{img.width, img.height, {}};
  seg.classes.reserve(img.samples.size());
  for (auto s : img.samples) seg.classes.push_back(static_cast<PointClass>(s));
  return seg;
}

DepthMap load_depth(const fs::path& path) {
  const RawImage img = read_png(path);
  if (img.channels != 1 || img.bit_depth != 16) {
    throw Error(ErrorCode::kParseError, path.string() + ": depth must be 16-bit gray");
  }
  DepthMap d{img.width, img.height, {}};
  d.depth.reserve(img.samples.size());
  for (auto s : img.samples) d.depth.push_back(static_cast<float>(s) / 256.0f);
  return d;
}

void write_depth(const fs::path& path, const DepthMap& depth) {
  RawImage img{depth.width, depth.height, 1, 16, {}};
  img.samples.reserve(depth.depth.size());
  for (float m : depth.depth) {
    const double v = m > 0.0f && std::isfinite(m) ? std::round(m * 256.0) : 0.0;
    img.samples.push_back(static_cast<std::uint16_t>(std::clamp(v, 0.0, 65535.0)));
  }
  write_png(path, img);
}

ColorImage load_color(const fs::path& path) {
  const RawImage img = read_png(path);
  if (img.channels != 3) throw Error(ErrorCode::kParseError, path.string() + ": expected RGB");
  return ColorImage{img.width, img.height, img.bit_depth == 16 ? 65535 : 255, img.samples};
}

Palette default_palette() {
  return {{SemanticClass::kFree, {0, 0, 0}},          {SemanticClass::kRoad, {128, 64, 128}},
          {SemanticClass::kSidewalk, {244, 35, 232}}, {SemanticClass::kCrosswalk, {255, 255, 255}},
          {SemanticClass::kOtherRoad, {255, 165, 0}}, {SemanticClass::kVehicle, {128, 128, 128}},
          {SemanticClass::kLane, {0, 0, 255}}};
}

void export_png(const LabelGrid& grid, const fs::path& path, const Palette& palette) {
  const GridSpec& spec = grid.spec();
  RawImage img{spec.cols, spec.rows, 3, 8, {}};
  img.samples.reserve(spec.size() * 3);
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const auto cls = grid.classes()[i];
    Rgb color{0, 0, 0};
    if (const auto it = palette.find(cls); it != palette.end()) color = it->second;
    // Lanes other than the ego lane are tinted by id so instances stay distinct.
    if (cls == SemanticClass::kLane && grid.lane_ids()[i] > 1) {
      const auto id = grid.lane_ids()[i];
      color = {static_cast<std::uint8_t>((37 * id) % 200 + 40),
               static_cast<std::uint8_t>((91 * id) % 200 + 40), color[2]};
    }
    img.samples.insert(img.samples.end(), color.begin(), color.end());
  }
  write_png(path, img);
}

void export_png(const ConfidenceGrid& grid, const fs::path& path, int channel) {
  if (channel < 0 || channel >= grid.num_classes) {
    throw Error(ErrorCode::kInvalidParams, "channel outside confidence grid");
  }
  RawImage img{grid.spec.cols, grid.spec.rows, 1, 8, {}};
  for (float p : grid.channel(channel)) {
    img.samples.push_back(static_cast<std::uint16_t>(std::lround(std::clamp(p, 0.0f, 1.0f) * 255.0f)));
  }
  write_png(path, img);
}

// ---------------------------------------------------------------------------
// Manifest

namespace {

std::optional<std::string> opt_string(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::string>();
}

SemanticClass class_from_name(const std::string& name) {
  for (int c = 0; c < kNumSemanticClasses; ++c) {
    if (name == class_name(static_cast<SemanticClass>(c))) return static_cast<SemanticClass>(c);
  }
  throw Error(ErrorCode::kParseError, "unknown class name '" + name + "'");
}

json pose_json(const Pose& p) {
  json a = json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) a.push_back(c < 3 ? p.rotation(r, c) : p.translation(r));
  }
  return a;
}

}  // namespace

void SequenceManifest::validate() const {
  grid.validate();
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (!(frames[i].timestamp > frames[i - 1].timestamp)) {
      throw Error(ErrorCode::kParseError,
                  "frame timestamps must increase strictly (frame " + std::to_string(i) + ")");
    }
  }
  if (intrinsics) intrinsics->validate();
}

SequenceManifest load_manifest(const fs::path& path) {
  const auto bytes = read_file(path);
  json j;
  try {
    j = json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
  SequenceManifest m;
  m.root = path.parent_path();
  try {
    m.sequence_id = j.value("sequence_id", std::string());
    if (j.contains("grid")) {
      const auto& g = j.at("grid");
      m.grid.rows = g.value("rows", m.grid.rows);
      m.grid.cols = g.value("cols", m.grid.cols);
      m.grid.resolution = g.value("resolution", m.grid.resolution);
    }
    m.poses = opt_string(j, "poses");
    if (j.contains("intrinsics")) {
      const auto& k = j.at("intrinsics");
      m.intrinsics = CameraIntrinsics{k.at("fx").get<double>(), k.at("fy").get<double>(),
                                      k.at("cx").get<double>(), k.at("cy").get<double>(),
                                      k.at("width").get<int>(),  k.at("height").get<int>()};
    }
    if (j.contains("cam_from_lidar")) {
      const auto v = j.at("cam_from_lidar").get<std::vector<double>>();
      if (v.size() != 12) throw Error(ErrorCode::kParseError, "cam_from_lidar needs 12 numbers");
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) m.cam_from_lidar.rotation(r, c) = v[static_cast<std::size_t>(4 * r + c)];
        m.cam_from_lidar.translation(r) = v[static_cast<std::size_t>(4 * r + 3)];
      }
      if (!m.cam_from_lidar.is_rigid(1e-6)) {
        throw Error(ErrorCode::kNonRigid, "cam_from_lidar is not a rigid transform");
      }
    }
    if (j.contains("palette")) {
      for (const auto& [name, rgb] : j.at("palette").items()) {
        const auto v = rgb.get<std::vector<int>>();
        if (v.size() != 3) throw Error(ErrorCode::kParseError, "palette entries need 3 values");
        m.palette[class_from_name(name)] = {static_cast<std::uint8_t>(v[0]),
                                            static_cast<std::uint8_t>(v[1]),
                                            static_cast<std::uint8_t>(v[2])};
      }
    }
    if (j.contains("frames")) {
      for (const auto& f : j.at("frames")) {
        FrameRecord r;
        r.timestamp = f.value("timestamp", 0.0);
        r.cloud = opt_string(f, "cloud");
        r.point_labels = opt_string(f, "point_labels");
        r.semantic = opt_string(f, "semantic");
        r.depth = opt_string(f, "depth");
        r.rgb = opt_string(f, "rgb");
        r.label = opt_string(f, "label");
        r.prediction = opt_string(f, "prediction");
        r.dynamic_prediction = opt_string(f, "dynamic_prediction");
        if (f.contains("pose_index") && !f.at("pose_index").is_null()) {
          r.pose_index = f.at("pose_index").get<int>();
        }
        m.frames.push_back(std::move(r));
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
  m.validate();
  return m;
}

void write_manifest(const fs::path& path, const SequenceManifest& m) {
  json j;
  j["sequence_id"] = m.sequence_id;
  j["grid"] = {{"rows", m.grid.rows}, {"cols", m.grid.cols}, {"resolution", m.grid.resolution}};
  if (m.poses) j["poses"] = *m.poses;
  if (m.intrinsics) {
    const auto& k = *m.intrinsics;
    j["intrinsics"] = {{"fx", k.fx},       {"fy", k.fy},         {"cx", k.cx},
                       {"cy", k.cy},       {"width", k.width},   {"height", k.height}};
  }
  j["cam_from_lidar"] = pose_json(m.cam_from_lidar);
  json pal = json::object();
  for (const auto& [cls, rgb] : m.palette) pal[class_name(cls)] = {rgb[0], rgb[1], rgb[2]};
  j["palette"] = pal;
  json frames = json::array();
  for (const auto& f : m.frames) {
    json fj;
    fj["timestamp"] = f.timestamp;
    auto put = [&](const char* key, const std::optional<std::string>& v) {
      if (v) fj[key] = *v;
    };
    put("cloud", f.cloud);
    put("point_labels", f.point_labels);
    put("semantic", f.semantic);
    put("depth", f.depth);
    put("rgb", f.rgb);
    put("label", f.label);
    put("prediction", f.prediction);
    put("dynamic_prediction", f.dynamic_prediction);
    if (f.pose_index) fj["pose_index"] = *f.pose_index;
    frames.push_back(fj);
  }
  j["frames"] = frames;
  write_text_atomic(path, j.dump(2) + "\n");
}

}  // namespace bevbench::io
