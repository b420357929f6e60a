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

#include "bevbench/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bevbench/error.hpp"

namespace bevbench::config {

using nlohmann::json;

namespace {

class TomlParser {
 public:
  TomlParser(std::string_view text, std::string source) : s_(text), source_(std::move(source)) {}

  json parse() {
    json root = json::object();
    json* table = &root;
    while (true) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        table = parse_header(root);
      } else {
        parse_keyval(*table);
      }
      end_of_line();
    }
    return root;
  }

 private:
  std::string_view s_;
  std::string source_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t line_start_ = 0;
  // Tables created by [header] or [[header]] may not be redefined.
  std::vector<std::string> defined_;

  bool eof() const { return pos_ >= s_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < s_.size() ? s_[pos_ + ahead] : '\0';
  }
  char get() {
    const char c = s_[pos_++];
    if (c == '\n') {
      ++line_;
      line_start_ = pos_;
    }
    return c;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::kConfigError, source_ + ":" + std::to_string(line_) + ":" +
                                             std::to_string(pos_ - line_start_ + 1) + ": " + what);
  }

  void skip_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) get();
  }
  void skip_comment() {
    if (peek() == '#') {
      while (!eof() && peek() != '\n') get();
    }
  }
  void skip_blank_lines() {
    while (!eof()) {
      skip_ws();
      skip_comment();
      if (peek() == '\r') get();
      if (peek() == '\n') {
        get();
      } else {
        break;
      }
    }
  }
  // Whitespace, comments and newlines inside arrays.
  void skip_array_space() {
    while (!eof()) {
      skip_ws();
      skip_comment();
      if (peek() == '\r' || peek() == '\n') {
        get();
      } else {
        break;
      }
    }
  }
  void end_of_line() {
    skip_ws();
    skip_comment();
    if (peek() == '\r') get();
    if (eof()) return;
    if (peek() != '\n') fail("expected end of line");
    get();
  }

  static bool bare_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '-';
  }

  std::string parse_simple_key() {
    if (peek() == '"') return parse_basic_string();
    if (peek() == '\'') return parse_literal_string();
    std::string key;
    while (!eof() && bare_char(peek())) key += get();
    if (key.empty()) fail("expected a key");
    return key;
  }

  std::vector<std::string> parse_key() {
    std::vector<std::string> parts;
    while (true) {
      skip_ws();
      parts.push_back(parse_simple_key());
      skip_ws();
      if (peek() != '.') break;
      get();
    }
    return parts;
  }

  static std::string joined(const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& p : parts) out += (out.empty() ? "" : ".") + p;
    return out;
  }

  json* descend(json& root, const std::vector<std::string>& parts, std::size_t count) {
    json* node = &root;
    for (std::size_t i = 0; i < count; ++i) {
      json& child = (*node)[parts[i]];
      if (child.is_null()) child = json::object();
      if (child.is_array() && !child.empty() && child.back().is_object()) {
        node = &child.back();
      } else if (child.is_object()) {
        node = &child;
      } else {
        fail("key '" + parts[i] + "' is not a table");
      }
    }
    return node;
  }

  json* parse_header(json& root) {
    get();
    const bool array = peek() == '[';
    if (array) get();
    const auto parts = parse_key();
    if (get() != ']') fail("expected ']'");
    if (array && (eof() || get() != ']')) fail("expected ']]'");
    json* parent = descend(root, parts, parts.size() - 1);
    json& slot = (*parent)[parts.back()];
    const std::string name = joined(parts);
    if (array) {
      if (slot.is_null()) slot = json::array();
      if (!slot.is_array()) fail("'" + name + "' is not an array of tables");
      slot.push_back(json::object());
      return &slot.back();
    }
    if (std::find(defined_.begin(), defined_.end(), name) != defined_.end()) {
      fail("table '" + name + "' defined twice");
    }
    defined_.push_back(name);
    if (slot.is_null()) slot = json::object();
    if (!slot.is_object()) fail("'" + name + "' is not a table");
    return &slot;
  }

  void parse_keyval(json& table) {
    const auto parts = parse_key();
    skip_ws();
    if (eof() || get() != '=') fail("expected '='");
    skip_ws();
    json value = parse_value();
    json* parent = descend(table, parts, parts.size() - 1);
    if (parent->contains(parts.back())) fail("duplicate key '" + joined(parts) + "'");
    (*parent)[parts.back()] = std::move(value);
  }

  json parse_value() {
    const char c = peek();
    if (c == '"') {
      if (peek(1) == '"' && peek(2) == '"') fail("multi-line strings are not supported");
      return parse_basic_string();
    }
    if (c == '\'') {
      if (peek(1) == '\'' && peek(2) == '\'') fail("multi-line strings are not supported");
      return parse_literal_string();
    }
    if (c == '[') return parse_array();
    if (c == '{') return parse_inline_table();
    if (s_.substr(pos_, 4) == "true" && !bare_char(peek(4))) {
      pos_ += 4;
      return true;
    }
    if (s_.substr(pos_, 5) == "false" && !bare_char(peek(5))) {
      pos_ += 5;
      return false;
    }
    return parse_number();
  }

  std::string parse_basic_string() {
    get();
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      const char c = get();
      if (c == '"') break;
      if (c != '\\') {
        out += c;
        continue;
      }
      if (eof()) fail("unterminated escape");
      switch (get()) {
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case 'b': out += '\b'; break;
        case 'f': out += '\f'; break;
        case 'u': append_utf8(out, parse_hex(4)); break;
        case 'U': append_utf8(out, parse_hex(8)); break;
        default: fail("unknown escape sequence");
      }
    }
    return out;
  }

  std::uint32_t parse_hex(int digits) {
    std::uint32_t v = 0;
    for (int i = 0; i < digits; ++i) {
      if (eof()) fail("truncated unicode escape");
      const char c = get();
      v <<= 4;
      if (c >= '0' && c <= '9') v |= static_cast<std::uint32_t>(c - '0');
      else if (c >= 'a' && c <= 'f') v |= static_cast<std::uint32_t>(c - 'a' + 10);
      else if (c >= 'A' && c <= 'F') v |= static_cast<std::uint32_t>(c - 'A' + 10);
      else fail("bad hex digit in unicode escape");
    }
    return v;
  }

  static void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
      out += static_cast<char>(cp);
    } else if (cp < 0x800) {
      out += static_cast<char>(0xC0 | (cp >> 6));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
      out += static_cast<char>(0xE0 | (cp >> 12));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
      out += static_cast<char>(0xF0 | (cp >> 18));
      out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    }
  }

  std::string parse_literal_string() {
    get();
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      const char c = get();
      if (c == '\'') break;
      out += c;
    }
    return out;
  }

  json parse_array() {
    get();
    json arr = json::array();
    while (true) {
      skip_array_space();
      if (peek() == ']') {
        get();
        return arr;
      }
      arr.push_back(parse_value());
      skip_array_space();
      if (peek() == ',') {
        get();
      } else if (peek() == ']') {
        get();
        return arr;
      } else {
        fail("expected ',' or ']' in array");
      }
    }
  }

  json parse_inline_table() {
    get();
    json table = json::object();
    skip_ws();
    if (peek() == '}') {
      get();
      return table;
    }
    while (true) {
      parse_keyval(table);
      skip_ws();
      if (eof()) fail("unterminated inline table");
      const char c = get();
      if (c == '}') return table;
      if (c != ',') fail("expected ',' or '}' in inline table");
      skip_ws();
    }
  }

  json parse_number() {
    std::string token;
    while (!eof() && (bare_char(peek()) || peek() == '.' || peek() == '+')) token += get();
    if (token.empty()) fail("expected a value");
    std::string body = token;
    std::erase(body, '_');
    std::string_view digits = body;
    bool negative = false;
    if (!digits.empty() && (digits.front() == '+' || digits.front() == '-')) {
      negative = digits.front() == '-';
      digits.remove_prefix(1);
    }
    if (digits == "inf") return negative ? -HUGE_VAL : HUGE_VAL;
    if (digits == "nan") return std::nan("");
    const bool is_float = body.find_first_of(".eE") != std::string::npos &&
                          body.rfind("0x", 0) == std::string::npos;
    if (is_float) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(body.data() + (body.front() == '+'),
                                             body.data() + body.size(), v);
      if (ec != std::errc() || ptr != body.data() + body.size()) fail("bad number '" + token + "'");
      return v;
    }
    std::int64_t v = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (ec != std::errc() || ptr != digits.data() + digits.size()) {
      fail("bad value '" + token + "'");
    }
    return negative ? -v : v;
  }
};

// ---------------------------------------------------------------------------
// Typed extraction with path diagnostics

[[noreturn]] void bad(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::kConfigError, path + ": " + what);
}

class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) bad(path_, "must be a table");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.emplace_back(key);
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    const std::string p = path_ + "." + key;
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) bad(p, "must be a boolean");
      out = v.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) bad(p, "must be an integer");
      out = static_cast<T>(v.get<std::int64_t>());
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) bad(p, "must be a number");
      out = static_cast<T>(v.get<double>());
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) bad(p, "must be a string");
      out = v.get<std::string>();
    } else if constexpr (std::is_same_v<T, std::optional<std::string>>) {
      if (!v.is_string()) bad(p, "must be a string");
      out = v.get<std::string>();
    } else if constexpr (std::is_same_v<T, std::array<double, 4>>) {
      if (!v.is_array() || v.size() != 4) bad(p, "must be an array of 4 numbers");
      for (std::size_t i = 0; i < 4; ++i) {
        if (!v[i].is_number()) bad(p, "must be an array of 4 numbers");
        out[i] = v[i].get<double>();
      }
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
      if (!v.is_array()) bad(p, "must be an array of numbers");
      out.clear();
      for (const auto& e : v) {
        if (!e.is_number()) bad(p, "must be an array of numbers");
        out.push_back(e.get<double>());
      }
    } else {
      static_assert(sizeof(T) == 0, "unsupported config field type");
    }
  }

  const json* raw(const char* key) {
    seen_.emplace_back(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::optional<Section> sub(const char* key) {
    seen_.emplace_back(key);
    if (!j_.contains(key)) return std::nullopt;
    return Section(j_.at(key), path_ + "." + key);
  }

  void reject_unknown() const {
    for (const auto& [key, value] : j_.items()) {
      if (std::find(seen_.begin(), seen_.end(), key) == seen_.end()) {
        bad(path_ + "." + key, "unknown key");
      }
    }
  }

  const std::string& path() const { return path_; }

 private:
  const json& j_;
  std::string path_;
  std::vector<std::string> seen_;
};

void require(bool ok, const std::string& path, const std::string& what) {
  if (!ok) bad(path, what);
}

}  // namespace

json parse_toml(std::string_view text, const std::string& source) {
  return TomlParser(text, source).parse();
}

void ToolConfig::finalize() {
  require(grid.rows > 0, "grid.rows", "must be positive");
  require(grid.cols > 0, "grid.cols", "must be positive");
  require(grid.resolution > 0.0 && std::isfinite(grid.resolution), "grid.resolution",
          "must be positive");
  weaksup.grid = grid;
  voxel.bev = grid;

  require(weaksup.eps > 0.0, "weaksup.eps", "must be positive");
  require(weaksup.min_pts >= 1, "weaksup.min_pts", "must be at least 1");
  require(weaksup.fit.min_span > 0.0, "weaksup.min_span", "must be positive");
  require(weaksup.fit.min_points >= 4, "weaksup.min_points", "must be at least 4");
  require(weaksup.fit.ridge >= 0.0, "weaksup.ridge", "must be nonnegative");
  require(weaksup.assembly.min_lane_width > 0.0, "weaksup.min_lane_width", "must be positive");
  require(weaksup.marker_remission >= 0.0, "weaksup.marker_remission", "must be nonnegative");
  require(weaksup.link_tolerance > 0.0, "weaksup.link_tolerance", "must be positive");
  require(weaksup.obstacles.min_frames >= 1, "weaksup.obstacle_min_frames", "must be at least 1");
  require(weaksup.review_residual > 0.0, "weaksup.review_residual", "must be positive");

  require(metrics.threshold > 0.0f && metrics.threshold < 1.0f, "metrics.threshold",
          "must lie in (0, 1)");
  require(!metrics.lane_iou_thresholds.empty(), "metrics.lane_iou_thresholds",
          "must not be empty");
  for (double t : metrics.lane_iou_thresholds) {
    require(t > 0.0 && t < 1.0, "metrics.lane_iou_thresholds", "entries must lie in (0, 1)");
  }
  require(interpolation == "all-point", "metrics.interpolation",
          "only \"all-point\" is supported");

  require(weights.sup >= 0.0, "consistency.lambda_sup", "must be nonnegative");
  require(weights.short_range >= 0.0, "consistency.lambda_short", "must be nonnegative");
  require(weights.long_range >= 0.0, "consistency.lambda_long", "must be nonnegative");

  require(voxel.channels >= 1, "voxel.channels", "must be at least 1");
  require(voxel.y_max > voxel.y_min, "voxel.y_max", "must exceed voxel.y_min");
  require(saturation > 0.0, "voxel.saturation", "must be positive");
}

json ToolConfig::to_json() const {
  json j;
  j["grid"] = {{"rows", grid.rows}, {"cols", grid.cols}, {"resolution", grid.resolution}};
  j["weaksup"] = {{"eps", weaksup.eps},
                  {"min_pts", weaksup.min_pts},
                  {"min_span", weaksup.fit.min_span},
                  {"min_points", weaksup.fit.min_points},
                  {"ridge", weaksup.fit.ridge},
                  {"z_ref", weaksup.assembly.z_ref},
                  {"min_lane_width", weaksup.assembly.min_lane_width},
                  {"marker_remission", weaksup.marker_remission},
                  {"link_tolerance", weaksup.link_tolerance},
                  {"obstacle_min_frames", weaksup.obstacles.min_frames},
                  {"review_residual", weaksup.review_residual}};
  j["metrics"] = {{"threshold", metrics.threshold},
                  {"lane_iou_thresholds", metrics.lane_iou_thresholds},
                  {"interpolation", interpolation}};
  j["consistency"] = {{"lambda_sup", weights.sup},
                      {"lambda_short", weights.short_range},
                      {"lambda_long", weights.long_range},
                      {"warp", warp}};
  j["voxel"] = {{"resolution", voxel.bev.resolution},
                {"channels", voxel.channels},
                {"y_min", voxel.y_min},
                {"y_max", voxel.y_max},
                {"saturation", saturation}};
  j["io"] = {{"export_png", io.export_png}};
  if (io.palette) j["io"]["palette"] = *io.palette;
  return j;
}

ToolConfig config_from_json(const json& j) {
  ToolConfig c;
  Section root(j, "config");
  if (auto s = root.sub("grid")) {
    s->read("rows", c.grid.rows);
    s->read("cols", c.grid.cols);
    s->read("resolution", c.grid.resolution);
    s->reject_unknown();
  }
  if (auto s = root.sub("weaksup")) {
    s->read("eps", c.weaksup.eps);
    s->read("min_pts", c.weaksup.min_pts);
    s->read("min_span", c.weaksup.fit.min_span);
    s->read("min_points", c.weaksup.fit.min_points);
    s->read("ridge", c.weaksup.fit.ridge);
    s->read("z_ref", c.weaksup.assembly.z_ref);
    s->read("min_lane_width", c.weaksup.assembly.min_lane_width);
    s->read("marker_remission", c.weaksup.marker_remission);
    s->read("link_tolerance", c.weaksup.link_tolerance);
    s->read("obstacle_min_frames", c.weaksup.obstacles.min_frames);
    s->read("review_residual", c.weaksup.review_residual);
    s->reject_unknown();
  }
  if (auto s = root.sub("metrics")) {
    s->read("threshold", c.metrics.threshold);
    s->read("lane_iou_thresholds", c.metrics.lane_iou_thresholds);
    s->read("interpolation", c.interpolation);
    s->reject_unknown();
  }
  if (auto s = root.sub("consistency")) {
    s->read("lambda_sup", c.weights.sup);
    s->read("lambda_short", c.weights.short_range);
    s->read("lambda_long", c.weights.long_range);
    s->read("warp", c.warp);
    s->reject_unknown();
  }
  if (auto s = root.sub("voxel")) {
    // The BEV raster always follows [grid]; an echoed resolution must agree.
    double resolution = c.grid.resolution;
    s->read("resolution", resolution);
    if (resolution != c.grid.resolution) bad("config.voxel.resolution", "must equal grid.resolution");
    s->read("channels", c.voxel.channels);
    s->read("y_min", c.voxel.y_min);
    s->read("y_max", c.voxel.y_max);
    s->read("saturation", c.saturation);
    s->reject_unknown();
  }
  if (auto s = root.sub("io")) {
    s->read("export_png", c.io.export_png);
    s->read("palette", c.io.palette);
    s->reject_unknown();
  }
  root.reject_unknown();
  c.finalize();
  return c;
}

ToolConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfigError, "cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return config_from_json(parse_toml(buf.str(), path.string()));
}

json SynthConfig::to_json() const {
  const SceneParams& p = scene;
  json vehicles = json::array();
  for (const auto& v : p.vehicles) {
    vehicles.push_back({{"lateral", v.lateral},
                        {"forward", v.forward},
                        {"length", v.length},
                        {"width", v.width},
                        {"yaw", v.yaw}});
  }
  json j;
  j["scene"] = {{"lane_count", p.lane_count},
                {"lane_widths", p.lane_widths},
                {"ego_lane", p.ego_lane},
                {"shape", p.shape},
                {"road_margin", p.road_margin},
                {"sidewalk_width", p.sidewalk_width},
                {"marker_width", p.marker_width},
                {"sequence_length", p.sequence_length},
                {"ego_speed", p.ego_speed},
                {"seed", p.seed},
                {"point_density", p.point_density},
                {"sensor_range", p.sensor_range},
                {"point_noise", p.point_noise},
                {"camera_height", p.camera_height},
                {"road_remission", p.road_remission},
                {"marker_remission", p.marker_remission},
                {"sidewalk_remission", p.sidewalk_remission},
                {"vehicles", vehicles}};
  j["predictions"] = {{"noise_levels", noise_levels}};
  return j;
}

SynthConfig synth_config_from_json(const json& j, const GridSpec& grid) {
  SynthConfig c;
  SceneParams& p = c.scene;
  Section root(j, "synth");
  if (auto s = root.sub("scene")) {
    s->read("lane_count", p.lane_count);
    s->read("lane_widths", p.lane_widths);
    s->read("ego_lane", p.ego_lane);
    s->read("shape", p.shape);
    s->read("road_margin", p.road_margin);
    s->read("sidewalk_width", p.sidewalk_width);
    s->read("marker_width", p.marker_width);
    s->read("sequence_length", p.sequence_length);
    s->read("ego_speed", p.ego_speed);
    s->read("seed", p.seed);
    s->read("point_density", p.point_density);
    s->read("sensor_range", p.sensor_range);
    s->read("point_noise", p.point_noise);
    s->read("camera_height", p.camera_height);
    s->read("road_remission", p.road_remission);
    s->read("marker_remission", p.marker_remission);
    s->read("sidewalk_remission", p.sidewalk_remission);
    if (const json* vs = s->raw("vehicles")) {
      if (!vs->is_array()) bad("synth.scene.vehicles", "must be an array of tables");
      for (std::size_t i = 0; i < vs->size(); ++i) {
        Section v((*vs)[i], "synth.scene.vehicles[" + std::to_string(i) + "]");
        VehicleBox box;
        v.read("lateral", box.lateral);
        v.read("forward", box.forward);
        v.read("length", box.length);
        v.read("width", box.width);
        v.read("yaw", box.yaw);
        v.reject_unknown();
        p.vehicles.push_back(box);
      }
    }
    s->reject_unknown();
  }
  if (auto s = root.sub("predictions")) {
    s->read("noise_levels", c.noise_levels);
    s->reject_unknown();
  }
  root.reject_unknown();
  for (double n : c.noise_levels) {
    require(n >= 0.0 && n <= 1.0, "synth.predictions.noise_levels", "entries must lie in [0, 1]");
  }
  p.grid = grid;
  try {
    p.validate();
  } catch (const Error& e) {
    bad("synth.scene", e.what());
  }
  return c;
}

SynthConfig load_synth_config(const std::filesystem::path& path, const GridSpec& grid) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfigError, "cannot open synth parameters " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return synth_config_from_json(parse_toml(buf.str(), path.string()), grid);
}

}  // namespace bevbench::config
