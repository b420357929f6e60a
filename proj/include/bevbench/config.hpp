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

#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>

#include "bevbench/consistency.hpp"
#include "bevbench/grid.hpp"
#include "bevbench/metrics.hpp"
#include "bevbench/pseudolidar.hpp"
#include "bevbench/synth.hpp"
#include "bevbench/weaksup.hpp"

namespace bevbench::config {

// Parses the TOML subset used by bevbench configs: tables, arrays of tables,
// dotted keys, basic and literal strings, integers, floats, booleans, arrays
// and inline tables. Dates and multi-line strings are rejected.
// Errors are kConfigError with "source:line:column" in the message.
nlohmann::json parse_toml(std::string_view text, const std::string& source = "<config>");

struct IoConfig {
  // Written next to every label/volume when set.
  bool export_png = false;
  std::optional<std::string> palette;  // JSON file mapping class name to [r,g,b]
};

struct ToolConfig {
  GridSpec grid;
  WeakSupConfig weaksup;
  EvalOptions metrics;
  std::string interpolation = "all-point";
  ConsistencyWeights weights;
  bool warp = false;
  VoxelSpec voxel;
  double saturation = 4.0;
  IoConfig io;

  // Copies the grid into the nested specs and checks every field.
  void finalize();
  nlohmann::json to_json() const;
};

// Unknown keys and out-of-range values raise kConfigError naming the field,
// for example "weaksup.eps: must be positive".
ToolConfig config_from_json(const nlohmann::json& j);
ToolConfig load_config(const std::filesystem::path& path);

// Parameters of the `synth` command. The grid always comes from the tool
// config so generated ground truth and weak labels share one raster.
struct SynthConfig {
  SceneParams scene;
  // One prediction set is written per level.
  std::vector<double> noise_levels{0.0, 0.25, 0.5, 0.75};

  nlohmann::json to_json() const;
};

SynthConfig synth_config_from_json(const nlohmann::json& j, const GridSpec& grid);
SynthConfig load_synth_config(const std::filesystem::path& path, const GridSpec& grid);

}  // namespace bevbench::config
