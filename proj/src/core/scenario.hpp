// SPDX-License-Identifier: Apache-2.0
// Copyright (C) 2026 The depcage authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing,
// software distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions
// and limitations under the License.

/**
 * @file scenario.hpp
 *
 * Scenario documents: one JSON object whose sections configure the world,
 * the scripts and every pipeline stage. Config files use the same sections
 * and are applied as JSON merge patches before validation.
 */

#pragma once

#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fallback.hpp"
#include "function_monitor.hpp"
#include "perception.hpp"
#include "reactor.hpp"
#include "records.hpp"
#include "sim.hpp"

namespace depcage::sim {

struct EgoScriptPoint {
  double time{0.0};
  double target_speed{0.0};
  double steering_angle{0.0};
  bool operator==(const EgoScriptPoint&) const = default;
};

/// Velocity that applies from `time` on.
struct MotionKey {
  double time{0.0};
  Vec2 velocity;
  bool operator==(const MotionKey&) const = default;
};

struct ScriptedObject {
  TruthObject object;  // footprint at t = 0, velocity until the first key
  std::vector<MotionKey> motion;
  bool operator==(const ScriptedObject&) const = default;
};

struct ScriptedCommand {
  double time{0.0};
  reactor::OperatorCommand command;
  bool operator==(const ScriptedCommand&) const = default;
};

struct EgoLimits {
  double max_accel{2.0};  // m/s^2 for scripted speed changes
  double max_decel{5.0};
  double max_steering{kDefaultMaxSteering};
  bool operator==(const EgoLimits&) const = default;
};

struct AnomalySection {
  bool enabled{false};
  std::string kb;        // knowledge-base directory, relative to the scenario file
  int model_version{0};  // 0 = latest
  bool operator==(const AnomalySection&) const = default;
};

struct Scenario {
  std::string name;
  std::uint64_t seed{0};
  double dt{0.05};
  double duration{10.0};
  EgoState ego;
  EgoLimits limits;
  std::vector<EgoScriptPoint> ego_script;
  std::vector<ScriptedObject> objects;
  LidarConfig lidar;
  RasterWindow raster;
  std::vector<perception::PerceptionModelConfig> perception_models;  // fault_script already merged in
  fallback::FallbackConfig fallback;
  fm::SafeZoneParams zone;
  fm::HaraThresholds thresholds;
  AnomalySection anomaly;
  reactor::RecorderConfig recorder;
  std::vector<ScriptedCommand> operator_commands;
  /// The merged document the scenario was built from.
  Json document;
};

/// Throws ValidationError with a field path.
Scenario parse_scenario(const Json& document);

/// Reads `path`, merge-patches each config file over it in order and
/// parses. ParseError carries the file name and line.
Scenario load_scenario(const std::filesystem::path& path, const std::vector<std::filesystem::path>& configs = {});

std::int64_t tick_count(const Scenario& s);

/// World truth at `tick` for the given ego state.
SceneState truth_at(const Scenario& s, const EgoState& ego, std::int64_t tick);

/// Script target in force at time t.
EgoScriptPoint ego_target(const Scenario& s, double t);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace depcage::sim
