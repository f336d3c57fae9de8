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
 * @file pipeline.hpp
 *
 * The tick loop. Each tick:
 *   1. collect operator commands (scripted, then live);
 *   2. sense: truth, lidar scan, raster, every AI path, fallback path;
 *   3. monitor: safe zone, function monitor over the voter output of the
 *      previous mode, anomaly monitor;
 *   4. react: step the mode machine;
 *   5. vote and fuse with the new mode (or take the fallback list);
 *   6. record, 7. publish telemetry, 8. drive the ego one step.
 *
 * No wall-clock value enters a record, so a (scenario, seed) pair always
 * yields the same run log bytes.
 */

#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "anomaly.hpp"
#include "reactor.hpp"
#include "records.hpp"
#include "scenario.hpp"

namespace depcage::pipeline {

struct TickFrame {
  SceneState truth;
  PointCloud cloud;
  SceneRaster raster;
  std::vector<ObjectList> ai_lists;
  ObjectList fallback_list;
  fm::FmVerdict fm;
  std::optional<am::AmVerdict> am;
  std::vector<reactor::OperatorCommand> commands;
  reactor::SystemMode mode_before;
  reactor::SystemMode mode;
  reactor::Actions actions;
  ObjectList output;  // fused AI output, or the fallback list when switched
  sim::Control control;
  /// Start tick of the incident being recorded, if any.
  std::optional<std::int64_t> open_incident;
};

struct RunHooks {
  /// Live operator commands for the given tick, in arrival order.
  std::function<std::vector<reactor::OperatorCommand>(std::int64_t tick)> drain_commands;
  /// Called once per tick after recording. Exceptions abort the run.
  std::function<void(const TickFrame&)> telemetry;
};

struct RunOptions {
  /// Run log, summary and incidents go here; empty writes nothing.
  std::filesystem::path out_dir;
  /// Required when the scenario enables the anomaly monitor.
  std::optional<am::AnomalyModel> model;
  bool keep_frames{true};
};

struct RunResult {
  std::string run_id;
  std::string runlog;  // run log text, one record per line
  Json summary;
  std::vector<TickFrame> frames;
  std::vector<SceneRaster> rasters;
  std::vector<reactor::IncidentInfo> incidents;
  std::vector<std::string> alerts;
};

std::string run_id(const sim::Scenario& s);

reactor::ReactorConfig reactor_config(const sim::Scenario& s);

/// Encodes a frame as a run-log tick record.
Json tick_record(const TickFrame& frame);

/// Throws Error("hook failed at tick N: ...") when a hook throws.
RunResult run_scenario(const sim::Scenario& scenario, const RunOptions& options, const RunHooks& hooks = {});

/// Summary computed from a run-log header followed by tick records. The log
/// does not carry `alerts` or `incident_files`, so those keys are absent.
Json summarize(std::span<const Json> records);
Json summarize_runlog(const std::filesystem::path& runlog);

struct ReplayReport {
  std::filesystem::path incident;
  std::int64_t ticks{0};
  std::vector<std::string> mismatches;
  bool ok() const { return mismatches.empty(); }
};

/// Recomputes fallback output, zone, both verdicts and the reactor step for
/// every recorded tick and compares with what was recorded.
ReplayReport replay_incident(const std::filesystem::path& incident);

/// Incident rasters, for retraining.
std::vector<SceneRaster> incident_rasters(const std::filesystem::path& incident_or_dir);

}  // namespace depcage::pipeline
