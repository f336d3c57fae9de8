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
 * @file records.hpp
 *
 * Line-delimited JSON record format shared by run logs, incident files,
 * knowledge-base raster stores, scenario files and the telemetry wire.
 *
 * Keys are written sorted and doubles in shortest round-trip form, so equal
 * values always encode to equal bytes. Decoders fill absent keys with the
 * type's defaults, reject unknown keys and report the offending field as a
 * slash-separated path.
 */

#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "anomaly.hpp"
#include "fallback.hpp"
#include "function_monitor.hpp"
#include "perception.hpp"
#include "reactor.hpp"
#include "scene.hpp"

namespace depcage {

using Json = nlohmann::json;

/// One record per line, terminated by '\n'.
std::string encode_record_line(const Json& record);
/// Throws ParseError carrying `line`.
Json parse_record_line(std::string_view text, std::size_t line = 0);
/// Parses a whole JSON document; ParseError reports the 1-based line.
Json parse_document(std::string_view text);

/// Field access with path-qualified ValidationErrors.
class JsonReader {
 public:
  JsonReader(const Json& j, std::string path);

  bool has(const char* key) const;
  double number(const char* key, double fallback);
  double number(const char* key);
  std::int64_t integer(const char* key, std::int64_t fallback);
  std::int64_t integer(const char* key);
  bool boolean(const char* key, bool fallback);
  std::string string(const char* key, const std::string& fallback);
  std::string string(const char* key);
  /// nullptr when absent; marks the key as consumed.
  const Json* child(const char* key);
  const Json& required(const char* key);
  std::string path(const char* key) const;
  /// Throws on any key not consumed.
  void done() const;

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string join_path(const std::string& base, const std::string& key);

Json encode(Vec2 v);
Json encode(std::span<const Vec2> poly);
Json encode(const EgoState& e);
Json encode(const TruthObject& o);
Json encode(const SceneState& s);
Json encode(const DetectedObject& o);
Json encode(const ObjectList& l);
Json encode(const PointCloud& c);
Json encode(const RasterWindow& w);
Json encode(const SceneRaster& r);
Json encode(const fm::SafeZone& z);
Json encode(const fm::Evidence& e);
Json encode(const fm::FmVerdict& v);
Json encode(const fm::SafeZoneParams& p);
Json encode(const fm::HaraThresholds& t);
Json encode(const am::AmVerdict& v);
Json encode(const am::TrainParams& p);
Json encode(const reactor::SystemMode& m);
Json encode(const reactor::OperatorCommand& c);
Json encode(const reactor::CommandResult& r);
Json encode(const reactor::RecordTrigger& t);
Json encode(const reactor::Actions& a);
Json encode(const reactor::RecorderConfig& c);
Json encode(const fallback::ClusterParams& p);
Json encode(const fallback::ShapeRule& r);
Json encode(const fallback::FallbackConfig& c);
Json encode(const perception::Directive& d);
Json encode(const perception::PerceptionModelConfig& c);

Vec2 decode_vec2(const Json& j, const std::string& path = "");
Polygon decode_polygon(const Json& j, const std::string& path = "");
EgoState decode_ego(const Json& j, const std::string& path = "");
TruthObject decode_truth(const Json& j, const std::string& path = "");
SceneState decode_scene(const Json& j, const std::string& path = "");
DetectedObject decode_detection(const Json& j, const std::string& path = "");
ObjectList decode_object_list(const Json& j, const std::string& path = "");
PointCloud decode_cloud(const Json& j, const std::string& path = "");
RasterWindow decode_window(const Json& j, const std::string& path = "");
SceneRaster decode_raster(const Json& j, const std::string& path = "");
fm::SafeZone decode_zone(const Json& j, const std::string& path = "");
fm::Evidence decode_evidence(const Json& j, const std::string& path = "");
fm::FmVerdict decode_fm_verdict(const Json& j, const std::string& path = "");
fm::SafeZoneParams decode_zone_params(const Json& j, const std::string& path = "");
fm::HaraThresholds decode_thresholds(const Json& j, const std::string& path = "");
am::AmVerdict decode_am_verdict(const Json& j, const std::string& path = "");
am::TrainParams decode_train_params(const Json& j, const std::string& path = "");
reactor::SystemMode decode_mode(const Json& j, const std::string& path = "");
reactor::OperatorCommand decode_command(const Json& j, const std::string& path = "");
reactor::CommandResult decode_command_result(const Json& j, const std::string& path = "");
reactor::RecordTrigger decode_trigger(const Json& j, const std::string& path = "");
reactor::Actions decode_actions(const Json& j, const std::string& path = "");
reactor::RecorderConfig decode_recorder(const Json& j, const std::string& path = "");
fallback::ClusterParams decode_cluster_params(const Json& j, const std::string& path = "");
fallback::ShapeRule decode_shape_rule(const Json& j, const std::string& path = "");
fallback::FallbackConfig decode_fallback(const Json& j, const std::string& path = "");
perception::Directive decode_directive(const Json& j, const std::string& path = "");
perception::PerceptionModelConfig decode_model_config(const Json& j, const std::string& path = "");

ObjectClass decode_object_class(const Json& j, const std::string& path);

}  // namespace depcage
