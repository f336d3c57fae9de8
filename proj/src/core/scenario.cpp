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

#include "scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "errors.hpp"

namespace depcage::sim {

namespace {

std::string at(const std::string& base, std::size_t i) { return join_path(base, std::to_string(i)); }

const Json& array_of(const Json& j, const std::string& path) {
  if (!j.is_array()) throw ValidationError(path, "expected an array");
  return j;
}

/// Re-throws a field-relative ValidationError under `path`.
template <class F>
void scoped(const std::string& path, F&& f) {
  try {
    f();
  } catch (const ValidationError& e) {
    throw ValidationError(join_path(path, e.field()), e.message());
  }
}

EgoLimits decode_limits(const Json& j, const std::string& path) {
  JsonReader r(j, path);
  EgoLimits l;
  l.max_accel = r.number("max_accel", l.max_accel);
  l.max_decel = r.number("max_decel", l.max_decel);
  l.max_steering = r.number("max_steering", l.max_steering);
  r.done();
  if (!(l.max_accel > 0)) throw ValidationError(r.path("max_accel"), "must be > 0");
  if (!(l.max_decel > 0)) throw ValidationError(r.path("max_decel"), "must be > 0");
  if (!(l.max_steering > 0)) throw ValidationError(r.path("max_steering"), "must be > 0");
  return l;
}

LidarConfig decode_lidar(const Json& j, const std::string& path) {
  JsonReader r(j, path);
  LidarConfig c;
  c.ray_count = static_cast<int>(r.integer("ray_count", c.ray_count));
  c.max_range = r.number("max_range", c.max_range);
  c.range_noise_sigma = r.number("range_noise_sigma", c.range_noise_sigma);
  c.fov = r.number("fov", c.fov);
  r.done();
  scoped(path, [&] { validate(c); });
  return c;
}

AnomalySection decode_anomaly(const Json& j, const std::string& path) {
  JsonReader r(j, path);
  AnomalySection a;
  a.enabled = r.boolean("enabled", true);
  a.kb = r.string("kb", "");
  a.model_version = static_cast<int>(r.integer("model_version", 0));
  r.done();
  if (a.model_version < 0) throw ValidationError(r.path("model_version"), "must be >= 0");
  return a;
}

void check_sorted(const std::vector<double>& times, const std::string& path) {
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (times[i] < times[i - 1]) throw ValidationError(at(path, i) + "/time", "script must be time-sorted");
  }
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Scenario parse_scenario(const Json& document) {
  JsonReader r(document, "");
  Scenario s;
  s.document = document;
  s.name = r.string("name");
  if (s.name.empty() || s.name.find_first_of("/\\ ") != std::string::npos) {
    throw ValidationError("name", "must be non-empty without spaces or slashes");
  }
  const std::int64_t seed = r.integer("seed", 0);
  if (seed < 0) throw ValidationError("seed", "must be >= 0");
  s.seed = static_cast<std::uint64_t>(seed);
  s.dt = r.number("dt", s.dt);
  if (!(s.dt > 0)) throw ValidationError("dt", "must be > 0");
  s.duration = r.number("duration");
  if (!(s.duration > 0)) throw ValidationError("duration", "must be > 0");
  if (tick_count(s) < 1) throw ValidationError("duration", "must cover at least one tick");

  if (const Json* l = r.child("ego_limits")) s.limits = decode_limits(*l, "ego_limits");
  if (const Json* e = r.child("ego")) s.ego = decode_ego(*e, "ego");
  scoped("ego", [&] { validate(s.ego, s.limits.max_steering); });

  if (const Json* script = r.child("ego_script")) {
    std::vector<double> times;
    std::size_t i = 0;
    for (const auto& p : array_of(*script, "ego_script")) {
      JsonReader pr(p, at("ego_script", i++));
      EgoScriptPoint pt;
      pt.time = pr.number("time");
      pt.target_speed = pr.number("target_speed");
      pt.steering_angle = pr.number("steering_angle", 0.0);
      pr.done();
      if (pt.target_speed < 0) throw ValidationError(pr.path("target_speed"), "must be >= 0");
      if (std::abs(pt.steering_angle) > s.limits.max_steering) {
        throw ValidationError(pr.path("steering_angle"), "exceeds max steering");
      }
      times.push_back(pt.time);
      s.ego_script.push_back(pt);
    }
    check_sorted(times, "ego_script");
  }

  std::set<std::string> object_ids;
  if (const Json* objs = r.child("objects")) {
    std::size_t i = 0;
    for (const auto& o : array_of(*objs, "objects")) {
      const std::string path = at("objects", i++);
      if (!o.is_object()) throw ValidationError(path, "expected an object");
      Json plain = o;
      plain.erase("motion");
      ScriptedObject so;
      so.object = decode_truth(plain, path);
      scoped(path, [&] { validate(so.object); });
      if (!object_ids.insert(so.object.id).second) throw ValidationError(path + "/id", "duplicate object id");
      if (o.contains("motion")) {
        std::vector<double> times;
        std::size_t k = 0;
        for (const auto& m : array_of(o["motion"], path + "/motion")) {
          JsonReader mr(m, at(path + "/motion", k++));
          MotionKey key;
          key.time = mr.number("time");
          key.velocity = decode_vec2(mr.required("velocity"), mr.path("velocity"));
          mr.done();
          times.push_back(key.time);
          so.motion.push_back(key);
        }
        check_sorted(times, path + "/motion");
      }
      s.objects.push_back(std::move(so));
    }
  }

  if (const Json* l = r.child("lidar")) s.lidar = decode_lidar(*l, "lidar");
  if (const Json* w = r.child("raster")) s.raster = decode_window(*w, "raster");
  scoped("raster", [&] { validate(s.raster); });

  std::set<std::string> model_ids;
  if (const Json* models = r.child("perception_models")) {
    std::size_t i = 0;
    for (const auto& m : array_of(*models, "perception_models")) {
      const std::string path = at("perception_models", i++);
      auto cfg = decode_model_config(m, path);
      if (!model_ids.insert(cfg.id).second) throw ValidationError(path + "/id", "duplicate model id");
      s.perception_models.push_back(std::move(cfg));
    }
  }
  if (s.perception_models.empty()) throw ValidationError("perception_models", "needs at least one model");

  if (const Json* faults = r.child("fault_script")) {
    std::size_t i = 0;
    for (const auto& f : array_of(*faults, "fault_script")) {
      const std::string path = at("fault_script", i++);
      if (!f.is_object() || !f.contains("model") || !f["model"].is_string()) {
        throw ValidationError(path + "/model", "is required");
      }
      const std::string model = f["model"].get<std::string>();
      Json plain = f;
      plain.erase("model");
      const auto directive = decode_directive(plain, path);
      auto it = std::find_if(s.perception_models.begin(), s.perception_models.end(),
                             [&](const auto& m) { return m.id == model; });
      if (it == s.perception_models.end()) throw ValidationError(path + "/model", "unknown model '" + model + "'");
      it->error_process.push_back(directive);
      scoped(path, [&] { perception::validate(*it); });
    }
  }

  if (const Json* fb = r.child("fallback_perception")) s.fallback = decode_fallback(*fb, "fallback_perception");

  if (const Json* fmj = r.child("function_monitor")) {
    JsonReader fr(*fmj, "function_monitor");
    if (const Json* z = fr.child("safe_zone")) s.zone = decode_zone_params(*z, fr.path("safe_zone"));
    if (const Json* t = fr.child("thresholds")) s.thresholds = decode_thresholds(*t, fr.path("thresholds"));
    fr.done();
  }
  scoped("function_monitor/safe_zone", [&] { fm::validate(s.zone); });
  scoped("function_monitor/thresholds", [&] { fm::validate(s.thresholds); });

  if (const Json* a = r.child("anomaly_monitor")) s.anomaly = decode_anomaly(*a, "anomaly_monitor");
  if (const Json* rec = r.child("recorder")) s.recorder = decode_recorder(*rec, "recorder");

  std::set<std::string> command_ids;
  if (const Json* cmds = r.child("operator_commands")) {
    std::vector<double> times;
    std::size_t i = 0;
    for (const auto& c : array_of(*cmds, "operator_commands")) {
      const std::string path = at("operator_commands", i++);
      if (!c.is_object()) throw ValidationError(path, "expected an object");
      ScriptedCommand sc;
      if (!c.contains("time") || !c["time"].is_number()) throw ValidationError(path + "/time", "is required");
      sc.time = c["time"].get<double>();
      Json plain = c;
      plain.erase("time");
      sc.command = decode_command(plain, path);
      if (!command_ids.insert(sc.command.command_id).second) {
        throw ValidationError(path + "/command_id", "duplicate command id");
      }
      times.push_back(sc.time);
      s.operator_commands.push_back(std::move(sc));
    }
    check_sorted(times, "operator_commands");
  }
  r.done();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path, const std::vector<std::filesystem::path>& configs) {
  const auto parse_file = [](const std::filesystem::path& p) {
    try {
      return parse_document(read_text_file(p));
    } catch (const ParseError& e) {
      throw ParseError(e.message(), e.line(), p.string());
    }
  };
  Json doc = parse_file(path);
  for (const auto& c : configs) {
    const Json patch = parse_file(c);
    if (!patch.is_object()) throw ParseError(c.string() + ": config must be a JSON object");
    doc.merge_patch(patch);
  }
  try {
    return parse_scenario(doc);
  } catch (const ValidationError& e) {
    throw ValidationError(e.field(), e.message() + " (in " + path.string() + ")");
  }
}

std::int64_t tick_count(const Scenario& s) { return std::llround(s.duration / s.dt); }

SceneState truth_at(const Scenario& s, const EgoState& ego, std::int64_t tick) {
  SceneState state;
  state.tick = tick;
  state.time = static_cast<double>(tick) * s.dt;
  state.ego = ego;
  state.objects.reserve(s.objects.size());
  for (const auto& so : s.objects) {
    TruthObject o = so.object;
    Vec2 shift{0.0, 0.0};
    Vec2 velocity = so.object.velocity;
    double from = 0.0;
    for (const auto& key : so.motion) {
      if (key.time >= state.time) break;
      if (key.time > from) {
        shift = shift + velocity * (key.time - from);
        from = key.time;
      }
      velocity = key.velocity;
    }
    shift = shift + velocity * (state.time - from);
    for (auto& p : o.footprint) p = p + shift;
    o.velocity = velocity;
    state.objects.push_back(std::move(o));
  }
  return state;
}

EgoScriptPoint ego_target(const Scenario& s, double t) {
  EgoScriptPoint target{0.0, s.ego.speed, s.ego.steering_angle};
  for (const auto& p : s.ego_script) {
    if (p.time > t + 1e-9) break;
    target = p;
  }
  return target;
}

}  // namespace depcage::sim
