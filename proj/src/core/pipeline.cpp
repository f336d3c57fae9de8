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

#include "pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "digest.hpp"
#include "errors.hpp"
#include "fallback.hpp"
#include "perception.hpp"
#include "sim.hpp"
#include "version.hpp"

namespace depcage::pipeline {

namespace fs = std::filesystem;

std::string run_id(const sim::Scenario& s) { return s.name + "-" + std::to_string(s.seed); }

reactor::ReactorConfig reactor_config(const sim::Scenario& s) {
  reactor::ReactorConfig cfg;
  for (const auto& m : s.perception_models) cfg.ai_sources.push_back(m.id);
  cfg.min_agreeing_sources = s.thresholds.min_agreeing_for(cfg.ai_sources.size());
  return cfg;
}

Json tick_record(const TickFrame& f) {
  Json lists = Json::array();
  for (const auto& l : f.ai_lists) lists.push_back(encode(l));
  Json commands = Json::array();
  for (const auto& c : f.commands) commands.push_back(encode(c));
  return {{"type", "tick"},
          {"tick", f.truth.tick},
          {"time", f.truth.time},
          {"truth", encode(f.truth)},
          {"cloud", encode(f.cloud)},
          {"raster", encode(f.raster)},
          {"lists", lists},
          {"fallback", encode(f.fallback_list)},
          {"fm", encode(f.fm)},
          {"am", f.am ? encode(*f.am) : Json(nullptr)},
          {"commands", commands},
          {"mode_before", encode(f.mode_before)},
          {"mode", encode(f.mode)},
          {"actions", encode(f.actions)},
          {"output", encode(f.output)},
          {"control", {{"accel", f.control.accel}, {"steering", f.control.steering}}}};
}

namespace {

Json model_info(const std::optional<am::AnomalyModel>& model) {
  if (!model) return nullptr;
  const std::string text = am::serialize_model(*model);
  return {{"version", model->version},
          {"digest", am::model_file_digest(text)},
          {"threshold", model->threshold},
          {"training_set_digest", model->training_set_digest}};
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + p.string());
  out << text;
  if (!out) throw IoError("short write to " + p.string());
}

sim::Control drive(const sim::Scenario& s, const EgoState& ego, const reactor::SystemMode& mode, double t) {
  if (mode.state == reactor::State::MinimalRisk) {
    // straight-line controlled stop at the braking deceleration
    return {-std::min(s.zone.a_max, ego.speed / s.dt), 0.0};
  }
  const auto target = sim::ego_target(s, t);
  const double accel = std::clamp((target.target_speed - ego.speed) / s.dt, -s.limits.max_decel, s.limits.max_accel);
  return {accel, target.steering_angle};
}

}  // namespace

RunResult run_scenario(const sim::Scenario& s, const RunOptions& options, const RunHooks& hooks) {
  if (s.anomaly.enabled && !options.model) throw StateError("scenario enables the anomaly monitor but no model was given");
  if (options.model) {
    if (!options.model->calibrated()) throw StateError("anomaly model is not calibrated");
    if (!(options.model->window == s.raster)) {
      throw ValidationError("raster", "window differs from the one the anomaly model was trained on");
    }
  }
  const std::optional<am::AnomalyModel>& model = options.model;

  RunResult result;
  result.run_id = run_id(s);
  const std::int64_t ticks = sim::tick_count(s);
  const reactor::ReactorConfig rcfg = reactor_config(s);

  fs::path incident_dir;
  if (!options.out_dir.empty()) {
    incident_dir = options.out_dir / "incidents" / result.run_id;
    std::error_code ec;
    fs::create_directories(options.out_dir, ec);
    if (!fs::is_directory(options.out_dir)) throw IoError("cannot create " + options.out_dir.string());
    fs::remove_all(incident_dir, ec);
  }

  const Json header = {{"type", "run"},
                       {"run_id", result.run_id},
                       {"software", std::string("depcage ") + kVersion},
                       {"ticks", ticks},
                       {"scenario", s.document},
                       {"model", model_info(model)}};
  Json incident_header = {{"run_id", result.run_id},
                          {"scenario", s.document},
                          {"model_text", model ? Json(am::serialize_model(*model)) : Json(nullptr)}};
  reactor::Recorder recorder(s.recorder, s.dt, incident_dir, std::move(incident_header));

  std::vector<Json> records;
  records.push_back(header);
  std::string runlog = encode_record_line(header);

  std::vector<perception::PerceptionPath> paths;
  for (const auto& m : s.perception_models) paths.emplace_back(m);

  EgoState ego = s.ego;
  reactor::SystemMode mode = reactor::initial_mode(rcfg);
  std::size_t next_scripted = 0;

  for (std::int64_t tick = 0; tick < ticks; ++tick) {
    const double t = static_cast<double>(tick) * s.dt;
    TickFrame f;
    try {
      // 1. commands
      while (next_scripted < s.operator_commands.size() && s.operator_commands[next_scripted].time <= t + 1e-9) {
        f.commands.push_back(s.operator_commands[next_scripted++].command);
      }
      if (hooks.drain_commands) {
        for (auto& c : hooks.drain_commands(tick)) f.commands.push_back(std::move(c));
      }
      for (auto& c : f.commands) c.issued_at = tick;

      // 2. sense
      f.truth = sim::truth_at(s, ego, tick);
      Rng lidar_rng(derive_seed(s.seed, "lidar", static_cast<std::uint64_t>(tick)));
      f.cloud = sim::scan_lidar(f.truth, s.lidar, lidar_rng);
      f.raster = rasterize_scene(f.truth, s.raster);
      f.raster.tick = tick;
      for (auto& p : paths) f.ai_lists.push_back(p.step(f.truth, s.seed, s.dt));
      f.fallback_list = fallback::perceive(f.cloud, s.fallback);
      f.fallback_list.tick = tick;

      // 3. monitor
      const fm::SafeZone zone = fm::compute_safe_zone(f.truth.ego, s.zone);
      f.mode_before = mode;
      const auto voted_before = reactor::voter_filter(f.ai_lists, mode);
      f.fm = fm::validate(voted_before.lists, zone, s.thresholds, tick);
      if (model) f.am = am::detect(*model, f.raster);

      // 4. react
      auto step = reactor::step_reactor(mode, f.fm, f.am, f.commands, rcfg);
      mode = step.mode;
      f.mode = mode;
      f.actions = std::move(step.actions);

      // 5. vote and fuse
      if (f.actions.switch_position == reactor::SwitchPosition::deterministic) {
        f.output = f.fallback_list;
      } else {
        const auto voted = reactor::voter_filter(f.ai_lists, mode);
        const auto matches = fm::match_across_sources(voted.lists, s.thresholds);
        f.output = perception::fuse(voted.lists, matches, tick);
      }

      f.control = drive(s, f.truth.ego, mode, t);

      // 6. record
      const Json record = tick_record(f);
      runlog += encode_record_line(record);
      recorder.push(tick, record, f.raster, f.actions.record_triggers);
      records.push_back(record);
      f.open_incident = recorder.open_start();
    } catch (const Error& e) {
      throw Error("tick " + std::to_string(tick) + ": " + e.what());
    }

    // 7. telemetry
    if (hooks.telemetry) {
      try {
        hooks.telemetry(f);
      } catch (const std::exception& e) {
        throw Error("hook failed at tick " + std::to_string(tick) + ": " + e.what());
      }
    }

    // 8. drive
    ego = sim::step_ego(f.truth.ego, f.control, s.dt, s.limits.max_steering);

    result.rasters.push_back(f.raster);
    if (options.keep_frames) result.frames.push_back(std::move(f));
  }
  recorder.finish();

  result.incidents = recorder.incidents();
  result.alerts = recorder.alerts();
  result.summary = summarize(records);
  result.summary["alerts"] = result.alerts;
  Json incident_paths = Json::array();
  for (const auto& inc : result.incidents) {
    if (inc.written) incident_paths.push_back(fs::relative(inc.path, options.out_dir).generic_string());
  }
  result.summary["incident_files"] = incident_paths;
  result.runlog = std::move(runlog);

  if (!options.out_dir.empty()) {
    write_text(options.out_dir / "runlog.jsonl", result.runlog);
    write_text(options.out_dir / "summary.json", result.summary.dump(2) + "\n");
  }
  return result;
}

Json summarize(std::span<const Json> records) {
  if (records.empty() || records.front().value("type", "") != "run") {
    throw ParseError("run log must start with a run header");
  }
  const Json& header = records.front();
  Json s = {{"run_id", header.at("run_id")}, {"ticks", 0}, {"fm_flags", 0}, {"am_flags", 0},
            {"first_fm_flag_tick", nullptr}, {"first_am_flag_tick", nullptr}, {"record_triggers", 0}};
  Json trace = Json::array();
  Json rejected = Json::array();
  std::string last_state;
  double max_score = 0.0;
  const Json* last = nullptr;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const Json& r = records[i];
    if (r.value("type", "") != "tick") continue;
    last = &r;
    s["ticks"] = s["ticks"].get<int>() + 1;
    const auto tick = r.at("tick").get<std::int64_t>();
    if (r.at("fm").at("flag").get<bool>()) {
      s["fm_flags"] = s["fm_flags"].get<int>() + 1;
      if (s["first_fm_flag_tick"].is_null()) s["first_fm_flag_tick"] = tick;
    }
    if (!r.at("am").is_null()) {
      max_score = std::max(max_score, r.at("am").at("score").get<double>());
      if (r.at("am").at("flag").get<bool>()) {
        s["am_flags"] = s["am_flags"].get<int>() + 1;
        if (s["first_am_flag_tick"].is_null()) s["first_am_flag_tick"] = tick;
      }
    }
    s["record_triggers"] = s["record_triggers"].get<int>() + static_cast<int>(r.at("actions").at("record_triggers").size());
    const std::string state = r.at("mode").at("state").get<std::string>();
    if (state != last_state) {
      trace.push_back({{"tick", tick}, {"state", state}});
      last_state = state;
    }
    for (const auto& c : r.at("actions").at("command_results")) {
      if (!c.at("accepted").get<bool>()) rejected.push_back(c);
    }
  }
  s["mode_trace"] = trace;
  s["rejected_commands"] = rejected;
  s["max_anomaly_score"] = header.at("model").is_null() ? Json(nullptr) : Json(max_score);
  if (last) {
    s["final_mode"] = last->at("mode");
    s["final_speed"] = last->at("truth").at("ego").at("speed");
  } else {
    s["final_mode"] = nullptr;
    s["final_speed"] = nullptr;
  }
  return s;
}

Json summarize_runlog(const fs::path& runlog) {
  std::ifstream in(runlog);
  if (!in) throw IoError("cannot read " + runlog.string());
  std::vector<Json> records;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty()) records.push_back(parse_record_line(line, n));
  }
  return summarize(records);
}

namespace {

std::vector<Json> read_records(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot read " + file.string());
  std::vector<Json> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty()) out.push_back(parse_record_line(line, n));
  }
  return out;
}

}  // namespace

ReplayReport replay_incident(const fs::path& incident) {
  ReplayReport report;
  report.incident = incident;
  const auto records = read_records(incident);
  if (records.empty() || records.front().value("type", "") != "incident") {
    throw ParseError(incident.string() + ": missing incident header", 1);
  }
  const Json& header = records.front();
  const sim::Scenario s = sim::parse_scenario(header.at("scenario"));
  std::optional<am::AnomalyModel> model;
  if (!header.at("model_text").is_null()) model = am::parse_model(header.at("model_text").get<std::string>());
  const auto rcfg = reactor_config(s);

  std::optional<Json> previous_mode;
  std::int64_t previous_tick = -1;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const Json& r = records[i];
    if (r.value("type", "") != "tick") continue;
    ++report.ticks;
    const auto tick = r.at("tick").get<std::int64_t>();
    const std::string at = "tick " + std::to_string(tick) + ": ";
    const auto fail = [&](const std::string& what) { report.mismatches.push_back(at + what); };

    const SceneState truth = decode_scene(r.at("truth"));
    std::vector<ObjectList> lists;
    for (const auto& l : r.at("lists")) lists.push_back(decode_object_list(l));
    const PointCloud cloud = decode_cloud(r.at("cloud"));
    const SceneRaster raster = decode_raster(r.at("raster"));
    const reactor::SystemMode before = decode_mode(r.at("mode_before"));
    std::vector<reactor::OperatorCommand> commands;
    for (const auto& c : r.at("commands")) commands.push_back(decode_command(c));

    if (previous_mode && previous_tick + 1 == tick && *previous_mode != r.at("mode_before")) {
      fail("mode_before does not continue the previous tick's mode");
    }

    ObjectList fb = fallback::perceive(cloud, s.fallback);
    fb.tick = tick;
    if (encode(fb) != r.at("fallback")) fail("fallback output differs");

    const auto zone = fm::compute_safe_zone(truth.ego, s.zone);
    const auto voted = reactor::voter_filter(lists, before);
    const auto fmv = fm::validate(voted.lists, zone, s.thresholds, tick);
    if (encode(fmv) != r.at("fm")) fail("function monitor verdict differs");

    std::optional<am::AmVerdict> amv;
    if (model) amv = am::detect(*model, raster);
    if ((amv ? encode(*amv) : Json(nullptr)) != r.at("am")) fail("anomaly monitor verdict differs");

    const auto step = reactor::step_reactor(before, fmv, amv, commands, rcfg);
    if (encode(step.mode) != r.at("mode")) fail("mode differs");
    if (encode(step.actions) != r.at("actions")) fail("reactor actions differ");

    previous_mode = r.at("mode");
    previous_tick = tick;
  }
  if (report.ticks == 0) report.mismatches.push_back("incident holds no tick records");
  return report;
}

std::vector<SceneRaster> incident_rasters(const fs::path& incident_or_dir) {
  std::vector<fs::path> files;
  if (fs::is_directory(incident_or_dir)) {
    for (const auto& e : fs::recursive_directory_iterator(incident_or_dir)) {
      if (e.is_regular_file() && e.path().extension() == ".inc") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(incident_or_dir);
  }
  std::vector<SceneRaster> out;
  for (const auto& f : files) {
    auto r = am::read_raster_records(f);
    out.insert(out.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
  }
  return out;
}

}  // namespace depcage::pipeline
