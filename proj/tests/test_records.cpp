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

#include <fstream>

#include "digest.hpp"
#include "doctest.h"
#include "errors.hpp"
#include "scene_helpers.hpp"
#include "records.hpp"
#include "rng.hpp"
#include "scenario.hpp"

using namespace depcage;
using testing::rect;

namespace {

template <class T, class Decode>
void round_trip(const T& value, Decode decode) {
  const Json j = encode(value);
  const std::string line = encode_record_line(j);
  CHECK(line.back() == '\n');
  CHECK(line.find('\n') == line.size() - 1);
  const T back = decode(parse_record_line(line), "");
  CHECK(back == value);
  CHECK(encode_record_line(encode(back)) == line);
}

DetectedObject random_detection(Rng& rng, const std::string& source) {
  DetectedObject d;
  d.object_class = static_cast<ObjectClass>(rng.below(6));
  d.center = {rng.uniform(-50, 50), rng.uniform(-50, 50)};
  d.length = rng.uniform(0.1, 10);
  d.width = rng.uniform(0.1, 5);
  d.heading = rng.uniform(-3, 3);
  d.confidence = rng.uniform();
  d.source = source;
  return d;
}

Json minimal_scenario() {
  return Json::parse(R"({"name":"s","duration":1.0,"perception_models":[{"id":"camera","modality":"camera"}]})");
}

}  // namespace

TEST_CASE("records: every type round-trips") {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    EgoState e;
    e.position = {rng.uniform(-1e3, 1e3), rng.uniform(-1e3, 1e3)};
    e.heading = rng.uniform(-3, 3);
    e.speed = rng.uniform(0, 30);
    e.steering_angle = rng.uniform(-0.5, 0.5);
    round_trip(e, decode_ego);

    TruthObject o;
    o.id = "o" + std::to_string(trial);
    o.visual_class = static_cast<ObjectClass>(rng.below(6));
    o.physical_class = static_cast<PhysicalClass>(rng.below(3));
    o.pose_tag = static_cast<PoseTag>(rng.below(4));
    o.footprint = rect(rng.uniform(-9, 9), rng.uniform(-9, 9), rng.uniform(0.1, 5), rng.uniform(0.1, 5));
    o.velocity = {rng.normal(), rng.normal()};
    round_trip(o, decode_truth);

    SceneState s;
    s.tick = trial;
    s.time = trial * 0.05;
    s.ego = e;
    s.objects = {o, o};
    round_trip(s, decode_scene);

    auto d = random_detection(rng, "camera");
    round_trip(d, decode_detection);
    d.contributors = {"a", "b"};
    round_trip(d, decode_detection);

    ObjectList l;
    l.tick = trial;
    l.source = "camera";
    for (int k = 0; k < 3; ++k) l.objects.push_back(random_detection(rng, "camera"));
    round_trip(l, decode_object_list);

    PointCloud c;
    c.tick = trial;
    c.points = {{{1.5, 2.5}, 0.25}, {{-3.0, 1e-7}, std::nullopt}};
    round_trip(c, decode_cloud);

    SceneRaster r;
    r.grid = 2;
    r.tick = trial;
    r.cells = {0.0, rng.uniform(), 1.0, rng.uniform()};
    round_trip(r, decode_raster);

    fm::FmVerdict v;
    v.tick = trial;
    v.flag = true;
    v.implicated_sources = {"a", "b"};
    fm::Evidence ev;
    ev.members = {{"a", random_detection(rng, "a")}};
    ev.max_center_delta = rng.uniform();
    ev.violations = {"class_incompatible"};
    ev.implicated = {"a"};
    v.per_object_evidence = {ev};
    v.zone_used.clear_zone = rect(1, 0, 2, 2);
    v.zone_used.focus_zone = rect(1, 0, 3, 3);
    v.zone_used.stopping_distance = rng.uniform();
    round_trip(v, decode_fm_verdict);

    round_trip(am::AmVerdict{trial, rng.uniform(), trial % 2 == 0, 3}, decode_am_verdict);

    reactor::SystemMode m;
    m.state = reactor::State::DegradedPrimary;
    m.active_sources = {"a"};
    m.excluded_sources = {"b"};
    m.responsibility = reactor::Responsibility::safety_operator;
    m.handover_acked = true;
    round_trip(m, decode_mode);

    reactor::OperatorCommand cmd{"set_mode", {{"mode", "MinimalRisk"}}, "c-1", 7};
    round_trip(cmd, decode_command);
    round_trip(reactor::CommandResult{"c-1", false, "nope"}, decode_command_result);

    reactor::Actions a;
    a.voter_exclusions = {"b"};
    a.switch_position = reactor::SwitchPosition::deterministic;
    a.speed_target = 0.0;
    a.record_triggers = {{"fm", 3, {"implicated:b"}}};
    a.command_results = {{"c-1", true, ""}};
    a.escalation = true;
    round_trip(a, decode_actions);
  }
  round_trip(RasterWindow{}, decode_window);
  round_trip(fm::SafeZoneParams{}, decode_zone_params);
  round_trip(fm::HaraThresholds{}, decode_thresholds);
  round_trip(am::TrainParams{}, decode_train_params);
  round_trip(reactor::RecorderConfig{}, decode_recorder);
  round_trip(fallback::ClusterParams{}, decode_cluster_params);
  round_trip(fallback::FallbackConfig{}, decode_fallback);
  perception::PerceptionModelConfig pm;
  pm.id = "cam";
  perception::Directive d;
  d.kind = perception::Directive::Kind::misclassify;
  d.start = 1.0;
  pm.error_process.push_back(d);
  round_trip(pm, decode_model_config);
}

TEST_CASE("records: encoding is canonical") {
  const Json a = Json::parse(R"({"b":1,"a":[0.1,2.0]})");
  CHECK(encode_record_line(a) == "{\"a\":[0.1,2.0],\"b\":1}\n");
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0 / 3.0) == "0.3333333333333333");
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.normal(0, 1e6) * std::pow(10.0, rng.uniform(-12, 12));
    REQUIRE(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("records: parse and field errors carry their location") {
  try {
    parse_record_line("{\"a\":", 7);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 7);
  }
  try {
    parse_document("{\n\"a\": 1,\n\"b\": ]\n}");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  try {
    Json j = encode(DetectedObject{});
    j["centre"] = Json::array({1, 2});
    decode_detection(j, "lists/0/objects/2");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.field() == "lists/0/objects/2/centre");
  }
  try {
    decode_detection(Json::parse(R"({"object_class":"spaceship"})"), "x");
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.field() == "x/object_class");
  }
  CHECK_THROWS_AS(decode_vec2(Json::parse("[1]"), "p"), ValidationError);
  CHECK_THROWS_AS(decode_raster(Json::parse(R"({"grid":2,"cells":[0,0,0]})"), "r"), ValidationError);
  CHECK_THROWS_AS(decode_raster(Json::parse(R"({"grid":1,"cells":[1.5]})"), "r"), ValidationError);
}

TEST_CASE("scenario: validation reports field paths") {
  CHECK_NOTHROW(sim::parse_scenario(minimal_scenario()));
  const auto s = sim::parse_scenario(minimal_scenario());
  CHECK(sim::tick_count(s) == 20);

  const std::vector<std::pair<std::string, std::string>> cases{
      {R"({"dt":0})", "dt"},
      {R"({"duration":-1})", "duration"},
      {R"({"name":"has space"})", "name"},
      {R"({"perception_models":[]})", "perception_models"},
      {R"({"perception_models":[{"id":"a","modality":"camera"},{"id":"a","modality":"lidar"}]})", "perception_models/1/id"},
      {R"({"ego_script":[{"time":2,"target_speed":1},{"time":1,"target_speed":1}]})", "ego_script/1/time"},
      {R"({"objects":[{"id":"x","visual_class":"vehicle","physical_class":"vehicle","footprint":[[0,0],[1,0],[2,0]]}]})", "objects/0/footprint"},
      {R"({"fault_script":[{"model":"ghost","kind":"drop","id":"x"}]})", "fault_script/0/model"},
      {R"({"lidar":{"ray_count":0}})", "lidar/ray_count"},
      {R"({"function_monitor":{"safe_zone":{"a_max":0}}})", "function_monitor/safe_zone/a_max"},
      {R"({"recorder":{"pre_trigger_window":0}})", "recorder/pre_trigger_window"},
      {R"({"surprise":true})", "surprise"},
  };
  for (const auto& [patch, field] : cases) {
    Json doc = minimal_scenario();
    doc.merge_patch(Json::parse(patch));
    INFO(patch);
    try {
      sim::parse_scenario(doc);
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(e.field() == field);
    }
  }
}

TEST_CASE("scenario: config merge and file errors") {
  testing::TempDir dir("scn");
  { std::ofstream(dir / "s.json") << minimal_scenario().dump(2); }
  { std::ofstream(dir / "c.json") << R"({"seed": 42, "duration": 2.0})"; }
  { std::ofstream(dir / "bad.json") << "{\n  \"name\": \"s\",\n  oops\n}"; }
  const auto s = sim::load_scenario(dir / "s.json", {dir / "c.json"});
  CHECK(s.seed == 42);
  CHECK(sim::tick_count(s) == 40);
  try {
    sim::load_scenario(dir / "bad.json");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("bad.json") != std::string::npos);
  }
  CHECK_THROWS_AS(sim::load_scenario(dir / "missing.json"), IoError);
}

TEST_CASE("scenario: every shipped fixture loads") {
  for (const char* name : {"benign.json", "poster.json", "lying_pedestrian.json", "three_source_fault.json",
                           "all_sources_fault.json"}) {
    INFO(name);
    CHECK_NOTHROW(sim::load_scenario(testing::fixture(name)));
  }
}

TEST_CASE("scenario: scripted motion and ego targets") {
  Json doc = minimal_scenario();
  doc.merge_patch(Json::parse(R"({
    "ego": {"speed": 5.0},
    "ego_script": [{"time": 0.5, "target_speed": 2.0}],
    "objects": [{"id": "p", "visual_class": "pedestrian", "physical_class": "pedestrian", "footprint": [[10,0],[11,0],[11,1],[10,1]],
                 "velocity": [1, 0], "motion": [{"time": 0.5, "velocity": [0, 2]}]}]
  })"));
  const auto s = sim::parse_scenario(doc);
  CHECK(sim::ego_target(s, 0.2).target_speed == 5.0);
  CHECK(sim::ego_target(s, 0.6).target_speed == 2.0);
  const auto t = sim::truth_at(s, s.ego, 19);  // t = 0.95 s
  const auto c = centroid(t.objects[0].footprint);
  CHECK(c.x == doctest::Approx(10.5 + 0.5));
  CHECK(c.y == doctest::Approx(0.5 + 2 * 0.45));
}
