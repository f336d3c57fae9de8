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

#include "records.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "errors.hpp"

namespace depcage {

std::string encode_record_line(const Json& record) { return record.dump() + "\n"; }

Json parse_record_line(std::string_view text, std::size_t line) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("malformed record: ") + e.what(), line);
  }
}

Json parse_document(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const std::size_t line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + upto, '\n'));
    std::string msg = e.what();
    // drop nlohmann's "[json.exception.parse_error.101] parse error at line L, column C: " prefix
    if (const auto colon = msg.find(": "); colon != std::string::npos) msg = msg.substr(colon + 2);
    throw ParseError(msg, line);
  }
}

std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "/" + key;
}

namespace {

/// Re-roots a validator's field path under `path`.
template <class F>
void scoped_validate(const std::string& path, F&& f) {
  try {
    f();
  } catch (const ValidationError& e) {
    throw ValidationError(join_path(path, e.field()), e.message());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// JsonReader

JsonReader::JsonReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
  if (!j_.is_object()) throw ValidationError(path_, "expected an object");
}

bool JsonReader::has(const char* key) const { return j_.contains(key); }

std::string JsonReader::path(const char* key) const { return join_path(path_, key); }

const Json* JsonReader::child(const char* key) {
  seen_.insert(key);
  const auto it = j_.find(key);
  return it == j_.end() ? nullptr : &*it;
}

const Json& JsonReader::required(const char* key) {
  const Json* c = child(key);
  if (!c) throw ValidationError(path(key), "is required");
  return *c;
}

double JsonReader::number(const char* key) {
  const Json& c = required(key);
  if (!c.is_number()) throw ValidationError(path(key), "expected a number");
  const double v = c.get<double>();
  if (!std::isfinite(v)) throw ValidationError(path(key), "must be finite");
  return v;
}

double JsonReader::number(const char* key, double fallback) { return has(key) ? number(key) : (seen_.insert(key), fallback); }

std::int64_t JsonReader::integer(const char* key) {
  const Json& c = required(key);
  if (c.is_number_integer()) return c.get<std::int64_t>();
  if (c.is_number_float()) {
    const double v = c.get<double>();
    if (std::isfinite(v) && std::floor(v) == v && std::abs(v) < 9.0e15) return static_cast<std::int64_t>(v);
  }
  throw ValidationError(path(key), "expected an integer");
}

std::int64_t JsonReader::integer(const char* key, std::int64_t fallback) {
  return has(key) ? integer(key) : (seen_.insert(key), fallback);
}

bool JsonReader::boolean(const char* key, bool fallback) {
  const Json* c = child(key);
  if (!c) return fallback;
  if (!c->is_boolean()) throw ValidationError(path(key), "expected true or false");
  return c->get<bool>();
}

std::string JsonReader::string(const char* key) {
  const Json& c = required(key);
  if (!c.is_string()) throw ValidationError(path(key), "expected a string");
  return c.get<std::string>();
}

std::string JsonReader::string(const char* key, const std::string& fallback) {
  return has(key) ? string(key) : (seen_.insert(key), fallback);
}

void JsonReader::done() const {
  for (const auto& [key, value] : j_.items()) {
    if (!seen_.contains(key)) throw ValidationError(join_path(path_, key), "unknown field");
  }
}

// ---------------------------------------------------------------------------
// helpers

namespace {

std::string index_path(const std::string& base, std::size_t i) { return join_path(base, std::to_string(i)); }

const Json& as_array(const Json& j, const std::string& path) {
  if (!j.is_array()) throw ValidationError(path, "expected an array");
  return j;
}

std::vector<std::string> decode_strings(const Json& j, const std::string& path) {
  std::vector<std::string> out;
  std::size_t i = 0;
  for (const auto& e : as_array(j, path)) {
    if (!e.is_string()) throw ValidationError(index_path(path, i), "expected a string");
    out.push_back(e.get<std::string>());
    ++i;
  }
  return out;
}

std::set<std::string> decode_string_set(const Json& j, const std::string& path) {
  const auto v = decode_strings(j, path);
  return {v.begin(), v.end()};
}

template <class T, class F>
T decode_enum(const Json& j, const std::string& path, F from, std::string_view what) {
  if (!j.is_string()) throw ValidationError(path, "expected a string");
  const auto v = from(j.get<std::string>());
  if (!v) throw ValidationError(path, "unknown " + std::string(what) + " '" + j.get<std::string>() + "'");
  return *v;
}

double finite(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ValidationError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ValidationError(path, "must be finite");
  return v;
}

std::string_view shape_name(fallback::Shape s) { return s == fallback::Shape::rectangle ? "rectangle" : "cylinder"; }

std::optional<fallback::Shape> shape_from(std::string_view s) {
  if (s == "rectangle") return fallback::Shape::rectangle;
  if (s == "cylinder") return fallback::Shape::cylinder;
  return std::nullopt;
}

std::string_view method_name(fallback::ClusterMethod m) {
  return m == fallback::ClusterMethod::dbscan ? "dbscan" : "euclidean";
}

std::optional<fallback::ClusterMethod> method_from(std::string_view s) {
  if (s == "dbscan") return fallback::ClusterMethod::dbscan;
  if (s == "euclidean") return fallback::ClusterMethod::euclidean;
  return std::nullopt;
}

std::optional<perception::Directive::Kind> directive_kind_from(std::string_view s) {
  using K = perception::Directive::Kind;
  for (const K k : {K::misclassify, K::drop, K::phantom, K::freeze}) {
    if (perception::to_string(k) == s) return k;
  }
  return std::nullopt;
}

Json string_array(const auto& items) {
  Json out = Json::array();
  for (const auto& s : items) out.push_back(s);
  return out;
}

}  // namespace

ObjectClass decode_object_class(const Json& j, const std::string& path) {
  return decode_enum<ObjectClass>(j, path, object_class_from, "object class");
}

// ---------------------------------------------------------------------------
// geometry and scene

Json encode(Vec2 v) { return Json::array({v.x, v.y}); }

Json encode(std::span<const Vec2> poly) {
  Json out = Json::array();
  for (const Vec2 p : poly) out.push_back(encode(p));
  return out;
}

Vec2 decode_vec2(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) throw ValidationError(path, "expected [x, y]");
  return {finite(j[0], index_path(path, 0)), finite(j[1], index_path(path, 1))};
}

Polygon decode_polygon(const Json& j, const std::string& path) {
  Polygon out;
  std::size_t i = 0;
  for (const auto& p : as_array(j, path)) out.push_back(decode_vec2(p, index_path(path, i++)));
  return out;
}

Json encode(const EgoState& e) {
  return {{"position", encode(e.position)}, {"heading", e.heading},     {"speed", e.speed},
          {"steering_angle", e.steering_angle}, {"wheelbase", e.wheelbase}, {"width", e.width},
          {"length", e.length}};
}

EgoState decode_ego(const Json& j, const std::string& path) {
  JsonReader r(j, path);
  EgoState e;
  if (const Json* p = r.child("position")) e.position = decode_vec2(*p, r.path("position"));
  e.heading = r.number("heading", e.heading);
  e.speed = r.number("speed", e.speed);
  e.steering_angle = r.number("steering_angle", e.steering_angle);
  e.wheelbase = r.number("wheelbase", e.wheelbase);
  e.width = r.number("width", e.width);
  e.length = r.number("length", e.length);
  r.done();
  return e;
}

Json encode(const TruthObject& o) {
  return {{"id", o.id},
          {"visual_class", to_string(o.visual_class)},
          {"physical_class", to_string(o.physical_class)},
          {"footprint", encode(o.footprint)},
          {"pose_tag", to_string(o.pose_tag)},
          {"velocity", encode(o.velocity)}};
}

TruthObject decode_truth(const Json& j, const std::string& path) {
  JsonReader r(j, path);
  TruthObject o;
  o.id = r.string("id");
  o.visual_class = decode_object_class(r.required("visual_class"), r.path("visual_class"));
  o.physical_class = decode_enum<PhysicalClass>(r.required("physical_class"), r.path("physical_class"),
                                                physical_class_from, "physical class");
  o.footprint = decode_polygon(r.required("footprint"), r.path("footprint"));
  if (const Json* p = r.child("pose_tag")) o.pose_tag = decode_enum<PoseTag>(*p, r.path("pose_tag"), pose_tag_from, "pose tag");
  if (const Json* v = r.child("velocity")) o.velocity = decode_vec2(*v, r.path("velocity"));
  r.done();
  return o;
}

Json encode(const SceneState& s) {
  Json objects = Json::array();
  for (const auto& o : s.objects) objects.push_back(encode(o));
  return {{"tick", s.tick}, {"time", s.time}, {"ego", encode(s.ego)}, {"objects", objects}};
}

SceneState decode_scene(const Json& j, const std::string& path) {
  JsonReader r(j, path);
  SceneState s;
  s.tick = r.integer("tick", 0);
  s.time = r.number("time", 0.0);
  if (const Json* e = r.child("ego")) s.ego = decode_ego(*e, r.path("ego"));
  if (const Json* objs = r.child("objects")) {
    std::size_t i = 0;
    for (const auto& o : as_array(*objs, r.path("objects"))) s.objects.push_back(decode_truth(o, index_path(r.path("objects"), i++)));
  }
  r.done();
  return s;
}

Json encode(const DetectedObject& o) {
  Json j = {{"object_class", to_string(o.object_class)},
            {"center", encode(o.center)},
            {"extent", Json::array({o.length, o.width})},
            {"heading", o.heading},
            {"confidence", o.confidence},
            {"source", o.source}};
  if (!o.contributors.empty()) j["contributors"] = string_array(o.contributors);
  return j;
}

DetectedObject decode_detection(const Json& j, const std::string& path) {
  JsonReader r(j, path);
  DetectedObject o;
  o.object_class = decode_object_class(r.required("object_class"), r.path("object_class"));
  o.center = decode_vec2(r.required("center"), r.path("center"));
  const Vec2 ext = decode_vec2(r.required("extent"), r.path("extent"));
  o.length = ext.x;
  o.width = ext.y;
  o.heading = r.number("heading", 0.0);
  o.confidence = r.number("confidence", 1.0);
  o.source = r.string("source", "");
  if (const Json* c = r.child("contributors")) o.contributors = decode_strings(*c, r.path("contributors"));
  r.done();
  return o;
}

Json encode(const ObjectList& l) {
  Json objects = Json::array();
  for (const auto& o : l.objects) objects.push_back(encode(o));
  return {{"tick", l.tick}, {"source", l.source}, {"objects", objects}};
}

ObjectList decode_object_list(const Json& j, const std::string& path) {
  JsonReader r(j, path);
  ObjectList l;
  l.tick = r.integer("tick", 0);
  l.source = r.string("source");
  if (const Json* objs = r.child("objects")) {
    std::size_t i = 0;
    for (const auto& o : as_array(*objs, r.path("objects"))) {
      l.objects.push_back(decode_detection(o, index_path(r.path("objects"), i++)));
    }
  }
  r.done();
  return l;
}

Json encode(const PointCloud& c) {
  Json points = Json::array();
  for (const auto& p : c.points) {
    Json e = encode(p.position);
    if (p.intensity) e.push_back(*p.intensity);
    points.push_back(e);
  }
  return {{"tick", c.tick}, {"points", points}};
}

PointCloud decode_cloud(const Json& j, const std::string& path) {
  JsonReader r(j, path);
  PointCloud c;
  c.tick = r.integer("tick", 0);
  if (const Json* pts = r.child("points")) {
    std::size_t i = 0;
    for (const auto& p : as_array(*pts, r.path("points"))) {
      const std::string pp = index_path(r.path("points"), i++);
      if (!p.is_array() || (p.size() != 2 && p.size() != 3)) throw ValidationError(pp, "expected [x, y] or [x, y, intensity]");
      LidarPoint lp{{finite(p[0], pp), finite(p[1], pp)}, std::nullopt};
      if (p.size() == 3) lp.intensity = finite(p[2], pp);
      c.points.push_back(lp);
    }
  }
  r.done();
  return c;
}

Json encode(const RasterWindow& w) {
  return {{"x_min", w.x_min}, {"y_min", w.y_min}, {"width", w.width}, {"height", w.height}, {"grid", w.grid}};
}

RasterWindow decode_window(const Json& j, const std::string& path) {
  JsonReader r(j, path);
  RasterWindow w;
  w.x_min = r.number("x_min", w.x_min);
  w.y_min = r.number("y_min", w.y_min);
  w.width = r.number("width", w.width);
  w.height = r.number("height", w.height);
  w.grid = static_cast<int>(r.integer("grid", w.grid));
  r.done();
  return w;
}

Json encode(const SceneRaster& s) { return {{"tick", s.tick}, {"grid", s.grid}, {"cells", s.cells}}; }

SceneRaster decode_raster(const Json& j, const std::string& path) {
  JsonReader r(j, path);
  SceneRaster s;
  s.tick = r.integer("tick", 0);
  s.grid = static_cast<int>(r.integer("grid"));
  const Json& cells = as_array(r.required("cells"), r.path("cells"));
  if (s.grid < 1 || cells.size() != static_cast<std::size_t>(s.grid) * s.grid) {
    throw ValidationError(r.path("cells"), "expected grid*grid values");
  }
  s.cells.reserve(cells.size());
  std::size_t i = 0;
  for (const auto& c : cells) {
    const double v = finite(c, index_path(r.path("cells"), i++));
    if (v < 0.0 || v > 1.0) throw ValidationError(index_path(r.path("cells"), i - 1), "must lie in [0, 1]");
    s.cells.push_back(v);
  }
  r.done();
  return s;
}

// ---------------------------------------------------------------------------
// function monitor

Json encode(const fm::SafeZone& z) {
  return {{"clear_zone", encode(z.clear_zone)},
          {"focus_zone", encode(z.focus_zone)},
          {"stopping_distance", z.stopping_distance}};
}

fm::SafeZone decode_zone(const Json& j, const std::string& path) {
  JsonReader r(j, path);
  fm::SafeZone z;
  z.clear_zone = decode_polygon(r.required("clear_zone"), r.path("clear_zone"));
  z.focus_zone = decode_polygon(r.required("focus_zone"), r.path("focus_zone"));
  z.stopping_distance = r.number("stopping_distance", 0.0);
  r.done();
  return z;
}

Json encode(const fm::Evidence& e) {
  Json members = Json::array();
  for (const auto& m : e.members) members.push_back({{"source", m.source}, {"object", encode(m.object)}});
  return {{"members", members},
          {"max_center_delta", e.max_center_delta},
          {"max_extent_delta", e.max_extent_delta},
          {"violations", string_array(e.violations)},
          {"implicated", string_array(e.implicated)}};
}

fm::Evidence decode_evidence(const Json& j, const std::string& path) {
  JsonReader r(j, path);
  fm::Evidence e;
  if (const Json* ms = r.child("members")) {
    std::size_t i = 0;
    for (const auto& m : as_array(*ms, r.path("members"))) {
      JsonReader mr(m, index_path(r.path("members"), i++));
      fm::EvidenceMember em;
      em.source = mr.string("source");
      em.object = decode_detection(mr.required("object"), mr.path("object"));
      mr.done();
      e.members.push_back(std::move(em));
    }
  }
  e.max_center_delta = r.number("max_center_delta", 0.0);
  e.max_extent_delta = r.number("max_extent_delta", 0.0);
  if (const Json* v = r.child("violations")) e.violations = decode_strings(*v, r.path("violations"));
  if (const Json* v = r.child("implicated")) e.implicated = decode_string_set(*v, r.path("implicated"));
  r.done();
  return e;
}

Json encode(const fm::FmVerdict& v) {
  Json evidence = Json::array();
  for (const auto& e : v.per_object_evidence) evidence.push_back(encode(e));
  return {{"tick", v.tick},
          {"flag", v.flag},
          {"implicated_sources", string_array(v.implicated_sources)},
          {"evidence", evidence},
          {"zone_used", encode(v.zone_used)}};
}

fm::FmVerdict decode_fm_verdict(const Json& j, const std::string& path) {
  JsonReader r(j, path);
  fm::FmVerdict v;
  v.tick = r.integer("tick", 0);
  v.flag = r.boolean("flag", false);
  if (const Json* s = r.child("implicated_sources")) v.implicated_sources = decode_string_set(*s, r.path("implicated_sources"));
  if (const Json* ev = r.child("evidence")) {
    std::size_t i = 0;
    for (const auto& e : as_array(*ev, r.path("evidence"))) {
      v.per_object_evidence.push_back(decode_evidence(e, index_path(r.path("evidence"), i++)));
    }
  }
  if (const Json* z = r.child("zone_used")) v.zone_used = decode_zone(*z, r.path("zone_used"));
  r.done();
  return v;
}

Json encode(const fm::SafeZoneParams& p) {
  return {{"a_max", p.a_max},
          {"t_react", p.t_react},
          {"lateral_margin", p.lateral_margin},
          {"standstill_margin", p.standstill_margin},
          {"focus_extension", p.focus_extension}};
}

fm::SafeZoneParams decode_zone_params(const Json& j, const std::string& path) {
  JsonReader r(j, path);
  fm::SafeZoneParams p;
  p.a_max = r.number("a_max", p.a_max);
  p.t_react = r.number("t_react", p.t_react);
  p.lateral_margin = r.number("lateral_margin", p.lateral_margin);
  p.standstill_margin = r.number("standstill_margin", p.standstill_margin);
  p.focus_extension = r.number("focus_extension", p.focus_extension);
  r.done();
  scoped_validate(path, [&] { fm::validate(p); });
  return p;
}

Json encode(const fm::HaraThresholds& t) {
  Json compat = Json::array();
  for (const auto& [a, b] : t.class_compatibility.pairs()) compat.push_back(Json::array({to_string(a), to_string(b)}));
  Json j = {{"max_center_delta", t.max_center_delta},
            {"max_extent_delta", t.max_extent_delta},
            {"class_compatibility", compat},
            {"gating_distance", t.gating_distance},
            {"min_agreeing_sources", nullptr}};
  if (t.min_agreeing_sources) j["min_agreeing_sources"] = *t.min_agreeing_sources;
  return j;
}

fm::HaraThresholds decode_thresholds(const Json& j, const std::string& path) {
  JsonReader r(j, path);
  fm::HaraThresholds t;
  t.max_center_delta = r.number("max_center_delta", t.max_center_delta);
  t.max_extent_delta = r.number("max_extent_delta", t.max_extent_delta);
  t.gating_distance = r.number("gating_distance", t.gating_distance);
  if (const Json* c = r.child("class_compatibility")) {
    t.class_compatibility = fm::ClassCompatibility{};
    std::size_t i = 0;
    for (const auto& pair : as_array(*c, r.path("class_compatibility"))) {
      const std::string pp = index_path(r.path("class_compatibility"), i++);
      if (!pair.is_array() || pair.size() != 2) throw ValidationError(pp, "expected [class, class]");
      t.class_compatibility.allow(decode_object_class(pair[0], pp), decode_object_class(pair[1], pp));
    }
  }
  if (const Json* m = r.child("min_agreeing_sources"); m && !m->is_null()) {
    t.min_agreeing_sources = static_cast<int>(r.integer("min_agreeing_sources"));
  }
  r.done();
  scoped_validate(path, [&] { fm::validate(t); });
  return t;
}

// ---------------------------------------------------------------------------
// anomaly monitor

Json encode(const am::AmVerdict& v) {
  return {{"tick", v.tick}, {"score", v.score}, {"flag", v.flag}, {"model_version", v.model_version}};
}

am::AmVerdict decode_am_verdict(const Json& j, const std::string& path) {
  JsonReader r(j, path);
  am::AmVerdict v;
  v.tick = r.integer("tick", 0);
  v.score = r.number("score", 0.0);
  v.flag = r.boolean("flag", false);
  v.model_version = static_cast<int>(r.integer("model_version", 0));
  r.done();
  return v;
}

Json encode(const am::TrainParams& p) {
  return {{"learning_rate", p.learning_rate},
          {"epochs", p.epochs},
          {"batch_size", p.batch_size},
          {"hidden", p.hidden},
          {"seed", p.seed}};
}

am::TrainParams decode_train_params(const Json& j, const std::string& path) {
  JsonReader r(j, path);
  am::TrainParams p;
  p.learning_rate = r.number("learning_rate", p.learning_rate);
  p.epochs = static_cast<int>(r.integer("epochs", p.epochs));
  p.batch_size = static_cast<int>(r.integer("batch_size", p.batch_size));
  p.hidden = static_cast<int>(r.integer("hidden", p.hidden));
  p.seed = static_cast<std::uint64_t>(r.integer("seed", static_cast<std::int64_t>(p.seed)));
  r.done();
  return p;
}

// ---------------------------------------------------------------------------
// reactor

Json encode(const reactor::SystemMode& m) {
  return {{"state", reactor::to_string(m.state)},
          {"active_sources", string_array(m.active_sources)},
          {"excluded_sources", string_array(m.excluded_sources)},
          {"responsibility", reactor::to_string(m.responsibility)},
          {"handover_acked", m.handover_acked}};
}

reactor::SystemMode decode_mode(const Json& j, const std::string& path) {
  JsonReader r(j, path);
  reactor::SystemMode m;
  m.state = decode_enum<reactor::State>(r.required("state"), r.path("state"), reactor::state_from, "state");
  if (const Json* s = r.child("active_sources")) m.active_sources = decode_string_set(*s, r.path("active_sources"));
  if (const Json* s = r.child("excluded_sources")) m.excluded_sources = decode_string_set(*s, r.path("excluded_sources"));
  if (const Json* s = r.child("responsibility")) {
    m.responsibility = decode_enum<reactor::Responsibility>(*s, r.path("responsibility"), reactor::responsibility_from,
                                                            "responsibility");
  }
  m.handover_acked = r.boolean("handover_acked", false);
  r.done();
  return m;
}

Json encode(const reactor::OperatorCommand& c) {
  Json args = Json::object();
  for (const auto& [k, v] : c.args) args[k] = v;
  return {{"kind", c.kind}, {"args", args}, {"command_id", c.command_id}, {"issued_at", c.issued_at}};
}

reactor::OperatorCommand decode_command(const Json& j, const std::string& path) {
  JsonReader r(j, path);
  reactor::OperatorCommand c;
  c.kind = r.string("kind");
  c.command_id = r.string("command_id");
  if (c.command_id.empty()) throw ValidationError(r.path("command_id"), "must not be empty");
  c.issued_at = r.integer("issued_at", 0);
  if (const Json* a = r.child("args")) {
    if (!a->is_object()) throw ValidationError(r.path("args"), "expected an object");
    for (const auto& [k, v] : a->items()) {
      if (!v.is_string()) throw ValidationError(join_path(r.path("args"), k), "expected a string");
      c.args[k] = v.get<std::string>();
    }
  }
  r.done();
  return c;
}

Json encode(const reactor::CommandResult& r) {
  return {{"command_id", r.command_id}, {"accepted", r.accepted}, {"reason", r.reason}};
}

reactor::CommandResult decode_command_result(const Json& j, const std::string& path) {
  JsonReader r(j, path);
  reactor::CommandResult c;
  c.command_id = r.string("command_id");
  c.accepted = r.boolean("accepted", false);
  c.reason = r.string("reason", "");
  r.done();
  return c;
}

Json encode(const reactor::RecordTrigger& t) {
  return {{"monitor", t.monitor}, {"tick", t.tick}, {"detail", string_array(t.detail)}};
}

reactor::RecordTrigger decode_trigger(const Json& j, const std::string& path) {
  JsonReader r(j, path);
  reactor::RecordTrigger t;
  t.monitor = r.string("monitor");
  t.tick = r.integer("tick", 0);
  if (const Json* d = r.child("detail")) t.detail = decode_strings(*d, r.path("detail"));
  r.done();
  return t;
}

Json encode(const reactor::Actions& a) {
  Json triggers = Json::array();
  for (const auto& t : a.record_triggers) triggers.push_back(encode(t));
  Json results = Json::array();
  for (const auto& c : a.command_results) results.push_back(encode(c));
  return {{"voter_exclusions", string_array(a.voter_exclusions)},
          {"switch", reactor::to_string(a.switch_position)},
          {"speed_target", a.speed_target ? Json(*a.speed_target) : Json(nullptr)},
          {"record_triggers", triggers},
          {"command_results", results},
          {"escalation", a.escalation}};
}

reactor::Actions decode_actions(const Json& j, const std::string& path) {
  JsonReader r(j, path);
  reactor::Actions a;
  if (const Json* v = r.child("voter_exclusions")) a.voter_exclusions = decode_string_set(*v, r.path("voter_exclusions"));
  const std::string sw = r.string("switch", "ai");
  if (sw != "ai" && sw != "deterministic") throw ValidationError(r.path("switch"), "expected ai or deterministic");
  a.switch_position = sw == "ai" ? reactor::SwitchPosition::ai : reactor::SwitchPosition::deterministic;
  if (const Json* s = r.child("speed_target"); s && !s->is_null()) a.speed_target = finite(*s, r.path("speed_target"));
  if (const Json* ts = r.child("record_triggers")) {
    std::size_t i = 0;
    for (const auto& t : as_array(*ts, r.path("record_triggers"))) {
      a.record_triggers.push_back(decode_trigger(t, index_path(r.path("record_triggers"), i++)));
    }
  }
  if (const Json* cs = r.child("command_results")) {
    std::size_t i = 0;
    for (const auto& c : as_array(*cs, r.path("command_results"))) {
      a.command_results.push_back(decode_command_result(c, index_path(r.path("command_results"), i++)));
    }
  }
  a.escalation = r.boolean("escalation", false);
  r.done();
  return a;
}

Json encode(const reactor::RecorderConfig& c) {
  return {{"pre_trigger_window", c.pre_trigger_window}, {"post_trigger_window", c.post_trigger_window}};
}

reactor::RecorderConfig decode_recorder(const Json& j, const std::string& path) {
  JsonReader r(j, path);
  reactor::RecorderConfig c;
  c.pre_trigger_window = r.number("pre_trigger_window", c.pre_trigger_window);
  c.post_trigger_window = r.number("post_trigger_window", c.post_trigger_window);
  r.done();
  scoped_validate(path, [&] { reactor::validate(c); });
  return c;
}

// ---------------------------------------------------------------------------
// fallback perception

Json encode(const fallback::ClusterParams& p) {
  return {{"eps", p.eps}, {"min_pts", p.min_pts}, {"method", method_name(p.method)}};
}

fallback::ClusterParams decode_cluster_params(const Json& j, const std::string& path) {
  JsonReader r(j, path);
  fallback::ClusterParams p;
  p.eps = r.number("eps", p.eps);
  p.min_pts = static_cast<int>(r.integer("min_pts", p.min_pts));
  if (const Json* m = r.child("method")) p.method = decode_enum<fallback::ClusterMethod>(*m, r.path("method"), method_from, "method");
  r.done();
  scoped_validate(path, [&] { fallback::validate(p); });
  return p;
}

Json encode(const fallback::ShapeRule& rule) {
  return {{"shape", shape_name(rule.shape)},
          {"length_range", Json::array({rule.length_range.min, rule.length_range.max})},
          {"width_range", Json::array({rule.width_range.min, rule.width_range.max})},
          {"class_out", to_string(rule.class_out)}};
}

fallback::ShapeRule decode_shape_rule(const Json& j, const std::string& path) {
  JsonReader r(j, path);
  fallback::ShapeRule rule;
  rule.shape = decode_enum<fallback::Shape>(r.required("shape"), r.path("shape"), shape_from, "shape");
  const auto range = [&](const char* key, fallback::Range fallback_range) {
    const Json* c = r.child(key);
    if (!c) return fallback_range;
    const Vec2 v = decode_vec2(*c, r.path(key));
    return fallback::Range{v.x, v.y};
  };
  rule.length_range = range("length_range", rule.length_range);
  rule.width_range = range("width_range", rule.width_range);
  rule.class_out = decode_object_class(r.required("class_out"), r.path("class_out"));
  r.done();
  return rule;
}

Json encode(const fallback::FallbackConfig& c) {
  Json rules = Json::array();
  for (const auto& rule : c.rules) rules.push_back(encode(rule));
  return {{"cluster", encode(c.cluster)}, {"rules", rules}, {"confidence", c.confidence}};
}

fallback::FallbackConfig decode_fallback(const Json& j, const std::string& path) {
  JsonReader r(j, path);
  fallback::FallbackConfig c;
  if (const Json* cp = r.child("cluster")) c.cluster = decode_cluster_params(*cp, r.path("cluster"));
  if (const Json* rules = r.child("rules")) {
    c.rules.clear();
    std::size_t i = 0;
    for (const auto& rule : as_array(*rules, r.path("rules"))) c.rules.push_back(decode_shape_rule(rule, index_path(r.path("rules"), i++)));
  }
  c.confidence = r.number("confidence", c.confidence);
  r.done();
  try {
    scoped_validate(path, [&] { fallback::validate(c.rules); });
  } catch (const ValidationError& e) {
    throw ValidationError(join_path(path, e.field()), e.message());
  }
  if (!(c.confidence >= 0 && c.confidence <= 1)) throw ValidationError(join_path(path, "confidence"), "must lie in [0, 1]");
  return c;
}

// ---------------------------------------------------------------------------
// perception models

Json encode(const perception::Directive& d) {
  using K = perception::Directive::Kind;
  Json j = {{"kind", perception::to_string(d.kind)}, {"start", d.start}};
  if (std::isfinite(d.end)) j["end"] = d.end;
  switch (d.kind) {
    case K::misclassify:
      j["from"] = to_string(d.from);
      j["to"] = to_string(d.to);
      break;
    case K::drop:
      j["id"] = d.object_id;
      break;
    case K::phantom:
      j["object"] = encode(d.phantom);
      break;
    case K::freeze:
      j["ticks"] = d.freeze_ticks;
      break;
  }
  return j;
}

perception::Directive decode_directive(const Json& j, const std::string& path) {
  using K = perception::Directive::Kind;
  JsonReader r(j, path);
  perception::Directive d;
  d.kind = decode_enum<K>(r.required("kind"), r.path("kind"), directive_kind_from, "directive");
  d.start = r.number("start", 0.0);
  d.end = r.number("end", std::numeric_limits<double>::infinity());
  switch (d.kind) {
    case K::misclassify:
      d.from = decode_object_class(r.required("from"), r.path("from"));
      d.to = decode_object_class(r.required("to"), r.path("to"));
      break;
    case K::drop:
      d.object_id = r.string("id");
      break;
    case K::phantom:
      d.phantom = decode_detection(r.required("object"), r.path("object"));
      break;
    case K::freeze:
      d.freeze_ticks = static_cast<int>(r.integer("ticks"));
      break;
  }
  r.done();
  return d;
}

Json encode(const perception::PerceptionModelConfig& c) {
  Json errors = Json::array();
  for (const auto& d : c.error_process) errors.push_back(encode(d));
  return {{"id", c.id},
          {"modality", perception::to_string(c.modality)},
          {"fov", c.fov},
          {"max_range", c.max_range},
          {"noise", {{"position_sigma", c.position_sigma}, {"extent_sigma", c.extent_sigma}}},
          {"base_confidence", c.base_confidence},
          {"error_process", errors}};
}

perception::PerceptionModelConfig decode_model_config(const Json& j, const std::string& path) {
  JsonReader r(j, path);
  perception::PerceptionModelConfig c;
  c.id = r.string("id");
  c.modality = decode_enum<perception::Modality>(r.required("modality"), r.path("modality"), perception::modality_from,
                                                 "modality");
  c.fov = r.number("fov", c.modality == perception::Modality::lidar ? 2.0 * std::numbers::pi : c.fov);
  c.max_range = r.number("max_range", c.max_range);
  if (const Json* n = r.child("noise")) {
    JsonReader nr(*n, r.path("noise"));
    c.position_sigma = nr.number("position_sigma", c.position_sigma);
    c.extent_sigma = nr.number("extent_sigma", c.extent_sigma);
    nr.done();
  }
  c.base_confidence = r.number("base_confidence", c.base_confidence);
  if (const Json* e = r.child("error_process")) {
    std::size_t i = 0;
    for (const auto& d : as_array(*e, r.path("error_process"))) {
      c.error_process.push_back(decode_directive(d, index_path(r.path("error_process"), i++)));
    }
  }
  r.done();
  try {
    scoped_validate(path, [&] { perception::validate(c); });
  } catch (const ValidationError& e) {
    throw ValidationError(join_path(path, e.field()), e.message());
  }
  return c;
}

}  // namespace depcage
