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

#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "errors.hpp"
#include "scene_helpers.hpp"
#include "oracles.hpp"
#include "rng.hpp"
#include "scene.hpp"
#include "sim.hpp"

using namespace depcage;
using testing::rect;

namespace {

std::vector<oracle::P> to_oracle(const Polygon& poly) {
  std::vector<oracle::P> out;
  for (const auto& v : poly) out.push_back({v.x, v.y});
  return out;
}

std::vector<double> oracle_raster(const std::vector<Polygon>& polys, const RasterWindow& w, std::uint64_t seed) {
  std::vector<std::vector<oracle::P>> op;
  for (const auto& p : polys) op.push_back(to_oracle(p));
  return oracle::mc_coverage(op, w.x_min, w.y_min, w.width, w.height, w.grid, 10000, seed);
}

int differing_cells(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  int n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += std::abs(a[i] - b[i]) > tol ? 1 : 0;
  return n;
}

}  // namespace

TEST_CASE("transform_to_ego: fixed examples") {
  EgoState ego;
  ego.position = {3.0, -2.0};
  ego.heading = 1.1;
  const Vec2 o = transform_to_ego(ego.position, ego);
  CHECK(std::abs(o.x) < 1e-12);
  CHECK(std::abs(o.y) < 1e-12);

  EgoState id;
  const Vec2 p = transform_to_ego({3.0, 4.0}, id);
  CHECK(p.x == 3.0);
  CHECK(p.y == 4.0);

  EgoState turned;
  turned.position = {1.0, 0.0};
  turned.heading = std::numbers::pi / 2;
  const Vec2 q = transform_to_ego({1.0, 2.0}, turned);
  CHECK(std::abs(q.x - 2.0) < 1e-12);
  CHECK(std::abs(q.y - 0.0) < 1e-12);
}

TEST_CASE("transform_to_ego: inverse round trip") {
  Rng rng(42);
  for (int i = 0; i < 1000; ++i) {
    EgoState ego;
    ego.position = {rng.uniform(-500, 500), rng.uniform(-500, 500)};
    ego.heading = rng.uniform(-10, 10);
    const Vec2 w{rng.uniform(-500, 500), rng.uniform(-500, 500)};
    const Vec2 back = transform_to_world(transform_to_ego(w, ego), ego);
    REQUIRE(norm(back - w) < 1e-9);
  }
}

TEST_CASE("rasterize: empty scene and exact cell cover") {
  RasterWindow w;
  SceneState empty;
  const auto r = rasterize_scene(empty, w);
  CHECK(r.grid == 16);
  REQUIRE(r.cells.size() == 256);
  for (double c : r.cells) CHECK(c == 0.0);

  // cell (4, 9) spans x [10, 12.5], y [2.5, 5]
  const std::vector<Polygon> polys{{{10.0, 2.5}, {12.5, 2.5}, {12.5, 5.0}, {10.0, 5.0}}};
  const auto one = rasterize_polygons(polys, w);
  for (int iy = 0; iy < 16; ++iy) {
    for (int ix = 0; ix < 16; ++ix) {
      if (ix == 4 && iy == 9) {
        CHECK(std::abs(one.at(ix, iy) - 1.0) < 1e-12);
      } else {
        CHECK(one.at(ix, iy) == 0.0);
      }
    }
  }
}

TEST_CASE("rasterize: agrees with Monte Carlo coverage on random scenes") {
  Rng rng(7);
  RasterWindow w;
  w.x_min = -5.0;
  w.y_min = -10.0;
  w.width = 20.0;
  w.height = 20.0;
  w.grid = 8;
  for (int scene = 0; scene < 10; ++scene) {
    std::vector<Polygon> polys;
    const int n = 1 + static_cast<int>(rng.below(4));
    for (int k = 0; k < n; ++k) {
      const auto b = oracle::box({rng.uniform(-5, 15), rng.uniform(-10, 10)}, rng.uniform(0.3, 6.0),
                                 rng.uniform(0.3, 3.0), rng.uniform(-3.0, 3.0));
      Polygon p;
      for (auto v : b) p.push_back({v.x, v.y});
      polys.push_back(p);
    }
    // the library sums overlapping coverage, the oracle counts the union;
    // compare only scenes without overlap
    bool overlap = false;
    for (std::size_t i = 0; i < polys.size(); ++i)
      for (std::size_t j = i + 1; j < polys.size(); ++j) overlap = overlap || polygons_intersect(polys[i], polys[j]);
    if (overlap) continue;
    const auto lib = rasterize_polygons(polys, w);
    const auto mc = oracle_raster(polys, w, 100 + static_cast<std::uint64_t>(scene));
    for (std::size_t i = 0; i < mc.size(); ++i) REQUIRE(std::abs(lib.cells[i] - mc[i]) < 0.02);
  }
}

TEST_CASE("rasterize: standing and lying pedestrian differ in at least two cells") {
  // centre on a cell corner of the default window so both footprints
  // straddle four cells
  RasterWindow w;
  const std::vector<Polygon> standing{rect(10.0, 0.0, 0.5, 0.5)};
  const std::vector<Polygon> lying{rect(10.0, 0.0, 1.8, 0.5)};
  const auto mc_s = oracle_raster(standing, w, 1);
  const auto mc_l = oracle_raster(lying, w, 2);
  // frozen from the Monte Carlo oracle: 4 cells differ (0.01 vs 0.036 coverage)
  const int oracle_diff = differing_cells(mc_s, mc_l, 0.01);
  CHECK(oracle_diff == 4);
  const auto lib_s = rasterize_polygons(standing, w);
  const auto lib_l = rasterize_polygons(lying, w);
  const int lib_diff = differing_cells(lib_s.cells, lib_l.cells, 1e-12);
  CHECK(lib_diff == oracle_diff);
  CHECK(lib_diff >= 2);
  for (std::size_t i = 0; i < mc_s.size(); ++i) {
    CHECK(std::abs(lib_s.cells[i] - mc_s[i]) < 0.005);
    CHECK(std::abs(lib_l.cells[i] - mc_l[i]) < 0.005);
  }
}

TEST_CASE("rasterize: translation consistency and value range") {
  Rng rng(11);
  for (int t = 0; t < 50; ++t) {
    std::vector<Polygon> polys;
    for (int k = 0; k < 3; ++k) polys.push_back(rect(rng.uniform(0, 40), rng.uniform(-20, 20), rng.uniform(0.2, 5), rng.uniform(0.2, 3)));
    RasterWindow w;
    const Vec2 off{rng.uniform(-100, 100), rng.uniform(-100, 100)};
    RasterWindow ws = w;
    ws.x_min += off.x;
    ws.y_min += off.y;
    std::vector<Polygon> shifted = polys;
    for (auto& p : shifted)
      for (auto& v : p) v = v + off;
    const auto a = rasterize_polygons(polys, w);
    const auto b = rasterize_polygons(shifted, ws);
    for (std::size_t i = 0; i < a.cells.size(); ++i) {
      REQUIRE(std::abs(a.cells[i] - b.cells[i]) < 1e-9);
      REQUIRE(a.cells[i] >= 0.0);
      REQUIRE(a.cells[i] <= 1.0);
    }
  }
}

TEST_CASE("rasterize_scene is deterministic and validates its window") {
  SceneState s;
  s.ego.position = {5.0, 1.0};
  s.ego.heading = 0.3;
  TruthObject o;
  o.id = "car";
  o.footprint = rect(20.0, 3.0, 4.5, 1.8);
  s.objects.push_back(o);
  RasterWindow w;
  CHECK(rasterize_scene(s, w) == rasterize_scene(s, w));
  RasterWindow bad;
  bad.width = 0.0;
  CHECK_THROWS_AS(rasterize_scene(s, bad), ValidationError);
}

TEST_CASE("scene validation") {
  EgoState e;
  CHECK_NOTHROW(validate(e));
  e.speed = -1.0;
  CHECK_THROWS_AS(validate(e), ValidationError);
  e.speed = 0.0;
  e.steering_angle = 0.7;
  CHECK_THROWS_AS(validate(e), ValidationError);

  TruthObject o;
  o.id = "x";
  o.footprint = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  CHECK_NOTHROW(validate(o));
  o.footprint = {{0, 0}, {1, 0}, {2, 0}};
  CHECK_THROWS_AS(validate(o), ValidationError);
  o.footprint = {{0, 0}, {2, 0}, {1, 0.2}, {2, 2}, {0, 2}};
  CHECK_THROWS_AS(validate(o), ValidationError);
  o.footprint = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  o.visual_class = ObjectClass::poster;
  o.physical_class = PhysicalClass::pedestrian;
  CHECK_THROWS_AS(validate(o), ValidationError);
  o.physical_class = PhysicalClass::static_obstacle;
  CHECK_NOTHROW(validate(o));

  DetectedObject d;
  d.confidence = 1.5;
  CHECK_THROWS_AS(validate(d), ValidationError);
  d.confidence = 0.5;
  d.length = 0.0;
  CHECK_THROWS_AS(validate(d), ValidationError);
}

TEST_CASE("step_ego: examples") {
  EgoState e;
  e.speed = 1.0;
  const auto s = sim::step_ego(e, {0.0, 0.0}, 1.0);
  CHECK(s.position.x == doctest::Approx(1.0));
  CHECK(s.position.y == doctest::Approx(0.0));
  CHECK(s.heading == 0.0);

  EgoState rest;
  rest.position = {2.0, 3.0};
  rest.heading = 0.4;
  rest.steering_angle = 0.2;
  const auto r = sim::step_ego(rest, {0.0, 0.2}, 0.05);
  CHECK(r == rest);

  EgoState turning;
  turning.speed = 5.0;
  const auto t = sim::step_ego(turning, {0.0, 0.1}, 0.05);
  // 5 / 2.7 * tan(0.1) * 0.05, evaluated by hand
  CHECK(std::abs(t.heading - 0.009290) < 5e-7);
  CHECK(t.position.x == doctest::Approx(0.25));
}

TEST_CASE("step_ego: speed stays non-negative and heading finite") {
  Rng rng(3);
  EgoState e;
  for (int i = 0; i < 5000; ++i) {
    e = sim::step_ego(e, {rng.uniform(-8, 4), rng.uniform(-1, 1)}, 0.05);
    REQUIRE(e.speed >= 0.0);
    REQUIRE(std::isfinite(e.heading));
    REQUIRE(std::abs(e.steering_angle) <= kDefaultMaxSteering);
  }
  CHECK_THROWS_AS(sim::step_ego(e, {}, 0.0), ValidationError);
}

namespace {

// Slab intersection of the ray from the origin along `bearing` with the
// axis-aligned box [x0, x1] x [y0, y1], origin outside.
std::optional<double> slab_hit(double bearing, double x0, double x1, double y0, double y1) {
  const double dx = std::cos(bearing), dy = std::sin(bearing);
  double tmin = -std::numeric_limits<double>::infinity();
  double tmax = std::numeric_limits<double>::infinity();
  for (const auto& [d, lo, hi] : {std::tuple{dx, x0, x1}, std::tuple{dy, y0, y1}}) {
    if (std::abs(d) < 1e-15) {
      if (0.0 < lo || 0.0 > hi) return std::nullopt;
      continue;
    }
    double a = lo / d, b = hi / d;
    if (a > b) std::swap(a, b);
    tmin = std::max(tmin, a);
    tmax = std::min(tmax, b);
  }
  if (tmax < tmin || tmax < 0) return std::nullopt;
  return tmin;
}

}  // namespace

TEST_CASE("scan_lidar: empty scene and square ahead") {
  sim::LidarConfig cfg;
  cfg.range_noise_sigma = 0.0;
  SceneState s;
  Rng rng(1);
  CHECK(sim::scan_lidar(s, cfg, rng).points.empty());

  TruthObject box;
  box.id = "box";
  box.footprint = rect(11.0, 0.0, 2.0, 2.0);
  s.objects.push_back(box);
  Rng rng2(1);
  const auto cloud = sim::scan_lidar(s, cfg, rng2);
  bool found = false;
  for (const auto& p : cloud.points) {
    if (std::abs(std::atan2(p.position.y, p.position.x)) < 1e-12) {
      CHECK(std::abs(norm(p.position) - 10.0) < 1e-9);
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("scan_lidar: matches the analytic slab oracle") {
  Rng gen(5);
  sim::LidarConfig cfg;
  cfg.range_noise_sigma = 0.0;
  cfg.ray_count = 720;
  for (int scene = 0; scene < 20; ++scene) {
    const double cx = gen.uniform(-30, 30), cy = gen.uniform(-30, 30);
    const double l = gen.uniform(0.5, 5), w = gen.uniform(0.5, 5);
    if (std::abs(cx) < l && std::abs(cy) < w) continue;
    SceneState s;
    TruthObject o;
    o.id = "o";
    o.footprint = rect(cx, cy, l, w);
    s.objects.push_back(o);
    Rng rng(9);
    const auto cloud = sim::scan_lidar(s, cfg, rng);
    std::size_t expected = 0;
    for (int i = 0; i < cfg.ray_count; ++i) {
      const double b = sim::ray_bearing(cfg, i);
      const auto hit = slab_hit(b, cx - l / 2, cx + l / 2, cy - w / 2, cy + w / 2);
      if (!hit || *hit > cfg.max_range) continue;
      ++expected;
      bool matched = false;
      for (const auto& p : cloud.points) {
        if (std::abs(normalize_angle(std::atan2(p.position.y, p.position.x) - b)) < 1e-9) {
          REQUIRE(std::abs(norm(p.position) - *hit) < 1e-9);
          matched = true;
        }
      }
      REQUIRE(matched);
    }
    CHECK(cloud.points.size() == expected);
  }
}

TEST_CASE("scan_lidar: determinism, point budget and bearing fidelity") {
  sim::LidarConfig cfg;
  SceneState s;
  s.ego.position = {3, 4};
  s.ego.heading = 0.7;
  for (int k = 0; k < 6; ++k) {
    TruthObject o;
    o.id = "o" + std::to_string(k);
    o.footprint = rect(3 + 10 * std::cos(k), 4 + 10 * std::sin(k), 1.5, 1.0);
    s.objects.push_back(o);
  }
  Rng a(77), b(77);
  const auto ca = sim::scan_lidar(s, cfg, a);
  const auto cb = sim::scan_lidar(s, cfg, b);
  CHECK(ca == cb);
  CHECK(ca.points.size() <= static_cast<std::size_t>(cfg.ray_count));
  for (const auto& p : ca.points) {
    const double bearing = std::atan2(p.position.y, p.position.x);
    const double step = 2 * std::numbers::pi / cfg.ray_count;
    const double k = bearing / step;
    CHECK(std::abs(k - std::round(k)) < 1e-6);
    CHECK(norm(p.position) <= cfg.max_range);
  }
}
