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

#include <algorithm>
#include <cmath>
#include <numbers>

#include "criteria.hpp"
#include "doctest.h"
#include "errors.hpp"
#include "fallback.hpp"
#include "oracles.hpp"
#include "rng.hpp"

using namespace depcage;
using namespace depcage::fallback;

namespace {

std::vector<Vec2> blob(Vec2 origin, int n, double spacing) {
  std::vector<Vec2> out;
  for (int i = 0; i < n; ++i) out.push_back(origin + Vec2{spacing * i, 0.0});
  return out;
}

using criteria::random_cloud;
using criteria::to_oracle;

}  // namespace

TEST_CASE("cluster: examples") {
  const ClusterParams params;
  CHECK(cluster(std::span<const Vec2>{}, params).empty());

  auto pts = blob({0, 0}, 5, 0.1);
  const auto second = blob({10, 0}, 5, 0.1);
  pts.insert(pts.end(), second.begin(), second.end());
  for (auto method : {ClusterMethod::dbscan, ClusterMethod::euclidean}) {
    ClusterParams p;
    p.method = method;
    const auto cs = cluster(pts, p);
    REQUIRE(cs.size() == 2);
    CHECK(cs[0] == Cluster{0, 1, 2, 3, 4});
    CHECK(cs[1] == Cluster{5, 6, 7, 8, 9});
  }
  // the oracle agrees on the two-blob example
  CHECK(oracle::eps_components(to_oracle(pts), 0.7).size() == 2);

  ClusterParams strict;
  strict.min_pts = 6;
  CHECK(cluster(pts, strict).empty());
}

TEST_CASE("cluster: equals eps-graph components on 200 random clouds (min_pts = 1)") {
  const auto c = criteria::cluster_vs_components(200, 2024);
  CHECK(c.checked == 400);
  CHECK_MESSAGE(c.violations == 0, c.first);
}

TEST_CASE("cluster: euclidean drops small components, dbscan keeps core semantics") {
  Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const auto pts = random_cloud(rng);
    const double eps = rng.uniform(0.3, 1.5);
    const int min_pts = 2 + static_cast<int>(rng.below(4));
    std::vector<Cluster> expected;
    for (const auto& c : oracle::eps_components(to_oracle(pts), eps)) {
      if (static_cast<int>(c.size()) >= min_pts) expected.push_back(c);
    }
    CHECK(cluster(pts, ClusterParams{eps, min_pts, ClusterMethod::euclidean}) == expected);

    // dbscan: each cluster lies inside one eps-component, contains a core
    // point, and every core point is clustered; no point is in two clusters
    const auto db = cluster(pts, ClusterParams{eps, min_pts, ClusterMethod::dbscan});
    std::vector<int> owner(pts.size(), -1);
    for (std::size_t ci = 0; ci < db.size(); ++ci) {
      for (auto i : db[ci]) {
        REQUIRE(owner[i] == -1);
        owner[i] = static_cast<int>(ci);
      }
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      int neighbours = 0;
      for (std::size_t j = 0; j < pts.size(); ++j) neighbours += norm(pts[i] - pts[j]) <= eps ? 1 : 0;
      if (neighbours >= min_pts) REQUIRE(owner[i] >= 0);
    }
  }
}

TEST_CASE("cluster: invalid parameters") {
  std::vector<Vec2> pts{{0, 0}};
  CHECK_THROWS_AS(cluster(pts, ClusterParams{0.0, 3, ClusterMethod::dbscan}), ValidationError);
  CHECK_THROWS_AS(cluster(pts, ClusterParams{0.5, 0, ClusterMethod::dbscan}), ValidationError);
}

TEST_CASE("fit_shape: exact rectangle and circle") {
  const std::vector<Vec2> corners{{0, 0}, {4.5, 0}, {4.5, 1.8}, {0, 1.8}};
  const auto r = fit_shape(corners);
  CHECK(r.shape == Shape::rectangle);
  CHECK(r.box.length == doctest::Approx(4.5));
  CHECK(r.box.width == doctest::Approx(1.8));
  CHECK(r.residual == doctest::Approx(0.0));

  std::vector<Vec2> ring;
  for (int i = 0; i < 8; ++i) {
    const double a = 2 * std::numbers::pi * i / 8;
    ring.push_back({5 + 0.3 * std::cos(a), -2 + 0.3 * std::sin(a)});
  }
  const auto c = fit_shape(ring);
  CHECK(c.shape == Shape::cylinder);
  CHECK(c.circle.radius == doctest::Approx(0.3));

  const std::vector<Vec2> single{{1, 1}};
  const auto d = fit_shape(single);
  CHECK(d.degenerate);
  CHECK(d.shape == Shape::cylinder);
  CHECK(d.circle.radius == 0.0);
  CHECK_THROWS_AS(fit_shape(std::span<const Vec2>{}), ValidationError);
}

TEST_CASE("fit_shape: noisy rectangle against the orientation sweep") {
  Rng rng(4242);
  const double heading = 0.37;
  std::vector<Vec2> pts;
  for (const auto& c : oracle::box({12.0, -3.0}, 4.5, 1.8, heading)) {
    pts.push_back({c.x + rng.normal(0, 0.02), c.y + rng.normal(0, 0.02)});
  }
  const auto fit = fit_shape(pts);
  CHECK(fit.shape == Shape::rectangle);
  CHECK(std::abs(fit.box.length - 4.5) <= 0.1);
  CHECK(std::abs(fit.box.width - 1.8) <= 0.1);
  CHECK(std::abs(fit.box.area() - oracle::sweep_min_rect_area(to_oracle(pts))) < 1e-6);
}

TEST_CASE("min_area_rect: matches the sweep oracle on 50 convex hulls") {
  const auto r = criteria::min_rect_vs_sweep(50, 50, 1e-6);
  CHECK(r.count.checked == 50);
  CHECK_MESSAGE(r.count.violations == 0, r.count.first);
  CHECK(r.worst_gap < 1e-6);
}

TEST_CASE("classify_shape: rule table") {
  const auto rules = default_rules();
  const std::vector<Vec2> car{{0, 0}, {4.5, 0}, {4.5, 1.8}, {0, 1.8}};
  CHECK(classify_shape(fit_shape(car), rules).object_class == ObjectClass::vehicle);

  std::vector<Vec2> ring;
  for (int i = 0; i < 8; ++i) {
    const double a = 2 * std::numbers::pi * i / 8;
    ring.push_back({0.3 * std::cos(a), 0.3 * std::sin(a)});
  }
  const std::vector<ShapeRule> ped_rule{ShapeRule{Shape::cylinder, {0, 1e9}, {0.2, 0.5}, ObjectClass::pedestrian}};
  CHECK(classify_shape(fit_shape(ring), ped_rule).object_class == ObjectClass::pedestrian);
  CHECK(classify_shape(fit_shape(ring), rules).object_class == ObjectClass::pedestrian);

  const std::vector<Vec2> tiny{{0, 0}, {0.2, 0}, {0.2, 0.2}, {0, 0.2}};
  const auto t = classify_shape(fit_shape(tiny), rules);
  CHECK(t.object_class == ObjectClass::static_obstacle);
  CHECK(t.length >= kMinReportedExtent);
}

TEST_CASE("rule table validation") {
  CHECK_NOTHROW(validate(std::span<const ShapeRule>(default_rules())));
  std::vector<ShapeRule> overlapping{ShapeRule{Shape::rectangle, {3, 6}, {1, 2}, ObjectClass::vehicle},
                                     ShapeRule{Shape::rectangle, {5, 8}, {1.5, 3}, ObjectClass::truck}};
  CHECK_THROWS_AS(validate(std::span<const ShapeRule>(overlapping)), ValidationError);
  std::vector<ShapeRule> inverted{ShapeRule{Shape::rectangle, {6, 3}, {1, 2}, ObjectClass::vehicle}};
  CHECK_THROWS_AS(validate(std::span<const ShapeRule>(inverted)), ValidationError);
}

TEST_CASE("fallback perceive is a pure function of its inputs") {
  PointCloud cloud;
  Rng rng(8);
  for (const auto& c : oracle::box({15, 4}, 4.5, 1.8, 0.2)) cloud.points.push_back({{c.x, c.y}, std::nullopt});
  for (int i = 0; i < 40; ++i) cloud.points.push_back({{rng.uniform(-30, 30), rng.uniform(-30, 30)}, 0.5});
  const FallbackConfig cfg;
  const auto a = perceive(cloud, cfg);
  const auto b = perceive(cloud, cfg);
  CHECK(a == b);
  CHECK(a.source == "deterministic");
  for (const auto& o : a.objects) CHECK(o.source == "deterministic");
}
