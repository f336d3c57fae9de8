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

// Oracle comparisons shared by the unit suite and the acceptance runner.
// Each returns counts rather than asserting, so callers pick the reporting.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "anomaly.hpp"
#include "fallback.hpp"
#include "function_monitor.hpp"
#include "geometry.hpp"
#include "oracles.hpp"
#include "rng.hpp"

namespace criteria {

using namespace depcage;

struct Count {
  long checked{0};
  long violations{0};
  std::string first;  // description of the first violation

  void fail(const std::string& what) {
    if (violations++ == 0) first = what;
  }
  bool ok() const { return checked > 0 && violations == 0; }
};

inline std::vector<oracle::P> to_oracle(std::span<const Vec2> pts) {
  std::vector<oracle::P> out;
  for (const auto& p : pts) out.push_back({p.x, p.y});
  return out;
}

/// Random cloud of a few Gaussian blobs plus scattered points.
inline std::vector<Vec2> random_cloud(Rng& rng) {
  std::vector<Vec2> pts;
  const int blobs = 1 + static_cast<int>(rng.below(5));
  for (int b = 0; b < blobs; ++b) {
    const Vec2 c{rng.uniform(-20, 20), rng.uniform(-20, 20)};
    const int n = 1 + static_cast<int>(rng.below(40));
    const double s = rng.uniform(0.1, 1.2);
    for (int i = 0; i < n; ++i) pts.push_back(c + Vec2{rng.normal(0, s), rng.normal(0, s)});
  }
  const int scatter = static_cast<int>(rng.below(30));
  for (int i = 0; i < scatter; ++i) pts.push_back({rng.uniform(-25, 25), rng.uniform(-25, 25)});
  if (pts.size() > 200) pts.resize(200);
  return pts;
}

/// Both clustering methods at min_pts = 1 against brute-force eps-graph
/// components, exact match on `clouds` random clouds.
inline Count cluster_vs_components(int clouds, std::uint64_t seed) {
  Count c;
  Rng rng(seed);
  for (int trial = 0; trial < clouds; ++trial) {
    const auto pts = random_cloud(rng);
    const double eps = rng.uniform(0.3, 1.5);
    const auto expected = oracle::eps_components(to_oracle(pts), eps);
    for (auto method : {fallback::ClusterMethod::euclidean, fallback::ClusterMethod::dbscan}) {
      ++c.checked;
      if (fallback::cluster(pts, fallback::ClusterParams{eps, 1, method}) != expected) {
        c.fail("cloud " + std::to_string(trial) +
               (method == fallback::ClusterMethod::dbscan ? " (dbscan)" : " (euclidean)"));
      }
    }
  }
  return c;
}

struct RectGap {
  Count count;
  double worst_gap{0.0};
};

/// Minimum-area rectangle of random convex hulls against the sweep oracle;
/// a hull fails when the areas differ by `tol` or more or the box misses a point.
inline RectGap min_rect_vs_sweep(int hulls, std::uint64_t seed, double tol) {
  RectGap r;
  Rng rng(seed);
  for (int trial = 0; trial < hulls; ++trial) {
    std::vector<Vec2> pts;
    const int n = 3 + static_cast<int>(rng.below(30));
    const double sx = rng.uniform(0.3, 6), sy = rng.uniform(0.3, 6);
    for (int i = 0; i < n; ++i) pts.push_back({rng.uniform(-sx, sx), rng.uniform(-sy, sy)});
    const Polygon hull = convex_hull(pts);
    ++r.count.checked;
    if (hull.size() < 3) {
      r.count.fail("hull " + std::to_string(trial) + " degenerate");
      continue;
    }
    const auto box = min_area_rect(hull);
    const double gap = std::abs(box.area() - oracle::sweep_min_rect_area(to_oracle(hull)));
    r.worst_gap = std::max(r.worst_gap, gap);
    if (!(gap < tol)) r.count.fail("hull " + std::to_string(trial) + " area gap " + std::to_string(gap));
    const auto corners = box.corners();
    for (const auto& p : pts) {
      if (!contains(corners, p, 1e-6)) {
        r.count.fail("hull " + std::to_string(trial) + " leaves a point outside");
        break;
      }
    }
  }
  return r;
}

/// Safe-zone properties over random ego states: speed monotonicity of the
/// clear zone, clear inside focus, counter-clockwise polygons and mirror
/// symmetry of both zones at zero steering.
inline Count safe_zone_properties(int states, std::uint64_t seed) {
  Count c;
  Rng rng(seed);
  const fm::SafeZoneParams p;
  const auto mirrored = [](const Polygon& zone) {
    for (const auto& v : zone) {
      const Vec2 m{v.x, -v.y};
      if (!std::any_of(zone.begin(), zone.end(), [&](const Vec2& w) { return norm(w - m) < 1e-9; })) return false;
    }
    return true;
  };
  for (int trial = 0; trial < states; ++trial) {
    EgoState e;
    e.speed = rng.uniform(0, 30);
    e.steering_angle = rng.uniform(-0.6, 0.6);
    e.wheelbase = rng.uniform(2.2, 3.5);
    e.width = rng.uniform(1.5, 2.5);
    e.length = e.wheelbase + rng.uniform(0.5, 2.0);
    EgoState faster = e;
    faster.speed = e.speed + rng.uniform(0, 10);
    const auto z = fm::compute_safe_zone(e, p);
    const auto zf = fm::compute_safe_zone(faster, p);
    EgoState straight = e;
    straight.steering_angle = 0.0;
    const auto zs = fm::compute_safe_zone(straight, p);
    const std::string at = "state " + std::to_string(trial) + ": ";
    ++c.checked;
    if (!fm::zone_contains(zf.clear_zone, z.clear_zone)) c.fail(at + "not monotone in speed");
    if (!fm::zone_contains(z.focus_zone, z.clear_zone)) c.fail(at + "clear zone outside focus zone");
    if (signed_area(z.clear_zone) <= 0 || signed_area(z.focus_zone) <= 0) c.fail(at + "zone not counter-clockwise");
    if (!mirrored(zs.clear_zone) || !mirrored(zs.focus_zone)) c.fail(at + "straight zone not symmetric");
  }
  return c;
}

inline SceneRaster toy_raster(int grid, std::vector<double> cells, std::int64_t tick = 0) {
  SceneRaster r;
  r.grid = grid;
  r.tick = tick;
  r.cells = std::move(cells);
  return r;
}

/// Twelve 3x3 occupancy patterns: bars, corners and blocks.
inline std::vector<SceneRaster> toy_set() {
  std::vector<SceneRaster> out;
  Rng rng(33);
  for (int k = 0; k < 12; ++k) {
    std::vector<double> c(9, 0.0);
    for (int i = 0; i < 9; ++i) c[static_cast<std::size_t>(i)] = ((i + k) % 3 == 0 || (i * k) % 4 == 1) ? 1.0 : 0.0;
    c[static_cast<std::size_t>(k % 9)] = rng.uniform(0.2, 0.8);
    out.push_back(toy_raster(3, c, k));
  }
  return out;
}

inline std::vector<double*> params_of(am::Autoencoder& ae) {
  std::vector<double*> out;
  for (auto* v : {&ae.w1, &ae.b1, &ae.w2, &ae.b2})
    for (auto& x : *v) out.push_back(&x);
  return out;
}

/// Worst relative error between the analytic gradient and central finite
/// differences over every parameter, on the toy set with a 4-unit latent.
inline double gradient_worst_relative_error() {
  std::vector<std::vector<double>> batch;
  for (const auto& r : toy_set()) batch.push_back(r.cells);
  am::Autoencoder ae = am::init_autoencoder(9, 4, 17);
  // non-zero biases so their gradients are exercised away from the init point
  Rng rng(5);
  for (auto& b : ae.b1) b = rng.uniform(-0.3, 0.3);
  for (auto& b : ae.b2) b = rng.uniform(-0.3, 0.3);
  am::Autoencoder grad = am::gradient(ae, batch);
  const auto analytic = params_of(grad);
  auto probe = ae;
  const auto ps = params_of(probe);
  if (analytic.size() != ps.size()) return INFINITY;
  constexpr double eps = 1e-5;
  double worst = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const double saved = *ps[i];
    *ps[i] = saved + eps;
    const double up = am::objective(probe, batch);
    *ps[i] = saved - eps;
    const double down = am::objective(probe, batch);
    *ps[i] = saved;
    const double numeric = (up - down) / (2 * eps);
    const double denom = std::max({std::abs(numeric), std::abs(*analytic[i]), 1e-8});
    worst = std::max(worst, std::abs(numeric - *analytic[i]) / denom);
  }
  return worst;
}

/// Number of the first `epochs` epochs whose loss did not fall.
inline int loss_non_decreases(std::span<const double> curve, int epochs) {
  int bad = 0;
  for (int e = 1; e <= epochs; ++e) {
    if (static_cast<std::size_t>(e) >= curve.size() || !(curve[e] < curve[e - 1])) ++bad;
  }
  return bad;
}

}  // namespace criteria
