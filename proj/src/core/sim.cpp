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

#include "sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "errors.hpp"

namespace depcage::sim {

EgoState step_ego(const EgoState& ego, Control command, double dt, double max_steering) {
  if (!(dt > 0)) throw ValidationError("dt", "must be > 0");
  EgoState next = ego;
  next.steering_angle = std::clamp(command.steering, -max_steering, max_steering);
  next.position.x += ego.speed * std::cos(ego.heading) * dt;
  next.position.y += ego.speed * std::sin(ego.heading) * dt;
  next.heading += ego.speed / ego.wheelbase * std::tan(next.steering_angle) * dt;
  next.speed = std::max(0.0, ego.speed + command.accel * dt);
  if (next.speed < 1e-12) next.speed = 0.0;
  return next;
}

void validate(const LidarConfig& cfg) {
  if (cfg.ray_count < 1) throw ValidationError("ray_count", "must be >= 1");
  if (!(cfg.max_range > 0)) throw ValidationError("max_range", "must be > 0");
  if (!(cfg.range_noise_sigma >= 0)) throw ValidationError("range_noise_sigma", "must be >= 0");
  if (!(cfg.fov > 0 && cfg.fov <= 2.0 * std::numbers::pi + 1e-12)) throw ValidationError("fov", "must lie in (0, 2pi]");
}

double ray_bearing(const LidarConfig& cfg, int i) {
  const double n = cfg.ray_count;
  if (cfg.fov >= 2.0 * std::numbers::pi - 1e-12) {
    return (i - std::floor(n / 2)) * (2.0 * std::numbers::pi / n);
  }
  if (cfg.ray_count == 1) return 0.0;
  return -0.5 * cfg.fov + i * (cfg.fov / (n - 1));
}

PointCloud scan_lidar(const SceneState& truth, const LidarConfig& cfg, Rng& rng) {
  validate(cfg);
  PointCloud cloud;
  cloud.tick = truth.tick;
  std::vector<Polygon> polys;
  polys.reserve(truth.objects.size());
  for (const auto& o : truth.objects) polys.push_back(transform_to_ego(o.footprint, truth.ego));

  for (int i = 0; i < cfg.ray_count; ++i) {
    const double bearing = ray_bearing(cfg, i);
    const Vec2 dir{std::cos(bearing), std::sin(bearing)};
    double best = std::numeric_limits<double>::infinity();
    for (const auto& poly : polys) {
      for (std::size_t k = 0; k < poly.size(); ++k) {
        const auto hit = ray_segment_hit({0.0, 0.0}, dir, poly[k], poly[(k + 1) % poly.size()]);
        if (hit && *hit < best) best = *hit;
      }
    }
    if (!(best <= cfg.max_range)) continue;
    const double range = std::clamp(rng.normal(best, cfg.range_noise_sigma), 0.0, cfg.max_range);
    cloud.points.push_back({dir * range, 1.0 - range / cfg.max_range});
  }
  return cloud;
}

}  // namespace depcage::sim
