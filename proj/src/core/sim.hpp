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

#pragma once

#include <numbers>

#include "rng.hpp"
#include "scene.hpp"

namespace depcage::sim {

struct Control {
  double accel{0.0};     // m/s^2
  double steering{0.0};  // rad, clamped to +-max_steering
};

/// Kinematic bicycle model, explicit Euler. Speeds below 1e-12 m/s snap to 0.
EgoState step_ego(const EgoState& ego, Control command, double dt, double max_steering = kDefaultMaxSteering);

struct LidarConfig {
  int ray_count{360};
  double max_range{50.0};
  double range_noise_sigma{0.02};
  double fov{2.0 * std::numbers::pi};

  bool operator==(const LidarConfig&) const = default;
};

void validate(const LidarConfig& cfg);

/// Bearing of ray i in the ego frame. A full circle uses (i - n/2) * 2pi/n,
/// so an even ray count includes bearing 0 exactly; a narrower fov spreads
/// the rays evenly over [-fov/2, fov/2].
double ray_bearing(const LidarConfig& cfg, int i);

/// Planar scan from the ego origin against all footprints. Noisy ranges are
/// clamped to [0, max_range].
PointCloud scan_lidar(const SceneState& truth, const LidarConfig& cfg, Rng& rng);

}  // namespace depcage::sim
