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
 * @file function_monitor.hpp
 *
 * Safe Zone computation and cross-source validation of object lists.
 *
 * The zone is the vehicle outline followed by a band swept along a
 * constant-curvature centreline that starts at the front bumper. Band
 * length is the stopping distance (reaction + braking) plus a standstill
 * margin; the focus zone stretches both length and lateral margin by the
 * focus extension. Curved bands are polygonised on a fixed 0.5 m
 * centreline grid: inner-side vertices lie on the true inner arc, outer-side
 * edges are tangent to the true outer arc. Because the grid does not depend
 * on speed, the polygon for a longer band contains every vertex of the
 * polygon for a shorter one.
 */

#pragma once

#include <set>
#include <string>
#include <vector>

#include "matching.hpp"
#include "scene.hpp"

namespace depcage::fm {

struct SafeZoneParams {
  double a_max{5.0};           // m/s^2 braking deceleration
  double t_react{0.5};         // s
  double lateral_margin{0.5};  // m
  double standstill_margin{0.3};  // m
  double focus_extension{0.3};    // fraction

  bool operator==(const SafeZoneParams&) const = default;
};

void validate(const SafeZoneParams& p);

inline constexpr double kZoneSampleStep = 0.5;  // m along the centreline

struct SafeZone {
  Polygon clear_zone;  // ego frame, CCW
  Polygon focus_zone;
  double stopping_distance{0.0};

  bool operator==(const SafeZone&) const = default;
};

double stopping_distance(double speed, const SafeZoneParams& params);

SafeZone compute_safe_zone(const EgoState& ego, const SafeZoneParams& params);

/// Vertex-wise containment: every vertex of `inner` lies in or on `outer`.
bool zone_contains(std::span<const Vec2> outer, std::span<const Vec2> inner, double tol = 1e-9);

struct EvidenceMember {
  std::string source;
  DetectedObject object;
  bool operator==(const EvidenceMember&) const = default;
};

struct Evidence {
  std::vector<EvidenceMember> members;
  double max_center_delta{0.0};
  double max_extent_delta{0.0};
  /// Any of: center_delta, extent_delta, class_incompatible, unconfirmed,
  /// class_conflict (an incompatible detection from another source lies
  /// within the gate).
  std::vector<std::string> violations;
  std::set<std::string> implicated;

  bool operator==(const Evidence&) const = default;
};

struct FmVerdict {
  std::int64_t tick{0};
  bool flag{false};
  std::set<std::string> implicated_sources;
  std::vector<Evidence> per_object_evidence;
  SafeZone zone_used;

  bool operator==(const FmVerdict&) const = default;
};

/// Keeps the objects of each list whose box intersects `zone.focus_zone`.
std::vector<ObjectList> filter_to_zone(std::span<const ObjectList> lists, const SafeZone& zone);

/// Flag when an in-zone group violates a delta/class threshold or is seen
/// by fewer than the required number of sources. Implicated sources are the
/// minority side of each violation; ties (and cycles) implicate everyone
/// involved.
FmVerdict validate(std::span<const ObjectList> lists, const SafeZone& zone, const HaraThresholds& thresholds,
                   std::int64_t tick);

}  // namespace depcage::fm
