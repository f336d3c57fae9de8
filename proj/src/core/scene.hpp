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
 * @file scene.hpp
 *
 * Shared world and perception types.
 *
 * Frames:
 * - world: fixed plane, metres.
 * - ego: origin at the rear-axle centre, x forward, y left.
 *
 * The world is plan-view only: footprints plus a pose tag, no heights.
 * Visual and physical class are separate so that camera-like and
 * range-like sensing can legitimately disagree about the same object.
 */

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "geometry.hpp"

namespace depcage {

enum class ObjectClass { pedestrian, vehicle, truck, bicycle, static_obstacle, poster };
enum class PhysicalClass { pedestrian, vehicle, static_obstacle };
enum class PoseTag { standing, lying, riding, none };

std::string_view to_string(ObjectClass c);
std::string_view to_string(PhysicalClass c);
std::string_view to_string(PoseTag p);
std::optional<ObjectClass> object_class_from(std::string_view s);
std::optional<PhysicalClass> physical_class_from(std::string_view s);
std::optional<PoseTag> pose_tag_from(std::string_view s);

ObjectClass as_object_class(PhysicalClass c);

inline constexpr double kDefaultMaxSteering = 0.6;

struct EgoState {
  Vec2 position;
  double heading{0.0};
  double speed{0.0};
  double steering_angle{0.0};
  double wheelbase{2.7};
  double width{1.8};
  double length{4.3};

  /// Overhang is split evenly front and rear of the axles.
  double rear_overhang() const { return 0.5 * (length - wheelbase); }
  /// Ego-frame x of the front bumper.
  double front_x() const { return wheelbase + rear_overhang(); }

  bool operator==(const EgoState&) const = default;
};

/// Throws ValidationError naming the offending field.
void validate(const EgoState& ego, double max_steering = kDefaultMaxSteering);

/// Vehicle outline in the ego frame (CCW).
Polygon ego_outline(const EgoState& ego);

struct TruthObject {
  std::string id;
  ObjectClass visual_class{ObjectClass::static_obstacle};
  PhysicalClass physical_class{PhysicalClass::static_obstacle};
  Polygon footprint;  // world frame, convex
  PoseTag pose_tag{PoseTag::none};
  Vec2 velocity;

  bool operator==(const TruthObject&) const = default;
};

void validate(const TruthObject& obj);

struct SceneState {
  std::int64_t tick{0};
  double time{0.0};
  EgoState ego;
  std::vector<TruthObject> objects;

  bool operator==(const SceneState&) const = default;
};

inline constexpr std::string_view kDeterministicSource = "deterministic";
inline constexpr std::string_view kFusedSource = "fused";

struct DetectedObject {
  ObjectClass object_class{ObjectClass::static_obstacle};
  Vec2 center;  // ego frame
  double length{0.1};
  double width{0.1};
  double heading{0.0};
  double confidence{1.0};
  std::string source;
  /// Member sources of a fused detection; empty for raw detections.
  std::vector<std::string> contributors;

  OrientedBox box() const { return {center, length, width, heading}; }
  bool operator==(const DetectedObject&) const = default;
};

void validate(const DetectedObject& obj);

struct ObjectList {
  std::int64_t tick{0};
  std::string source;
  std::vector<DetectedObject> objects;

  bool operator==(const ObjectList&) const = default;
};

void validate(const ObjectList& list);

struct LidarPoint {
  Vec2 position;  // ego frame
  std::optional<double> intensity;

  bool operator==(const LidarPoint&) const = default;
};

struct PointCloud {
  std::int64_t tick{0};
  std::vector<LidarPoint> points;

  bool operator==(const PointCloud&) const = default;
};

/// Axis-aligned raster window in the ego frame. Default: 40 m ahead,
/// 40 m wide centred on the ego axis.
struct RasterWindow {
  double x_min{0.0};
  double y_min{-20.0};
  double width{40.0};
  double height{40.0};
  int grid{16};

  double cell_w() const { return width / grid; }
  double cell_h() const { return height / grid; }
  bool operator==(const RasterWindow&) const = default;
};

void validate(const RasterWindow& w);

/// G x G occupancy in [0, 1]. Cell (ix, iy) covers
/// [x_min + ix*cw, x_min + (ix+1)*cw] x [y_min + iy*ch, y_min + (iy+1)*ch].
struct SceneRaster {
  std::int64_t tick{0};
  int grid{0};
  std::vector<double> cells;  // cells[iy * grid + ix]

  double at(int ix, int iy) const { return cells[static_cast<std::size_t>(iy) * grid + ix]; }
  bool operator==(const SceneRaster&) const = default;
};

/// Rigid world -> ego transform (rotate by -heading after translating by -position).
Vec2 transform_to_ego(Vec2 world_point, const EgoState& ego);
Vec2 transform_to_world(Vec2 ego_point, const EgoState& ego);
Polygon transform_to_ego(std::span<const Vec2> world_poly, const EgoState& ego);

/// Coverage raster of polygons already expressed in the window's frame.
/// Each cell holds the summed clipped area fraction, clamped to 1.
SceneRaster rasterize_polygons(std::span<const Polygon> polys, const RasterWindow& window);

SceneRaster rasterize_scene(const SceneState& truth, const RasterWindow& window);

}  // namespace depcage
