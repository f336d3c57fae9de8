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

#include "scene.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "errors.hpp"

namespace depcage {

namespace {

constexpr std::array<std::string_view, 6> kObjectClassNames{
    "pedestrian", "vehicle", "truck", "bicycle", "static_obstacle", "poster"};
constexpr std::array<std::string_view, 3> kPhysicalClassNames{"pedestrian", "vehicle", "static_obstacle"};
constexpr std::array<std::string_view, 4> kPoseNames{"standing", "lying", "riding", "none"};

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(const std::array<std::string_view, N>& names, std::string_view s) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<Enum>(i);
  }
  return std::nullopt;
}

bool finite(Vec2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

}  // namespace

std::string_view to_string(ObjectClass c) { return kObjectClassNames[static_cast<std::size_t>(c)]; }
std::string_view to_string(PhysicalClass c) { return kPhysicalClassNames[static_cast<std::size_t>(c)]; }
std::string_view to_string(PoseTag p) { return kPoseNames[static_cast<std::size_t>(p)]; }

std::optional<ObjectClass> object_class_from(std::string_view s) {
  return lookup<ObjectClass>(kObjectClassNames, s);
}
std::optional<PhysicalClass> physical_class_from(std::string_view s) {
  return lookup<PhysicalClass>(kPhysicalClassNames, s);
}
std::optional<PoseTag> pose_tag_from(std::string_view s) { return lookup<PoseTag>(kPoseNames, s); }

ObjectClass as_object_class(PhysicalClass c) {
  switch (c) {
    case PhysicalClass::pedestrian:
      return ObjectClass::pedestrian;
    case PhysicalClass::vehicle:
      return ObjectClass::vehicle;
    case PhysicalClass::static_obstacle:
      break;
  }
  return ObjectClass::static_obstacle;
}

void validate(const EgoState& ego, double max_steering) {
  if (!finite(ego.position)) throw ValidationError("position", "must be finite");
  if (!std::isfinite(ego.heading)) throw ValidationError("heading", "must be finite");
  if (!(ego.speed >= 0.0) || !std::isfinite(ego.speed)) throw ValidationError("speed", "must be >= 0");
  if (!(ego.wheelbase > 0.0)) throw ValidationError("wheelbase", "must be > 0");
  if (!(ego.width > 0.0)) throw ValidationError("width", "must be > 0");
  if (!(ego.length > 0.0)) throw ValidationError("length", "must be > 0");
  if (ego.length < ego.wheelbase) throw ValidationError("length", "must be >= wheelbase");
  if (!(std::abs(ego.steering_angle) <= max_steering)) {
    throw ValidationError("steering_angle", "exceeds max steering " + std::to_string(max_steering));
  }
}

Polygon ego_outline(const EgoState& ego) {
  const double r = -ego.rear_overhang();
  const double f = ego.front_x();
  const double hw = 0.5 * ego.width;
  return {{r, -hw}, {f, -hw}, {f, hw}, {r, hw}};
}

void validate(const TruthObject& obj) {
  if (obj.id.empty()) throw ValidationError("id", "must not be empty");
  if (obj.footprint.size() < 3) throw ValidationError("footprint", "needs at least 3 vertices");
  for (const Vec2& p : obj.footprint) {
    if (!finite(p)) throw ValidationError("footprint", "vertices must be finite");
  }
  if (!is_convex(obj.footprint)) throw ValidationError("footprint", "must be convex with non-zero area");
  if (!finite(obj.velocity)) throw ValidationError("velocity", "must be finite");
  if (obj.visual_class == ObjectClass::poster && obj.physical_class != PhysicalClass::static_obstacle) {
    throw ValidationError("physical_class", "a poster is physically a static obstacle");
  }
}

void validate(const DetectedObject& obj) {
  if (!(obj.length > 0.0) || !(obj.width > 0.0)) throw ValidationError("extent", "components must be > 0");
  if (!(obj.confidence >= 0.0 && obj.confidence <= 1.0)) {
    throw ValidationError("confidence", "must lie in [0, 1]");
  }
  if (!finite(obj.center) || !std::isfinite(obj.heading)) throw ValidationError("center", "must be finite");
}

void validate(const ObjectList& list) {
  if (list.tick < 0) throw ValidationError("tick", "must be >= 0");
  for (std::size_t i = 0; i < list.objects.size(); ++i) {
    const auto& o = list.objects[i];
    const std::string path = "objects/" + std::to_string(i);
    try {
      validate(o);
    } catch (const ValidationError& e) {
      throw ValidationError(path + "/" + e.field(), e.what());
    }
    if (o.source != list.source) throw ValidationError(path + "/source", "differs from list source");
  }
}

void validate(const RasterWindow& w) {
  if (!(w.width > 0.0)) throw ValidationError("width", "must be > 0");
  if (!(w.height > 0.0)) throw ValidationError("height", "must be > 0");
  if (w.grid < 1) throw ValidationError("grid", "must be >= 1");
}

Vec2 transform_to_ego(Vec2 world_point, const EgoState& ego) {
  return rotate(world_point - ego.position, -ego.heading);
}

Vec2 transform_to_world(Vec2 ego_point, const EgoState& ego) {
  return rotate(ego_point, ego.heading) + ego.position;
}

Polygon transform_to_ego(std::span<const Vec2> world_poly, const EgoState& ego) {
  Polygon out;
  out.reserve(world_poly.size());
  for (const Vec2& p : world_poly) out.push_back(transform_to_ego(p, ego));
  return out;
}

SceneRaster rasterize_polygons(std::span<const Polygon> polys, const RasterWindow& window) {
  validate(window);
  const int g = window.grid;
  SceneRaster raster;
  raster.grid = g;
  raster.cells.assign(static_cast<std::size_t>(g) * g, 0.0);
  const double cw = window.cell_w();
  const double ch = window.cell_h();
  const double cell_area = cw * ch;

  for (const Polygon& world_poly : polys) {
    if (world_poly.size() < 3) continue;
    // Work in window-local coordinates so a common shift cancels before clipping.
    Polygon poly;
    poly.reserve(world_poly.size());
    for (const Vec2& p : world_poly) poly.push_back({p.x - window.x_min, p.y - window.y_min});
    if (signed_area(poly) < 0) std::reverse(poly.begin(), poly.end());

    double min_x = poly[0].x, max_x = poly[0].x, min_y = poly[0].y, max_y = poly[0].y;
    for (const Vec2& p : poly) {
      min_x = std::min(min_x, p.x);
      max_x = std::max(max_x, p.x);
      min_y = std::min(min_y, p.y);
      max_y = std::max(max_y, p.y);
    }
    const int ix0 = std::max(0, static_cast<int>(std::floor(min_x / cw)));
    const int ix1 = std::min(g - 1, static_cast<int>(std::floor(max_x / cw)));
    const int iy0 = std::max(0, static_cast<int>(std::floor(min_y / ch)));
    const int iy1 = std::min(g - 1, static_cast<int>(std::floor(max_y / ch)));
    for (int iy = iy0; iy <= iy1; ++iy) {
      for (int ix = ix0; ix <= ix1; ++ix) {
        const double x0 = ix * cw;
        const double y0 = iy * ch;
        const std::array<Vec2, 4> cell{Vec2{x0, y0}, Vec2{x0 + cw, y0}, Vec2{x0 + cw, y0 + ch},
                                       Vec2{x0, y0 + ch}};
        const Polygon clipped = clip_convex(poly, cell);
        const double a = signed_area(clipped);
        if (a > 0) raster.cells[static_cast<std::size_t>(iy) * g + ix] += a / cell_area;
      }
    }
  }
  for (double& c : raster.cells) c = std::clamp(c, 0.0, 1.0);
  return raster;
}

SceneRaster rasterize_scene(const SceneState& truth, const RasterWindow& window) {
  std::vector<Polygon> polys;
  polys.reserve(truth.objects.size());
  for (const TruthObject& obj : truth.objects) polys.push_back(transform_to_ego(obj.footprint, truth.ego));
  SceneRaster raster = rasterize_polygons(polys, window);
  raster.tick = truth.tick;
  return raster;
}

}  // namespace depcage
