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
 * @file fallback.hpp
 *
 * Non-learned fallback perception: cluster LiDAR returns, fit a rectangle
 * or a circle to each cluster and map the fitted size onto a class with a
 * fixed rule table. Output is a pure function of (cloud, params, rules).
 */

#pragma once

#include <cstddef>
#include <vector>

#include "scene.hpp"

namespace depcage::fallback {

enum class ClusterMethod { euclidean, dbscan };

struct ClusterParams {
  double eps{0.7};
  int min_pts{3};
  ClusterMethod method{ClusterMethod::dbscan};

  bool operator==(const ClusterParams&) const = default;
};

void validate(const ClusterParams& p);

using Cluster = std::vector<std::size_t>;  // ascending point indices

/// Clusters ordered by their smallest member index. Neighbourhoods are
/// closed balls (distance <= eps).
///
/// dbscan: a point with >= min_pts neighbours (itself included) is core;
/// clusters grow from cores in index order and a border point joins the
/// first cluster that reaches it. euclidean: connected components of the
/// eps graph, components smaller than min_pts are noise.
std::vector<Cluster> cluster(std::span<const Vec2> points, const ClusterParams& params);
std::vector<Cluster> cluster(const PointCloud& cloud, const ClusterParams& params);

enum class Shape { rectangle, cylinder };

struct ShapeFit {
  Shape shape{Shape::rectangle};
  OrientedBox box;  // minimum-area rectangle, always filled
  Circle circle;    // minimum enclosing circle, always filled
  double residual{0.0};  // of the chosen shape
  double rectangle_residual{0.0};
  double cylinder_residual{0.0};
  bool degenerate{false};
};

/// Mean distance of the points to the fitted outline, divided by a
/// characteristic size ((l + w) / 2 for the rectangle, radius for the
/// circle). The lower residual wins; on a tie the shape with the smaller
/// area wins, then the rectangle.
ShapeFit fit_shape(std::span<const Vec2> points);

struct Range {
  double min{0.0};
  double max{0.0};
  bool contains(double v) const { return v >= min && v <= max; }
  bool operator==(const Range&) const = default;
};

/// For rectangles both ranges apply to (length, width) of the fitted box.
/// For cylinders only `width_range` applies, matched against the radius.
struct ShapeRule {
  Shape shape{Shape::rectangle};
  Range length_range{0.0, 1e9};
  Range width_range{0.0, 1e9};
  ObjectClass class_out{ObjectClass::static_obstacle};

  bool operator==(const ShapeRule&) const = default;
};

/// rectangle [3.5, 6.0] x [1.5, 2.2] -> vehicle; cylinder radius [0.1, 0.5]
/// (diameter 0.2 - 1.0) -> pedestrian.
std::vector<ShapeRule> default_rules();

/// Throws ValidationError on empty/inverted ranges or overlapping rules of
/// the same shape.
void validate(std::span<const ShapeRule> rules);

inline constexpr double kMinReportedExtent = 0.1;

DetectedObject classify_shape(const ShapeFit& fit, std::span<const ShapeRule> rules);

struct FallbackConfig {
  ClusterParams cluster;
  std::vector<ShapeRule> rules{default_rules()};
  double confidence{0.8};
  bool operator==(const FallbackConfig&) const = default;
};

/// Full path: cluster -> fit -> classify. Clusters keep cloud index order.
ObjectList perceive(const PointCloud& cloud, const FallbackConfig& config);

}  // namespace depcage::fallback
