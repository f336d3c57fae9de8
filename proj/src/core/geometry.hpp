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

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace depcage {

struct Vec2 {
  double x{0.0};
  double y{0.0};

  constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr bool operator==(const Vec2&) const = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline Vec2 rotate(Vec2 p, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * p.x - s * p.y, s * p.x + c * p.y};
}

using Polygon = std::vector<Vec2>;

/// Shoelace area; positive for counter-clockwise winding.
double signed_area(std::span<const Vec2> poly);

/// True for a simple convex polygon with non-zero area (either winding).
/// Collinear consecutive vertices are tolerated.
bool is_convex(std::span<const Vec2> poly);

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);

/// Inclusive point-in-polygon: points within `tol` of the boundary count
/// as inside. Works for simple non-convex polygons (even-odd rule).
bool contains(std::span<const Vec2> poly, Vec2 p, double tol = 1e-9);

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d);

/// Closed-set intersection test for two simple polygons.
bool polygons_intersect(std::span<const Vec2> a, std::span<const Vec2> b);

/// Sutherland-Hodgman clip of `subject` against a convex CCW `clip` polygon.
Polygon clip_convex(std::span<const Vec2> subject, std::span<const Vec2> clip);

/// Andrew's monotone chain. CCW, no repeated or collinear vertices.
Polygon convex_hull(std::span<const Vec2> points);

/// Distance along the ray (origin + t * dir, |dir| = 1) to segment ab.
std::optional<double> ray_segment_hit(Vec2 origin, Vec2 dir, Vec2 a, Vec2 b);

struct OrientedBox {
  Vec2 center;
  double length{0.0};  // along heading, length >= width
  double width{0.0};
  double heading{0.0};  // radians, in (-pi/2, pi/2]

  std::array<Vec2, 4> corners() const;
  double area() const { return length * width; }
};

/// Minimum-area enclosing rectangle by rotating calipers over the hull.
OrientedBox min_area_rect(std::span<const Vec2> points);

struct Circle {
  Vec2 center;
  double radius{0.0};
};

/// Minimum enclosing circle (Welzl, iterative, fixed-seed shuffle).
Circle min_enclosing_circle(std::span<const Vec2> points);

Vec2 centroid(std::span<const Vec2> poly);

double normalize_angle(double a);  // into (-pi, pi]

}  // namespace depcage
