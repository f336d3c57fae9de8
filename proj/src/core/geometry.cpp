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

#include "geometry.hpp"

#include <algorithm>
#include <numbers>

#include "rng.hpp"

namespace depcage {

double signed_area(std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += cross(poly[i], poly[(i + 1) % n]);
  }
  return 0.5 * acc;
}

bool is_convex(std::span<const Vec2> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  const double area = signed_area(poly);
  if (std::abs(area) <= 1e-12) return false;
  const double sign = area > 0 ? 1.0 : -1.0;
  double turning = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[(i + 1) % n];
    const Vec2 c = poly[(i + 2) % n];
    const Vec2 e1 = b - a;
    const Vec2 e2 = c - b;
    if (sign * cross(e1, e2) < -1e-12) return false;
    turning += std::atan2(cross(e1, e2), dot(e1, e2));
  }
  // rules out star-shaped self-intersecting windings
  return std::abs(std::abs(turning) - 2.0 * std::numbers::pi) < 1e-6;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return norm(p - a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return norm(p - (a + ab * t));
}

bool contains(std::span<const Vec2> poly, Vec2 p, double tol) {
  const std::size_t n = poly.size();
  if (n == 0) return false;
  for (std::size_t i = 0; i < n; ++i) {
    if (point_segment_distance(p, poly[i], poly[(i + 1) % n]) <= tol) return true;
  }
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2 a = poly[i];
    const Vec2 b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

namespace {

int orientation(Vec2 a, Vec2 b, Vec2 c) {
  const double v = cross(b - a, c - a);
  if (v > 0) return 1;
  if (v < 0) return -1;
  return 0;
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

}  // namespace

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const int o1 = orientation(a, b, c);
  const int o2 = orientation(a, b, d);
  const int o3 = orientation(c, d, a);
  const int o4 = orientation(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

bool polygons_intersect(std::span<const Vec2> a, std::span<const Vec2> b) {
  if (a.empty() || b.empty()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Vec2 a0 = a[i];
    const Vec2 a1 = a[(i + 1) % a.size()];
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (segments_intersect(a0, a1, b[j], b[(j + 1) % b.size()])) return true;
    }
  }
  return contains(a, b.front(), 0.0) || contains(b, a.front(), 0.0);
}

Polygon clip_convex(std::span<const Vec2> subject, std::span<const Vec2> clip) {
  Polygon output(subject.begin(), subject.end());
  const std::size_t m = clip.size();
  for (std::size_t i = 0; i < m && !output.empty(); ++i) {
    const Vec2 c0 = clip[i];
    const Vec2 c1 = clip[(i + 1) % m];
    const Vec2 edge = c1 - c0;
    const Polygon input = std::move(output);
    output.clear();
    const auto side = [&](Vec2 p) { return cross(edge, p - c0); };
    for (std::size_t k = 0; k < input.size(); ++k) {
      const Vec2 cur = input[k];
      const Vec2 prev = input[(k + input.size() - 1) % input.size()];
      const double s_cur = side(cur);
      const double s_prev = side(prev);
      if (s_cur >= 0) {
        if (s_prev < 0) {
          const double t = s_prev / (s_prev - s_cur);
          output.push_back(prev + (cur - prev) * t);
        }
        output.push_back(cur);
      } else if (s_prev >= 0) {
        const double t = s_prev / (s_prev - s_cur);
        output.push_back(prev + (cur - prev) * t);
      }
    }
  }
  return output;
}

Polygon convex_hull(std::span<const Vec2> points) {
  Polygon pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  Polygon hull(2 * pts.size());
  std::size_t k = 0;
  for (const Vec2& p : pts) {
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    const Vec2 p = pts[i];
    while (k >= lower && cross(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= 0) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);
  return hull;
}

std::optional<double> ray_segment_hit(Vec2 origin, Vec2 dir, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double denom = cross(dir, ab);
  const Vec2 ao = a - origin;
  if (denom == 0.0) {
    // parallel; collinear overlap hits the nearer endpoint
    if (cross(ao, dir) != 0.0) return std::nullopt;
    const double ta = dot(a - origin, dir);
    const double tb = dot(b - origin, dir);
    if (ta < 0 && tb < 0) return std::nullopt;
    if (ta < 0 || tb < 0) return 0.0;
    return std::min(ta, tb);
  }
  const double t = cross(ao, ab) / denom;
  const double u = cross(ao, dir) / denom;
  if (t < 0.0 || u < 0.0 || u > 1.0) return std::nullopt;
  return t;
}

std::array<Vec2, 4> OrientedBox::corners() const {
  const Vec2 u{std::cos(heading), std::sin(heading)};
  const Vec2 v{-u.y, u.x};
  const Vec2 hu = u * (0.5 * length);
  const Vec2 hv = v * (0.5 * width);
  return {center - hu - hv, center + hu - hv, center + hu + hv, center - hu + hv};
}

double normalize_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

namespace {

OrientedBox make_box(Vec2 u, double min_u, double max_u, double min_v, double max_v) {
  const Vec2 v{-u.y, u.x};
  OrientedBox box;
  const double mid_u = 0.5 * (min_u + max_u);
  const double mid_v = 0.5 * (min_v + max_v);
  box.center = u * mid_u + v * mid_v;
  box.length = max_u - min_u;
  box.width = max_v - min_v;
  box.heading = std::atan2(u.y, u.x);
  if (box.width > box.length) {
    std::swap(box.length, box.width);
    box.heading += 0.5 * std::numbers::pi;
  }
  // fold into (-pi/2, pi/2]; a rectangle is symmetric under half turns
  box.heading = normalize_angle(box.heading);
  if (box.heading > 0.5 * std::numbers::pi) box.heading -= std::numbers::pi;
  if (box.heading <= -0.5 * std::numbers::pi) box.heading += std::numbers::pi;
  return box;
}

}  // namespace

OrientedBox min_area_rect(std::span<const Vec2> points) {
  const Polygon hull = convex_hull(points);
  if (hull.empty()) return {};
  if (hull.size() == 1) return OrientedBox{hull[0], 0.0, 0.0, 0.0};
  if (hull.size() == 2) {
    const Vec2 d = hull[1] - hull[0];
    const double len = norm(d);
    return make_box(d * (1.0 / len), dot(hull[0], d) / len, dot(hull[1], d) / len,
                    cross(d, hull[0]) / len, cross(d, hull[0]) / len);
  }

  const std::size_t n = hull.size();
  const auto at = [&](std::size_t i) { return hull[i % n]; };
  // calipers: far along edge (right), far from edge (top), back along edge (left)
  std::size_t right = 1;
  std::size_t top = 1;
  std::size_t left = 1;
  double best_area = std::numeric_limits<double>::infinity();
  OrientedBox best;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 edge = at(i + 1) - at(i);
    const Vec2 u = edge * (1.0 / norm(edge));
    const Vec2 v{-u.y, u.x};
    if (i == 0) right = top = left = 1;
    while (dot(at(right + 1) - at(right), u) > 0) ++right;
    if (top < right) top = right;
    while (dot(at(top + 1) - at(top), v) > 0) ++top;
    if (left < top) left = top;
    while (dot(at(left + 1) - at(left), u) < 0) ++left;

    const double min_u = dot(at(left), u);
    const double max_u = dot(at(right), u);
    const double min_v = dot(at(i), v);
    const double max_v = dot(at(top), v);
    const double area = (max_u - min_u) * (max_v - min_v);
    if (area < best_area) {
      best_area = area;
      best = make_box(u, min_u, max_u, min_v, max_v);
    }
  }
  return best;
}

namespace {

Circle circle_from(Vec2 a, Vec2 b) {
  const Vec2 c = (a + b) * 0.5;
  return {c, norm(a - c)};
}

Circle circle_from(Vec2 a, Vec2 b, Vec2 c) {
  const Vec2 ab = b - a;
  const Vec2 ac = c - a;
  const double d = 2.0 * cross(ab, ac);
  if (std::abs(d) < 1e-18) {
    // collinear: widest pair
    Circle best = circle_from(a, b);
    for (const Circle cand : {circle_from(a, c), circle_from(b, c)}) {
      if (cand.radius > best.radius) best = cand;
    }
    return best;
  }
  const double ab2 = dot(ab, ab);
  const double ac2 = dot(ac, ac);
  const Vec2 offset{(ac.y * ab2 - ab.y * ac2) / d, (ab.x * ac2 - ac.x * ab2) / d};
  return {a + offset, norm(offset)};
}

bool in_circle(const Circle& c, Vec2 p) { return norm(p - c.center) <= c.radius * (1.0 + 1e-12) + 1e-12; }

}  // namespace

Circle min_enclosing_circle(std::span<const Vec2> points) {
  if (points.empty()) return {};
  std::vector<Vec2> pts(points.begin(), points.end());
  Rng rng(0x5eedc1c1eULL);
  for (std::size_t i = pts.size(); i > 1; --i) {
    std::swap(pts[i - 1], pts[rng.below(i)]);
  }
  Circle c{pts[0], 0.0};
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (in_circle(c, pts[i])) continue;
    c = {pts[i], 0.0};
    for (std::size_t j = 0; j < i; ++j) {
      if (in_circle(c, pts[j])) continue;
      c = circle_from(pts[i], pts[j]);
      for (std::size_t k = 0; k < j; ++k) {
        if (!in_circle(c, pts[k])) c = circle_from(pts[i], pts[j], pts[k]);
      }
    }
  }
  return c;
}

Vec2 centroid(std::span<const Vec2> poly) {
  const double a = signed_area(poly);
  if (std::abs(a) < 1e-15) {
    Vec2 acc;
    for (const Vec2& p : poly) acc = acc + p;
    return poly.empty() ? acc : acc * (1.0 / static_cast<double>(poly.size()));
  }
  Vec2 acc;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = poly[i];
    const Vec2 q = poly[(i + 1) % n];
    const double w = cross(p, q);
    acc = acc + (p + q) * w;
  }
  return acc * (1.0 / (6.0 * a));
}

}  // namespace depcage
