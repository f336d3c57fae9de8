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

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the library's geometry, so a shared bug cannot
// make an oracle agree with the code under test.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <utility>
#include <vector>

namespace oracle {

struct P {
  double x{0.0};
  double y{0.0};
};

/// Point in a convex polygon of either winding, via half-plane signs.
inline bool in_convex(const std::vector<P>& poly, P q) {
  int sign = 0;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const P a = poly[i];
    const P b = poly[(i + 1) % n];
    const double c = (b.x - a.x) * (q.y - a.y) - (b.y - a.y) * (q.x - a.x);
    if (c == 0.0) continue;
    const int s = c > 0 ? 1 : -1;
    if (sign == 0) sign = s;
    if (s != sign) return false;
  }
  return true;
}

/// Monte Carlo cell coverage: fraction of uniform samples per cell that fall
/// in any polygon (union, so overlaps are not double counted).
inline std::vector<double> mc_coverage(const std::vector<std::vector<P>>& polys, double x_min, double y_min,
                                       double width, double height, int grid, int samples_per_cell,
                                       std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> out(static_cast<std::size_t>(grid) * grid, 0.0);
  const double cw = width / grid;
  const double ch = height / grid;
  for (int iy = 0; iy < grid; ++iy) {
    for (int ix = 0; ix < grid; ++ix) {
      int hits = 0;
      for (int k = 0; k < samples_per_cell; ++k) {
        const P q{x_min + (ix + u(gen)) * cw, y_min + (iy + u(gen)) * ch};
        for (const auto& poly : polys) {
          if (in_convex(poly, q)) {
            ++hits;
            break;
          }
        }
      }
      out[static_cast<std::size_t>(iy) * grid + ix] = static_cast<double>(hits) / samples_per_cell;
    }
  }
  return out;
}

/// Axis-aligned rectangle centred on `c`, rotated by `heading`.
inline std::vector<P> box(P c, double length, double width, double heading) {
  const double ch = std::cos(heading), sh = std::sin(heading);
  const double hl = length / 2, hw = width / 2;
  std::vector<P> out;
  for (const auto& [dx, dy] : {std::pair{hl, hw}, std::pair{-hl, hw}, std::pair{-hl, -hw}, std::pair{hl, -hw}}) {
    out.push_back({c.x + ch * dx - sh * dy, c.y + sh * dx + ch * dy});
  }
  return out;
}

/// Connected components of the closed eps-graph by union-find over all
/// pairs. Components are sorted index sets, ordered by smallest member.
inline std::vector<std::vector<std::size_t>> eps_components(const std::vector<P>& pts, double eps) {
  const std::size_t n = pts.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  std::function<std::size_t(std::size_t)> find = [&](std::size_t i) {
    return parent[i] == i ? i : parent[i] = find(parent[i]);
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = pts[i].x - pts[j].x, dy = pts[i].y - pts[j].y;
      if (dx * dx + dy * dy <= eps * eps) parent[find(i)] = find(j);
    }
  }
  std::vector<std::vector<std::size_t>> comps;
  std::vector<long> slot(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    if (slot[r] < 0) {
      slot[r] = static_cast<long>(comps.size());
      comps.emplace_back();
    }
    comps[static_cast<std::size_t>(slot[r])].push_back(i);
  }
  return comps;
}

/// Area of the bounding rectangle aligned with angle `a`.
inline double aligned_area(const std::vector<P>& pts, double a) {
  const double c = std::cos(a), s = std::sin(a);
  double u0 = std::numeric_limits<double>::infinity(), u1 = -u0, v0 = u0, v1 = -u0;
  for (const P p : pts) {
    const double u = c * p.x + s * p.y;
    const double v = -s * p.x + c * p.y;
    u0 = std::min(u0, u);
    u1 = std::max(u1, u);
    v0 = std::min(v0, v);
    v1 = std::max(v1, v);
  }
  return (u1 - u0) * (v1 - v0);
}

/// Minimum bounding-rectangle area by a 0.1 degree sweep over [0, 90),
/// refined around the best coarse angles by a 0.001 degree sub-sweep and a
/// golden-section search.
inline double sweep_min_rect_area(const std::vector<P>& pts) {
  constexpr double deg = std::numbers::pi / 180.0;
  std::vector<std::pair<double, double>> coarse;
  for (int i = 0; i < 900; ++i) coarse.push_back({aligned_area(pts, i * 0.1 * deg), i * 0.1 * deg});
  std::sort(coarse.begin(), coarse.end());
  double best = coarse.front().first;
  for (std::size_t k = 0; k < 5; ++k) {
    const double centre = coarse[k].second;
    double fine_a = centre;
    double fine_v = coarse[k].first;
    for (int j = -100; j <= 100; ++j) {
      const double a = centre + j * 0.001 * deg;
      const double v = aligned_area(pts, a);
      if (v < fine_v) {
        fine_v = v;
        fine_a = a;
      }
    }
    double lo = fine_a - 0.001 * deg, hi = fine_a + 0.001 * deg;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 80; ++it) {
      const double m1 = hi - g * (hi - lo), m2 = lo + g * (hi - lo);
      if (aligned_area(pts, m1) < aligned_area(pts, m2)) {
        hi = m2;
      } else {
        lo = m1;
      }
    }
    best = std::min({best, fine_v, aligned_area(pts, 0.5 * (lo + hi))});
  }
  return best;
}

/// Smallest total centre distance over all one-to-one assignments between
/// two equally sized point sets.
inline double min_assignment_cost(const std::vector<P>& a, const std::vector<P>& b) {
  std::vector<std::size_t> perm(b.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) total += std::hypot(a[i].x - b[perm[i]].x, a[i].y - b[perm[i]].y);
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Straight-driving Safe Zone reach ahead of the rear axle for the focus
/// zone: front bumper + stretched stopping distance + standstill margin.
inline double straight_focus_reach(double speed, double wheelbase, double length, double a_max, double t_react,
                                   double standstill, double focus_ext) {
  const double front = wheelbase + 0.5 * (length - wheelbase);
  const double d = speed * t_react + speed * speed / (2.0 * a_max);
  return front + d * (1.0 + focus_ext) + standstill;
}

/// First tick at which an axis-aligned obstacle [x0, x1] x [y0, y1] ahead of
/// an ego driving straight along +x at constant speed overlaps the focus
/// zone, or -1 if it never does within `ticks`.
inline long first_focus_overlap_tick(double ego_x0, double speed, double dt, long ticks, double x0, double y0,
                                     double y1, double wheelbase, double width, double length, double a_max,
                                     double t_react, double lateral, double standstill, double focus_ext) {
  const double reach = straight_focus_reach(speed, wheelbase, length, a_max, t_react, standstill, focus_ext);
  const double half = width / 2 + lateral * (1.0 + focus_ext);
  if (y1 < -half || y0 > half) return -1;
  for (long k = 0; k < ticks; ++k) {
    const double ego_x = ego_x0 + speed * dt * static_cast<double>(k);
    if (x0 - ego_x <= reach) return k;
  }
  return -1;
}

}  // namespace oracle
