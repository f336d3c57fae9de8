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

#include "function_monitor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "errors.hpp"

namespace depcage::fm {

void validate(const SafeZoneParams& p) {
  if (!(p.a_max > 0)) throw ValidationError("a_max", "must be > 0");
  if (!(p.t_react > 0)) throw ValidationError("t_react", "must be > 0");
  if (!(p.lateral_margin > 0)) throw ValidationError("lateral_margin", "must be > 0");
  if (!(p.standstill_margin > 0)) throw ValidationError("standstill_margin", "must be > 0");
  if (!(p.focus_extension >= 0)) throw ValidationError("focus_extension", "must be >= 0");
}

double stopping_distance(double speed, const SafeZoneParams& params) {
  return speed * params.t_react + speed * speed / (2.0 * params.a_max);
}

namespace {

constexpr double kStraight = 1e-9;  // |curvature| below this is a straight band

Polygon swept_band(const EgoState& ego, double band_length, double half_width, double curvature) {
  const double rear = -ego.rear_overhang();
  const double front = ego.front_x();

  if (std::abs(curvature) < kStraight) {
    const double tip = front + band_length;
    return {{rear, -half_width}, {front, -half_width}, {tip, -half_width},
            {tip, half_width},   {front, half_width},  {rear, half_width}};
  }

  const double radius = 1.0 / std::abs(curvature);
  const double turn = curvature > 0 ? 1.0 : -1.0;
  const Vec2 pivot{front, turn * radius};
  // direction from the pivot to the centreline point after turning by phi
  const auto radial = [&](double phi) { return Vec2{std::sin(phi), -turn * std::cos(phi)}; };

  const double arc = std::min(band_length, std::numbers::pi * radius);  // at most a half turn
  const double end_angle = arc / radius;
  const double step = kZoneSampleStep / radius;
  const double outer_r = radius + half_width;
  const double inner_r = std::max(radius - half_width, 0.0);

  std::vector<double> angles;
  for (std::size_t k = 0;; ++k) {
    const double phi = static_cast<double>(k) * step;
    if (phi >= end_angle) break;
    angles.push_back(phi);
  }
  angles.push_back(end_angle);

  std::vector<Vec2> outer;
  std::vector<Vec2> inner;
  outer.reserve(angles.size());
  inner.reserve(angles.size());
  for (std::size_t i = 0; i < angles.size(); ++i) {
    const double phi = angles[i];
    const bool is_end = i + 1 == angles.size();
    // grid vertices sit where consecutive tangents meet; the end vertex sits
    // on the tangent of its own grid interval
    double offset_from_tangent = 0.5 * step;
    if (is_end) {
      const double into_interval = phi - std::floor(phi / step) * step;
      offset_from_tangent = std::abs(0.5 * step - into_interval);
    }
    outer.push_back(pivot + radial(phi) * (outer_r / std::cos(offset_from_tangent)));
    inner.push_back(pivot + radial(phi) * inner_r);
  }

  // CCW: rear-right, along the right side to the tip, back along the left side.
  const std::vector<Vec2>& right = turn > 0 ? outer : inner;
  const std::vector<Vec2>& left = turn > 0 ? inner : outer;
  Polygon poly;
  poly.reserve(2 * angles.size() + 4);
  poly.push_back({rear, -half_width});
  poly.push_back({front, -half_width});
  poly.insert(poly.end(), right.begin(), right.end());
  poly.insert(poly.end(), left.rbegin(), left.rend());
  poly.push_back({front, half_width});
  poly.push_back({rear, half_width});
  return poly;
}

}  // namespace

SafeZone compute_safe_zone(const EgoState& ego, const SafeZoneParams& params) {
  validate(params);
  const double d = stopping_distance(ego.speed, params);
  const double curvature = std::tan(ego.steering_angle) / ego.wheelbase;
  const double half = 0.5 * ego.width;
  SafeZone zone;
  zone.stopping_distance = d;
  zone.clear_zone = swept_band(ego, d + params.standstill_margin, half + params.lateral_margin, curvature);
  const double stretch = 1.0 + params.focus_extension;
  zone.focus_zone =
      swept_band(ego, d * stretch + params.standstill_margin, half + params.lateral_margin * stretch, curvature);
  return zone;
}

bool zone_contains(std::span<const Vec2> outer, std::span<const Vec2> inner, double tol) {
  return std::all_of(inner.begin(), inner.end(), [&](Vec2 p) { return contains(outer, p, tol); });
}

std::vector<ObjectList> filter_to_zone(std::span<const ObjectList> lists, const SafeZone& zone) {
  std::vector<ObjectList> out;
  out.reserve(lists.size());
  for (const ObjectList& list : lists) {
    ObjectList kept{list.tick, list.source, {}};
    for (const DetectedObject& o : list.objects) {
      const auto corners = o.box().corners();
      if (polygons_intersect(zone.focus_zone, corners)) kept.objects.push_back(o);
    }
    out.push_back(std::move(kept));
  }
  return out;
}

namespace {

double extent_delta(const DetectedObject& a, const DetectedObject& b) {
  return std::max(std::abs(a.length - b.length), std::abs(a.width - b.width));
}

}  // namespace

FmVerdict validate(std::span<const ObjectList> lists, const SafeZone& zone, const HaraThresholds& thresholds,
                   std::int64_t tick) {
  FmVerdict verdict;
  verdict.tick = tick;
  verdict.zone_used = zone;

  const std::vector<ObjectList> in_zone = filter_to_zone(lists, zone);
  const MatchSet matches = match_across_sources(in_zone, thresholds);
  const std::size_t source_count = in_zone.size();
  const int min_agree = thresholds.min_agreeing_for(source_count);

  std::set<std::string> all_sources;
  for (const auto& l : in_zone) all_sources.insert(l.source);

  for (const MatchGroup& group : matches.groups) {
    Evidence ev;
    std::vector<const DetectedObject*> objs;
    for (const auto& m : group.members) {
      const auto& o = in_zone[m.list].objects[m.object];
      objs.push_back(&o);
      ev.members.push_back({in_zone[m.list].source, o});
    }

    // pairwise threshold checks
    const std::size_t n = objs.size();
    std::vector<std::size_t> agreements(n, 0);
    bool center_bad = false, extent_bad = false, class_bad = false;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double dc = norm(objs[i]->center - objs[j]->center);
        const double de = extent_delta(*objs[i], *objs[j]);
        ev.max_center_delta = std::max(ev.max_center_delta, dc);
        ev.max_extent_delta = std::max(ev.max_extent_delta, de);
        const bool c_bad = dc > thresholds.max_center_delta;
        const bool e_bad = de > thresholds.max_extent_delta;
        const bool k_bad = !thresholds.class_compatibility.compatible(objs[i]->object_class, objs[j]->object_class);
        center_bad |= c_bad;
        extent_bad |= e_bad;
        class_bad |= k_bad;
        if (!(c_bad || e_bad || k_bad)) {
          ++agreements[i];
          ++agreements[j];
        }
      }
    }
    if (center_bad) ev.violations.emplace_back("center_delta");
    if (extent_bad) ev.violations.emplace_back("extent_delta");
    if (class_bad) ev.violations.emplace_back("class_incompatible");
    if (center_bad || extent_bad || class_bad) {
      // a member is in the majority when it agrees with more than half the group (itself included)
      std::set<std::string> minority;
      bool any_majority = false;
      for (std::size_t i = 0; i < n; ++i) {
        if (2 * (agreements[i] + 1) > n) {
          any_majority = true;
        } else {
          minority.insert(ev.members[i].source);
        }
      }
      if (!any_majority) {
        for (const auto& m : ev.members) minority.insert(m.source);
      }
      ev.implicated.insert(minority.begin(), minority.end());
    }

    if (static_cast<int>(n) < min_agree) {
      ev.violations.emplace_back("unconfirmed");
      std::set<std::string> seen;
      for (const auto& m : ev.members) seen.insert(m.source);
      const std::size_t k = seen.size();
      const std::size_t others = source_count - k;
      if (k < others) {
        ev.implicated.insert(seen.begin(), seen.end());
      } else if (k == others) {
        ev.implicated.insert(all_sources.begin(), all_sources.end());
      } else {
        for (const auto& s : all_sources) {
          if (!seen.contains(s)) ev.implicated.insert(s);
        }
      }
      // note a nearby detection of an incompatible class, if any
      for (const auto& l : in_zone) {
        if (seen.contains(l.source)) continue;
        const bool conflict = std::any_of(l.objects.begin(), l.objects.end(), [&](const DetectedObject& o) {
          return norm(o.center - objs.front()->center) <= thresholds.gating_distance &&
                 !thresholds.class_compatibility.compatible(o.object_class, objs.front()->object_class);
        });
        if (conflict) {
          ev.violations.emplace_back("class_conflict");
          break;
        }
      }
    }

    if (!ev.violations.empty()) {
      verdict.implicated_sources.insert(ev.implicated.begin(), ev.implicated.end());
      verdict.per_object_evidence.push_back(std::move(ev));
    }
  }
  verdict.flag = !verdict.per_object_evidence.empty();
  return verdict;
}

}  // namespace depcage::fm
