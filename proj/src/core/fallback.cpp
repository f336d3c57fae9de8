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

#include "fallback.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numbers>

#include "errors.hpp"

namespace depcage::fallback {

void validate(const ClusterParams& p) {
  if (!(p.eps > 0.0)) throw ValidationError("eps", "must be > 0");
  if (p.min_pts < 1) throw ValidationError("min_pts", "must be >= 1");
}

namespace {

/// Uniform grid with cell size eps; neighbour queries scan the 3x3 block and
/// return indices in ascending order.
class NeighbourGrid {
 public:
  NeighbourGrid(std::span<const Vec2> points, double eps) : points_(points), eps_(eps) {
    for (std::size_t i = 0; i < points.size(); ++i) cells_[key(points[i])].push_back(i);
  }

  std::vector<std::size_t> within(std::size_t i) const {
    std::vector<std::size_t> out;
    const auto [cx, cy] = key(points_[i]);
    for (long dx = -1; dx <= 1; ++dx) {
      for (long dy = -1; dy <= 1; ++dy) {
        const auto it = cells_.find({cx + dx, cy + dy});
        if (it == cells_.end()) continue;
        for (const std::size_t j : it->second) {
          if (norm(points_[j] - points_[i]) <= eps_) out.push_back(j);
        }
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::pair<long, long> key(Vec2 p) const {
    return {static_cast<long>(std::floor(p.x / eps_)), static_cast<long>(std::floor(p.y / eps_))};
  }

  std::span<const Vec2> points_;
  double eps_;
  std::map<std::pair<long, long>, std::vector<std::size_t>> cells_;
};

constexpr int kUnvisited = -2;
constexpr int kNoise = -1;

std::vector<Cluster> collect(const std::vector<int>& labels, int count) {
  std::vector<Cluster> clusters(static_cast<std::size_t>(count));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= 0) clusters[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  return clusters;
}

std::vector<Cluster> dbscan(std::span<const Vec2> points, const ClusterParams& params) {
  const NeighbourGrid grid(points, params.eps);
  std::vector<int> labels(points.size(), kUnvisited);
  int next = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (labels[i] != kUnvisited) continue;
    const auto seeds = grid.within(i);
    if (static_cast<int>(seeds.size()) < params.min_pts) {
      labels[i] = kNoise;
      continue;
    }
    const int id = next++;
    labels[i] = id;
    std::deque<std::size_t> frontier(seeds.begin(), seeds.end());
    while (!frontier.empty()) {
      const std::size_t j = frontier.front();
      frontier.pop_front();
      if (labels[j] == kNoise) labels[j] = id;  // border point, first cluster wins
      if (labels[j] != kUnvisited) continue;
      labels[j] = id;
      const auto nbrs = grid.within(j);
      if (static_cast<int>(nbrs.size()) >= params.min_pts) {
        frontier.insert(frontier.end(), nbrs.begin(), nbrs.end());
      }
    }
  }
  return collect(labels, next);
}

std::vector<Cluster> euclidean(std::span<const Vec2> points, const ClusterParams& params) {
  const NeighbourGrid grid(points, params.eps);
  std::vector<int> labels(points.size(), kUnvisited);
  std::vector<Cluster> clusters;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (labels[i] != kUnvisited) continue;
    Cluster component;
    std::deque<std::size_t> frontier{i};
    labels[i] = 0;
    while (!frontier.empty()) {
      const std::size_t j = frontier.front();
      frontier.pop_front();
      component.push_back(j);
      for (const std::size_t k : grid.within(j)) {
        if (labels[k] == kUnvisited) {
          labels[k] = 0;
          frontier.push_back(k);
        }
      }
    }
    if (static_cast<int>(component.size()) >= params.min_pts) {
      std::sort(component.begin(), component.end());
      clusters.push_back(std::move(component));
    }
  }
  return clusters;
}

}  // namespace

std::vector<Cluster> cluster(std::span<const Vec2> points, const ClusterParams& params) {
  validate(params);
  if (points.empty()) return {};
  return params.method == ClusterMethod::dbscan ? dbscan(points, params) : euclidean(points, params);
}

std::vector<Cluster> cluster(const PointCloud& cloud, const ClusterParams& params) {
  std::vector<Vec2> pts;
  pts.reserve(cloud.points.size());
  for (const auto& p : cloud.points) pts.push_back(p.position);
  return cluster(pts, params);
}

namespace {

double distance_to_box_outline(Vec2 p, const OrientedBox& box) {
  const auto c = box.corners();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < 4; ++i) best = std::min(best, point_segment_distance(p, c[i], c[(i + 1) % 4]));
  return best;
}

}  // namespace

ShapeFit fit_shape(std::span<const Vec2> points) {
  if (points.empty()) throw ValidationError("cluster", "must not be empty");
  ShapeFit fit;
  fit.box = min_area_rect(points);
  fit.circle = min_enclosing_circle(points);
  if (points.size() == 1 || fit.circle.radius == 0.0) {
    fit.shape = Shape::cylinder;
    fit.circle = {points[0], 0.0};
    fit.degenerate = true;
    return fit;
  }

  double rect_sum = 0.0;
  double circ_sum = 0.0;
  for (const Vec2& p : points) {
    rect_sum += distance_to_box_outline(p, fit.box);
    circ_sum += std::abs(fit.circle.radius - norm(p - fit.circle.center));
  }
  const double n = static_cast<double>(points.size());
  const double rect_size = 0.5 * (fit.box.length + fit.box.width);
  fit.rectangle_residual = rect_sum / n / rect_size;
  fit.cylinder_residual = circ_sum / n / fit.circle.radius;
  // residuals closer than kTie are rounding noise. Exact point sets can fit
  // both outlines perfectly (corners lie on their circumcircle, a regular
  // octagon on an edge-aligned square), so a tie goes to the smaller shape
  // and only then to the rectangle.
  constexpr double kTie = 1e-9;
  const bool tie = std::abs(fit.cylinder_residual - fit.rectangle_residual) <= kTie;
  const double circle_area = std::numbers::pi * fit.circle.radius * fit.circle.radius;
  if (tie ? circle_area < fit.box.area() - kTie : fit.cylinder_residual < fit.rectangle_residual) {
    fit.shape = Shape::cylinder;
    fit.residual = fit.cylinder_residual;
  } else {
    fit.shape = Shape::rectangle;
    fit.residual = fit.rectangle_residual;
  }
  return fit;
}

std::vector<ShapeRule> default_rules() {
  return {
      ShapeRule{Shape::rectangle, {3.5, 6.0}, {1.5, 2.2}, ObjectClass::vehicle},
      ShapeRule{Shape::cylinder, {0.0, 1e9}, {0.1, 0.5}, ObjectClass::pedestrian},
  };
}

void validate(std::span<const ShapeRule> rules) {
  for (std::size_t i = 0; i < rules.size(); ++i) {
    const auto& r = rules[i];
    const std::string path = "rules/" + std::to_string(i);
    if (!(r.length_range.min <= r.length_range.max)) throw ValidationError(path + "/length_range", "min > max");
    if (!(r.width_range.min <= r.width_range.max)) throw ValidationError(path + "/width_range", "min > max");
    for (std::size_t j = 0; j < i; ++j) {
      const auto& o = rules[j];
      if (o.shape != r.shape) continue;
      const auto overlap = [](Range a, Range b) { return a.min <= b.max && b.min <= a.max; };
      const bool len_overlap = r.shape == Shape::cylinder || overlap(r.length_range, o.length_range);
      if (len_overlap && overlap(r.width_range, o.width_range)) {
        throw ValidationError(path, "overlaps rule " + std::to_string(j));
      }
    }
  }
}

DetectedObject classify_shape(const ShapeFit& fit, std::span<const ShapeRule> rules) {
  DetectedObject det;
  det.object_class = ObjectClass::static_obstacle;
  if (fit.shape == Shape::rectangle) {
    det.center = fit.box.center;
    det.heading = fit.box.heading;
    det.length = std::max(fit.box.length, kMinReportedExtent);
    det.width = std::max(fit.box.width, kMinReportedExtent);
  } else {
    det.center = fit.circle.center;
    det.heading = 0.0;
    det.length = det.width = std::max(2.0 * fit.circle.radius, kMinReportedExtent);
  }
  for (const ShapeRule& rule : rules) {
    if (rule.shape != fit.shape) continue;
    const bool match = fit.shape == Shape::rectangle
                           ? rule.length_range.contains(fit.box.length) && rule.width_range.contains(fit.box.width)
                           : rule.width_range.contains(fit.circle.radius);
    if (match) {
      det.object_class = rule.class_out;
      break;
    }
  }
  return det;
}

ObjectList perceive(const PointCloud& cloud, const FallbackConfig& config) {
  ObjectList list;
  list.tick = cloud.tick;
  list.source = std::string(kDeterministicSource);
  for (const Cluster& c : cluster(cloud, config.cluster)) {
    std::vector<Vec2> pts;
    pts.reserve(c.size());
    for (const std::size_t i : c) pts.push_back(cloud.points[i].position);
    DetectedObject det = classify_shape(fit_shape(pts), config.rules);
    det.confidence = config.confidence;
    det.source = list.source;
    list.objects.push_back(std::move(det));
  }
  return list;
}

}  // namespace depcage::fallback
