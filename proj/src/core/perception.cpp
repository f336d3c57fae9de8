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

#include "perception.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "errors.hpp"

namespace depcage::perception {

std::string_view to_string(Modality m) { return m == Modality::camera ? "camera" : "lidar"; }

std::optional<Modality> modality_from(std::string_view s) {
  if (s == "camera") return Modality::camera;
  if (s == "lidar") return Modality::lidar;
  return std::nullopt;
}

std::string_view to_string(Directive::Kind k) {
  switch (k) {
    case Directive::Kind::misclassify:
      return "misclassify";
    case Directive::Kind::drop:
      return "drop";
    case Directive::Kind::phantom:
      return "phantom";
    case Directive::Kind::freeze:
      return "freeze";
  }
  return "unknown";
}

void validate(const PerceptionModelConfig& cfg) {
  if (cfg.id.empty()) throw ValidationError("id", "must not be empty");
  if (cfg.id == kDeterministicSource || cfg.id == kFusedSource) {
    throw ValidationError("id", "'" + cfg.id + "' is reserved");
  }
  if (!(cfg.max_range > 0)) throw ValidationError("max_range", "must be > 0");
  if (!(cfg.fov > 0)) throw ValidationError("fov", "must be > 0");
  if (!(cfg.position_sigma >= 0)) throw ValidationError("noise/position_sigma", "must be >= 0");
  if (!(cfg.extent_sigma >= 0)) throw ValidationError("noise/extent_sigma", "must be >= 0");
  if (!(cfg.base_confidence >= 0 && cfg.base_confidence <= 1)) {
    throw ValidationError("base_confidence", "must lie in [0, 1]");
  }
  for (std::size_t i = 0; i < cfg.error_process.size(); ++i) {
    const auto& d = cfg.error_process[i];
    const std::string path = "error_process/" + std::to_string(i);
    if (!(d.end > d.start)) throw ValidationError(path, "end must be after start");
    if (d.kind == Directive::Kind::freeze && d.freeze_ticks < 1) {
      throw ValidationError(path + "/ticks", "must be >= 1");
    }
    if (d.kind == Directive::Kind::drop && d.object_id.empty()) {
      throw ValidationError(path + "/id", "must not be empty");
    }
    if (d.kind == Directive::Kind::phantom && !(d.phantom.length > 0 && d.phantom.width > 0)) {
      throw ValidationError(path + "/extent", "components must be > 0");
    }
  }
}

namespace {

bool visible(const PerceptionModelConfig& model, Vec2 center) {
  const double range = norm(center);
  if (range > model.max_range) return false;
  if (model.fov >= 2.0 * std::numbers::pi) return true;
  return std::abs(std::atan2(center.y, center.x)) <= 0.5 * model.fov;
}

double confidence_at(const PerceptionModelConfig& model, double range) {
  return std::clamp(model.base_confidence * (1.0 - 0.3 * range / model.max_range), 0.0, 1.0);
}

}  // namespace

ObjectList perceive(const PerceptionModelConfig& model, const SceneState& truth, Rng& rng) {
  ObjectList list;
  list.tick = truth.tick;
  list.source = model.id;

  for (const TruthObject& obj : truth.objects) {
    // Draw for every object so faults on one object never shift another's noise.
    Vec2 offset{rng.normal(0.0, model.position_sigma), rng.normal(0.0, model.position_sigma)};
    const double dl = rng.normal(0.0, model.extent_sigma);
    const double dw = rng.normal(0.0, model.extent_sigma);
    const double limit = 3.0 * model.position_sigma;
    if (const double n = norm(offset); n > limit) offset = n > 0 ? offset * (limit / n) : Vec2{};

    const bool dropped = std::any_of(model.error_process.begin(), model.error_process.end(), [&](const Directive& d) {
      return d.kind == Directive::Kind::drop && d.object_id == obj.id && d.active_at(truth.time);
    });
    if (dropped) continue;

    const Polygon footprint = transform_to_ego(obj.footprint, truth.ego);
    const OrientedBox box = min_area_rect(footprint);
    if (!visible(model, box.center)) continue;

    DetectedObject det;
    det.object_class = model.modality == Modality::camera ? obj.visual_class : as_object_class(obj.physical_class);
    for (const Directive& d : model.error_process) {
      if (d.kind == Directive::Kind::misclassify && d.active_at(truth.time) && det.object_class == d.from) {
        det.object_class = d.to;
        break;
      }
    }
    det.center = box.center + offset;
    det.length = std::max(box.length + dl, 0.1);
    det.width = std::max(box.width + dw, 0.1);
    det.heading = box.heading;
    det.confidence = confidence_at(model, norm(box.center));
    det.source = model.id;
    list.objects.push_back(std::move(det));
  }

  for (const Directive& d : model.error_process) {
    if (d.kind != Directive::Kind::phantom || !d.active_at(truth.time)) continue;
    if (!visible(model, d.phantom.center)) continue;
    DetectedObject det = d.phantom;
    det.confidence = confidence_at(model, norm(det.center));
    det.source = model.id;
    det.contributors.clear();
    list.objects.push_back(std::move(det));
  }
  return list;
}

std::uint64_t perception_seed(std::uint64_t root_seed, const std::string& model_id, std::int64_t tick) {
  return derive_seed(root_seed, "perception/" + model_id, static_cast<std::uint64_t>(tick));
}

ObjectList PerceptionPath::step(const SceneState& truth, std::uint64_t root_seed, double dt) {
  for (std::size_t i = 0; i < config_.error_process.size(); ++i) {
    const Directive& d = config_.error_process[i];
    if (d.kind != Directive::Kind::freeze) continue;
    const double window_end = std::min(d.end, d.start + d.freeze_ticks * dt);
    // half-tick slack keeps the window at exactly freeze_ticks ticks
    if (truth.time >= d.start - 0.5 * dt && truth.time < window_end - 0.5 * dt) {
      if (frozen_by_ != i) {
        Rng rng(perception_seed(root_seed, config_.id, truth.tick));
        frozen_ = perceive(config_, truth, rng);
        frozen_by_ = i;
      }
      ObjectList out = frozen_;
      out.tick = truth.tick;
      return out;
    }
  }
  frozen_by_.reset();
  Rng rng(perception_seed(root_seed, config_.id, truth.tick));
  return perceive(config_, truth, rng);
}

ObjectList fuse(std::span<const ObjectList> validated_lists, const fm::MatchSet& assignment, std::int64_t tick) {
  ObjectList out;
  out.tick = tick;
  out.source = std::string(kFusedSource);
  for (const fm::MatchGroup& group : assignment.groups) {
    if (group.members.empty()) continue;
    std::vector<const DetectedObject*> members;
    members.reserve(group.members.size());
    for (const auto& m : group.members) members.push_back(&validated_lists[m.list].objects[m.object]);

    const DetectedObject& ref = *members.front();
    DetectedObject merged = ref;
    double total = 0.0;
    for (const auto* o : members) total += o->confidence;
    const bool equal_weights = total <= 0.0;
    if (equal_weights) total = static_cast<double>(members.size());

    // weighted mean written as an offset from the first member so that
    // identical members reproduce it exactly
    Vec2 dc;
    double dl = 0.0, dw = 0.0, dh = 0.0;
    const DetectedObject* best = members.front();
    for (const auto* o : members) {
      const double w = (equal_weights ? 1.0 : o->confidence) / total;
      dc = dc + (o->center - ref.center) * w;
      dl += (o->length - ref.length) * w;
      dw += (o->width - ref.width) * w;
      double diff = normalize_angle(o->heading - ref.heading);
      if (diff > 0.5 * std::numbers::pi) diff -= std::numbers::pi;  // boxes are symmetric under half turns
      if (diff <= -0.5 * std::numbers::pi) diff += std::numbers::pi;
      dh += diff * w;
      if (o->confidence > best->confidence) best = o;
    }
    merged.center = ref.center + dc;
    merged.length = ref.length + dl;
    merged.width = ref.width + dw;
    merged.heading = ref.heading + dh;
    merged.object_class = best->object_class;
    merged.confidence = best->confidence;
    merged.source = std::string(kFusedSource);
    merged.contributors.clear();
    for (const auto* o : members) {
      if (o->contributors.empty()) {
        merged.contributors.push_back(o->source);
      } else {
        merged.contributors.insert(merged.contributors.end(), o->contributors.begin(), o->contributors.end());
      }
    }
    std::sort(merged.contributors.begin(), merged.contributors.end());
    merged.contributors.erase(std::unique(merged.contributors.begin(), merged.contributors.end()),
                              merged.contributors.end());
    out.objects.push_back(std::move(merged));
  }
  return out;
}

}  // namespace depcage::perception
