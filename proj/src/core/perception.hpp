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
 * @file perception.hpp
 *
 * Emulated learned perception paths. Each path sees ground truth through a
 * modality filter (camera: visual class; lidar: physical class), adds
 * bounded Gaussian noise and applies scripted faults. Paths are pure
 * functions of (config, truth, seed) apart from `freeze`, which replays an
 * earlier output and is handled by PerceptionPath.
 */

#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "matching.hpp"
#include "rng.hpp"
#include "scene.hpp"

namespace depcage::perception {

enum class Modality { camera, lidar };

std::string_view to_string(Modality m);
std::optional<Modality> modality_from(std::string_view s);

struct Directive {
  enum class Kind { misclassify, drop, phantom, freeze };

  Kind kind{Kind::drop};
  double start{0.0};  // s, inclusive
  double end{std::numeric_limits<double>::infinity()};  // s, exclusive
  ObjectClass from{ObjectClass::vehicle};  // misclassify
  ObjectClass to{ObjectClass::pedestrian};
  std::string object_id;  // drop
  DetectedObject phantom;  // ego frame; source/confidence filled on emission
  int freeze_ticks{0};

  bool active_at(double t) const { return t >= start && t < end; }
  bool operator==(const Directive&) const = default;
};

std::string_view to_string(Directive::Kind k);

struct PerceptionModelConfig {
  std::string id;
  Modality modality{Modality::camera};
  double fov{1.2};  // rad, centred on the ego x axis
  double max_range{60.0};
  double position_sigma{0.1};
  double extent_sigma{0.05};
  double base_confidence{0.9};
  std::vector<Directive> error_process;

  bool operator==(const PerceptionModelConfig&) const = default;
};

void validate(const PerceptionModelConfig& cfg);

/// Position noise is truncated to a 3-sigma disc, so nothing is reported
/// beyond max_range + 3 * position_sigma.
ObjectList perceive(const PerceptionModelConfig& model, const SceneState& truth, Rng& rng);

/// Seed for one model's draw at one tick.
std::uint64_t perception_seed(std::uint64_t root_seed, const std::string& model_id, std::int64_t tick);

/// Stateful wrapper that realises `freeze`: while a freeze directive is in
/// force the list captured on its first tick is re-emitted.
class PerceptionPath {
 public:
  explicit PerceptionPath(PerceptionModelConfig config) : config_(std::move(config)) {}

  ObjectList step(const SceneState& truth, std::uint64_t root_seed, double dt);
  const PerceptionModelConfig& config() const { return config_; }

 private:
  PerceptionModelConfig config_;
  std::optional<std::size_t> frozen_by_;
  ObjectList frozen_;
};

/// Merge voter-approved lists along `assignment` (computed over the same
/// lists). Multi-member groups take confidence-weighted centre, extent and
/// heading and the class of their most confident member; singletons pass
/// through. Every output object has source "fused" and lists its
/// contributing sources.
ObjectList fuse(std::span<const ObjectList> validated_lists, const fm::MatchSet& assignment, std::int64_t tick);

}  // namespace depcage::perception
