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

#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "scene.hpp"

namespace depcage::fm {

/// Symmetric, reflexive relation over object classes.
class ClassCompatibility {
 public:
  /// vehicle ~ truck.
  static ClassCompatibility defaults();

  void allow(ObjectClass a, ObjectClass b);
  bool compatible(ObjectClass a, ObjectClass b) const;
  const std::set<std::pair<ObjectClass, ObjectClass>>& pairs() const { return pairs_; }

  bool operator==(const ClassCompatibility&) const = default;

 private:
  std::set<std::pair<ObjectClass, ObjectClass>> pairs_;  // stored with first <= second
};

struct HaraThresholds {
  double max_center_delta{0.75};
  double max_extent_delta{1.0};
  ClassCompatibility class_compatibility{ClassCompatibility::defaults()};
  double gating_distance{2.0};
  /// Unset means strict majority of the sources being validated.
  std::optional<int> min_agreeing_sources;

  int min_agreeing_for(std::size_t sources) const;
  bool operator==(const HaraThresholds&) const = default;
};

void validate(const HaraThresholds& t);

struct MatchMember {
  std::size_t list{0};    // index into the caller's list sequence
  std::size_t object{0};  // index into that list's objects
  bool operator==(const MatchMember&) const = default;
};

struct MatchGroup {
  std::vector<MatchMember> members;  // canonical order: source id, then object order
  bool operator==(const MatchGroup&) const = default;
};

struct MatchSet {
  std::vector<MatchGroup> groups;  // every input object appears in exactly one group
  bool operator==(const MatchSet&) const = default;
};

/// Greedy association. Cross-source pairs within the gate are taken in
/// ascending centre distance; a pair joins two groups when the groups share
/// no source and the pair's classes are compatible. Output is independent of
/// the order of `lists` (sources are ranked by id, objects by centre).
/// Throws ValidationError when two lists carry the same source id.
MatchSet match_across_sources(std::span<const ObjectList> lists, const HaraThresholds& thresholds);

}  // namespace depcage::fm
