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

#include "matching.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

#include "errors.hpp"

namespace depcage::fm {

ClassCompatibility ClassCompatibility::defaults() {
  ClassCompatibility c;
  c.allow(ObjectClass::vehicle, ObjectClass::truck);
  return c;
}

void ClassCompatibility::allow(ObjectClass a, ObjectClass b) {
  if (a == b) return;
  pairs_.insert(std::minmax(a, b));
}

bool ClassCompatibility::compatible(ObjectClass a, ObjectClass b) const {
  return a == b || pairs_.contains(std::minmax(a, b));
}

int HaraThresholds::min_agreeing_for(std::size_t sources) const {
  if (min_agreeing_sources) return *min_agreeing_sources;
  return static_cast<int>(sources / 2 + 1);
}

void validate(const HaraThresholds& t) {
  if (!(t.max_center_delta > 0)) throw ValidationError("max_center_delta", "must be > 0");
  if (!(t.max_extent_delta > 0)) throw ValidationError("max_extent_delta", "must be > 0");
  if (!(t.gating_distance > 0)) throw ValidationError("gating_distance", "must be > 0");
  if (t.min_agreeing_sources && *t.min_agreeing_sources < 1) {
    throw ValidationError("min_agreeing_sources", "must be >= 1");
  }
}

namespace {

bool object_less(const DetectedObject& a, const DetectedObject& b) {
  return std::tie(a.center.x, a.center.y, a.object_class, a.length, a.width, a.heading, a.confidence) <
         std::tie(b.center.x, b.center.y, b.object_class, b.length, b.width, b.heading, b.confidence);
}

struct DisjointSets {
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  std::vector<std::size_t> parent;
};

}  // namespace

MatchSet match_across_sources(std::span<const ObjectList> lists, const HaraThresholds& thresholds) {
  // Canonical ranking of lists and objects.
  std::vector<std::size_t> list_order(lists.size());
  std::iota(list_order.begin(), list_order.end(), 0);
  std::sort(list_order.begin(), list_order.end(),
            [&](std::size_t a, std::size_t b) { return lists[a].source < lists[b].source; });
  for (std::size_t i = 1; i < list_order.size(); ++i) {
    if (lists[list_order[i]].source == lists[list_order[i - 1]].source) {
      throw ValidationError("lists", "duplicate source '" + lists[list_order[i]].source + "'");
    }
  }

  struct Node {
    MatchMember member;
    std::size_t source_rank;
    const DetectedObject* obj;
  };
  std::vector<Node> nodes;
  for (std::size_t rank = 0; rank < list_order.size(); ++rank) {
    const std::size_t li = list_order[rank];
    const auto& objs = lists[li].objects;
    std::vector<std::size_t> order(objs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return object_less(objs[a], objs[b]); });
    for (const std::size_t oi : order) nodes.push_back({{li, oi}, rank, &objs[oi]});
  }

  struct Pair {
    double distance;
    std::size_t a;
    std::size_t b;
  };
  std::vector<Pair> pairs;
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    for (std::size_t b = a + 1; b < nodes.size(); ++b) {
      if (nodes[a].source_rank == nodes[b].source_rank) continue;
      const double d = norm(nodes[a].obj->center - nodes[b].obj->center);
      if (d <= thresholds.gating_distance) pairs.push_back({d, a, b});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) {
    return std::tie(x.distance, x.a, x.b) < std::tie(y.distance, y.a, y.b);
  });

  DisjointSets sets(nodes.size());
  std::vector<std::set<std::size_t>> group_sources(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) group_sources[i] = {nodes[i].source_rank};

  for (const Pair& p : pairs) {
    const std::size_t ra = sets.find(p.a);
    const std::size_t rb = sets.find(p.b);
    if (ra == rb) continue;
    if (!thresholds.class_compatibility.compatible(nodes[p.a].obj->object_class, nodes[p.b].obj->object_class)) {
      continue;
    }
    const auto& sa = group_sources[ra];
    const auto& sb = group_sources[rb];
    const bool shared = std::any_of(sa.begin(), sa.end(), [&](std::size_t s) { return sb.contains(s); });
    if (shared) continue;
    const std::size_t root = std::min(ra, rb);
    const std::size_t child = std::max(ra, rb);
    sets.parent[child] = root;
    group_sources[root].insert(group_sources[child].begin(), group_sources[child].end());
    group_sources[child].clear();
  }

  // Nodes are already in canonical order, so groups come out ordered by
  // their first member and members stay canonical.
  MatchSet result;
  std::vector<std::size_t> group_of_root(nodes.size(), SIZE_MAX);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::size_t root = sets.find(i);
    if (group_of_root[root] == SIZE_MAX) {
      group_of_root[root] = result.groups.size();
      result.groups.emplace_back();
    }
    result.groups[group_of_root[root]].members.push_back(nodes[i].member);
  }
  return result;
}

}  // namespace depcage::fm
