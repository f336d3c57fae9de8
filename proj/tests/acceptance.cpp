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

// Acceptance runner: one PASS/FAIL line per criterion, exit status 0 only
// when every criterion passes. Tolerances are pinned below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "anomaly.hpp"
#include "criteria.hpp"
#include "depcage/depcage.h"
#include "helpers.hpp"
#include "oracles.hpp"
#include "pipeline.hpp"
#include "reactor_fuzz.hpp"
#include "scenario.hpp"

namespace fs = std::filesystem;
using namespace depcage;

namespace {

constexpr double kPosterRuntimeLimit = 5.0;   // s
constexpr double kGradientTolerance = 1e-4;   // relative
constexpr int kLossEpochs = 10;
constexpr int kClouds = 200;
constexpr int kHulls = 50;
constexpr double kRectTolerance = 1e-6;       // m^2
constexpr int kZoneStates = 1000;
constexpr int kFuzzSequences = 10000;
constexpr int kFuzzSteps = 60;

const char* const kFixtures[] = {"benign", "poster", "three_source_fault", "all_sources_fault", "lying_pedestrian"};

struct Outcome {
  bool pass{false};
  std::string detail;
};

pipeline::RunOptions options_for(const sim::Scenario& s, const fs::path& out = {}) {
  pipeline::RunOptions o;
  o.out_dir = out;
  if (s.anomaly.enabled) o.model = am::KnowledgeBase(testing::fixture("kb")).load_latest();
  return o;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool has_source(const ObjectList& list, const std::string& source) {
  for (const auto& o : list.objects) {
    if (o.source == source) return true;
    for (const auto& c : o.contributors) {
      if (c == source) return true;
    }
  }
  return false;
}

Outcome poster() {
  const auto start = std::chrono::steady_clock::now();
  const auto s = sim::load_scenario(testing::fixture("poster.json"));
  const auto r = pipeline::run_scenario(s, options_for(s));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::set<perception::Modality> modalities;
  for (const auto& m : s.perception_models) modalities.insert(m.modality);
  const auto& fp = s.objects.at(0).object.footprint;
  double x0 = fp[0].x, y0 = fp[0].y, y1 = fp[0].y;
  for (const auto& p : fp) {
    x0 = std::min(x0, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  const long oracle_tick = oracle::first_focus_overlap_tick(
      s.ego.position.x, s.ego.speed, s.dt, sim::tick_count(s), x0, y0, y1, s.ego.wheelbase, s.ego.width,
      s.ego.length, s.zone.a_max, s.zone.t_react, s.zone.lateral_margin, s.zone.standstill_margin,
      s.zone.focus_extension);
  const long budget = static_cast<long>(std::ceil(s.ego.speed / (s.zone.a_max * s.dt)));

  long flag_tick = -1, stop_tick = -1;
  bool mr = false;
  for (const auto& f : r.frames) {
    if (flag_tick < 0 && f.fm.flag) {
      flag_tick = f.truth.tick;
      mr = f.mode.state == reactor::State::MinimalRisk;
    }
    if (flag_tick >= 0 && stop_tick < 0 && f.truth.tick > flag_tick && f.truth.ego.speed == 0.0) stop_tick = f.truth.tick;
  }
  const bool pass = modalities == std::set{perception::Modality::camera, perception::Modality::lidar} &&
                    oracle_tick >= 0 && flag_tick == oracle_tick && mr && stop_tick >= 0 &&
                    stop_tick - flag_tick <= budget && secs < kPosterRuntimeLimit;
  return {pass, fmt("fm flag at tick %ld (oracle %ld), %s, speed 0 after %ld ticks (budget %ld), %.2f s (limit %.0f s)",
                    flag_tick, oracle_tick, mr ? "MinimalRisk" : "no MinimalRisk", stop_tick - flag_tick, budget,
                    secs, kPosterRuntimeLimit)};
}

/// Runs a scenario through the C API and returns its summary.
std::optional<nlohmann::json> capi_run(const fs::path& scenario, const fs::path& out, std::string& error) {
  dc_run* run = nullptr;
  if (dc_run_create(scenario.c_str(), &run) != DC_OK) {
    error = dc_last_error();
    return std::nullopt;
  }
  std::optional<nlohmann::json> summary;
  char* text = nullptr;
  dc_run_set_out_dir(run, out.c_str());
  if (dc_run_execute(run) == DC_OK && dc_run_summary_json(run, &text) == DC_OK) {
    summary = nlohmann::json::parse(text);
    dc_string_free(text);
  } else {
    error = dc_last_error();
  }
  dc_run_destroy(run);
  return summary;
}

Outcome two_phase() {
  testing::TempDir dir("acceptance-two-phase");
  fs::copy(testing::fixture("kb"), dir / "kb", fs::copy_options::recursive);
  fs::copy(testing::fixture("lying_pedestrian.json"), dir / "lying_pedestrian.json");
  std::string error;
  const auto p1 = capi_run(dir / "lying_pedestrian.json", dir / "phase1", error);
  if (!p1) return {false, "phase 1 failed: " + error};
  bool fallback = false;
  for (const auto& m : (*p1)["mode_trace"]) fallback = fallback || m["state"] == "FallbackDeterministic";
  const bool flag1 = (*p1)["am_flags"].get<long>() > 0;
  const std::size_t recorded = (*p1)["incident_files"].size();

  const std::string incidents = (dir / "phase1" / "incidents").string();
  const char* paths[] = {incidents.c_str()};
  int version = 0;
  if (dc_train((dir / "kb").c_str(), paths, 1, nullptr, 0.0, &version) != DC_OK) {
    return {false, std::string("training on the incident failed: ") + dc_last_error()};
  }
  const auto p2 = capi_run(dir / "lying_pedestrian.json", dir / "phase2", error);
  if (!p2) return {false, "phase 2 failed: " + error};
  const bool flag2 = (*p2)["am_flags"].get<long>() > 0;
  const bool pass = flag1 && recorded > 0 && fallback && !flag2 && (*p1)["run_id"] == (*p2)["run_id"];
  return {pass, fmt("flags (%s, %s); phase 1: %zu incident(s), first flag tick %s, %s; retrained to v%d",
                    flag1 ? "true" : "false", flag2 ? "true" : "false", recorded,
                    (*p1)["first_am_flag_tick"].dump().c_str(),
                    fallback ? "reached FallbackDeterministic" : "no FallbackDeterministic", version)};
}

Outcome reconfiguration() {
  const auto s = sim::load_scenario(testing::fixture("three_source_fault.json"));
  std::vector<std::string> faulty;
  for (const auto& m : s.perception_models) {
    for (const auto& d : m.error_process) {
      if (d.kind == perception::Directive::Kind::misclassify) faulty.push_back(m.id);
    }
  }
  if (s.perception_models.size() != 3 || faulty.size() != 1) return {false, "fixture is not one faulty source of three"};
  const auto r = pipeline::run_scenario(s, options_for(s));
  std::int64_t excluded_at = -1;
  long leaked = 0, wrong_set = 0;
  for (const auto& f : r.frames) {
    if (excluded_at < 0 && f.mode.excluded_sources.contains(faulty[0])) excluded_at = f.truth.tick;
    if (excluded_at < 0) continue;
    if (has_source(f.output, faulty[0])) ++leaked;
    if (f.mode.excluded_sources != std::set<std::string>{faulty[0]}) ++wrong_set;
  }
  const bool degraded = !r.frames.empty() && r.frames.back().mode.state == reactor::State::DegradedPrimary;
  const bool pass = excluded_at >= 0 && degraded && leaked == 0 && wrong_set == 0;
  return {pass, fmt("%s excluded at tick %lld, final %s, %ld post-exclusion fused detections from it, %ld ticks with "
                    "another exclusion set",
                    faulty[0].c_str(), static_cast<long long>(excluded_at),
                    r.frames.empty() ? "-" : std::string(reactor::to_string(r.frames.back().mode.state)).c_str(), leaked,
                    wrong_set)};
}

Outcome autoencoder() {
  const double worst = criteria::gradient_worst_relative_error();
  am::TrainParams toy;  // defaults except a latent below the 9 toy inputs
  toy.hidden = 4;
  toy.epochs = kLossEpochs;
  const auto toy_run = am::train(criteria::toy_set(), toy);
  am::TrainParams defaults;
  defaults.epochs = kLossEpochs;
  const auto kb_run = am::train(am::KnowledgeBase(testing::fixture("kb")).rasters(), defaults);
  const int bad_toy = criteria::loss_non_decreases(toy_run.loss_curve, kLossEpochs);
  const int bad_kb = criteria::loss_non_decreases(kb_run.loss_curve, kLossEpochs);
  const bool pass = worst < kGradientTolerance && bad_toy == 0 && bad_kb == 0;
  return {pass, fmt("worst relative gradient error %.2e (limit %.0e); loss rises or stalls in %d/%d toy and %d/%d "
                    "default-hyperparameter epochs",
                    worst, kGradientTolerance, bad_toy, kLossEpochs, bad_kb, kLossEpochs)};
}

Outcome clustering() {
  const auto c = criteria::cluster_vs_components(kClouds, 2024);
  const auto r = criteria::min_rect_vs_sweep(kHulls, 50, kRectTolerance);
  const bool pass = c.ok() && r.count.ok();
  std::string d = fmt("%ld/%ld cluster comparisons differ; %ld/%ld hulls off, worst area gap %.2e (limit %.0e)",
                      c.violations, c.checked, r.count.violations, r.count.checked, r.worst_gap, kRectTolerance);
  if (!c.first.empty()) d += "; first: " + c.first;
  if (!r.count.first.empty()) d += "; first: " + r.count.first;
  return {pass, d};
}

Outcome safe_zone() {
  const auto c = criteria::safe_zone_properties(kZoneStates, 1000);
  std::string d = fmt("%ld violations over %ld ego states", c.violations, c.checked);
  if (!c.first.empty()) d += "; first: " + c.first;
  return {c.ok(), d};
}

Outcome determinism() {
  long differing = 0, incidents = 0, mismatched = 0;
  std::string first;
  for (const char* name : kFixtures) {
    const auto s = sim::load_scenario(testing::fixture(std::string(name) + ".json"));
    testing::TempDir a("acceptance-det-a"), b("acceptance-det-b");
    const auto r1 = pipeline::run_scenario(s, options_for(s, a.path()));
    const auto r2 = pipeline::run_scenario(s, options_for(s, b.path()));
    if (r1.runlog != r2.runlog) {
      ++differing;
      if (first.empty()) first = std::string(name) + " run logs differ";
    }
    for (const auto& inc : r1.incidents) {
      ++incidents;
      const auto rep = pipeline::replay_incident(inc.path);
      if (!rep.ok()) {
        ++mismatched;
        if (first.empty()) first = inc.path.filename().string() + ": " + rep.mismatches.front();
      }
    }
  }
  const bool pass = differing == 0 && incidents > 0 && mismatched == 0;
  std::string d = fmt("%ld/%zu fixtures with differing run logs; %ld/%ld incidents fail replay", differing,
                      std::size(kFixtures), mismatched, incidents);
  if (!first.empty()) d += "; first: " + first;
  return {pass, d};
}

Outcome reactor_safety() {
  const auto rep = fuzz::run_reactor_fuzz(kFuzzSequences, kFuzzSteps, 1);
  std::string d = fmt("%d sequences, %ld steps: %ld MinimalRisk exits without handshake (%ld legitimate), %ld "
                      "active/excluded overlaps, %ld fused objects from excluded sources, %ld invariant violations",
                      rep.sequences, rep.steps, rep.mr_exits_without_handshake, rep.mr_exits, rep.overlap_violations,
                      rep.excluded_in_fused, rep.invariant_violations);
  if (!rep.first_failure.empty()) d += "; first: " + rep.first_failure;
  return {rep.ok() && rep.mr_exits > 0, d};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria_list[] = {
      {"poster scenario", poster},
      {"two-phase lying pedestrian", two_phase},
      {"three-source reconfiguration", reconfiguration},
      {"autoencoder gradient and loss", autoencoder},
      {"clustering and rectangle oracles", clustering},
      {"safe-zone properties", safe_zone},
      {"determinism and replay", determinism},
      {"reactor safety fuzzing", reactor_safety},
  };
  int failed = 0;
  int index = 0;
  for (const auto& [name, check] : criteria_list) {
    ++index;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
