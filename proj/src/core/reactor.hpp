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
 * @file reactor.hpp
 *
 * Fail-operational mode machine, voter and incident recorder.
 *
 * Per tick, operator commands are applied first in arrival order, then the
 * monitor verdicts in priority order: anomaly (switch to the fallback
 * path), function monitor (exclude implicated sources while a confirming
 * quorum survives, else minimal-risk stop). MinimalRisk and RemoteOperated
 * only record on flags; leaving MinimalRisk takes ack_handover followed by
 * resume.
 */

#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "anomaly.hpp"
#include "function_monitor.hpp"

namespace depcage::reactor {

enum class State { Nominal, DegradedPrimary, FallbackDeterministic, MinimalRisk, RemoteOperated };
enum class Responsibility { vehicle, safety_operator };

std::string_view to_string(State s);
std::string_view to_string(Responsibility r);
std::optional<State> state_from(std::string_view s);
std::optional<Responsibility> responsibility_from(std::string_view s);

struct SystemMode {
  State state{State::Nominal};
  std::set<std::string> active_sources;
  std::set<std::string> excluded_sources;
  Responsibility responsibility{Responsibility::vehicle};
  /// Operator has confirmed taking responsibility; cleared on handback.
  bool handover_acked{false};

  bool operator==(const SystemMode&) const = default;
};

/// Throws StateError when an invariant of SystemMode is broken.
void check_invariants(const SystemMode& mode);

enum class CommandKind { emergency_stop, resume, set_mode, restore_source, ack_handover };

std::string_view to_string(CommandKind k);
std::optional<CommandKind> command_kind_from(std::string_view s);

struct OperatorCommand {
  std::string kind;  // kept verbatim so unknown kinds can be rejected and logged
  std::map<std::string, std::string> args;
  std::string command_id;
  std::int64_t issued_at{0};  // tick the command was received for

  bool operator==(const OperatorCommand&) const = default;
};

struct CommandResult {
  std::string command_id;
  bool accepted{false};
  std::string reason;

  bool operator==(const CommandResult&) const = default;
};

struct RecordTrigger {
  std::string monitor;  // fm | am | operator | escalation
  std::int64_t tick{0};
  std::vector<std::string> detail;

  bool operator==(const RecordTrigger&) const = default;
};

enum class SwitchPosition { ai, deterministic };
std::string_view to_string(SwitchPosition p);

struct Actions {
  std::set<std::string> voter_exclusions;
  SwitchPosition switch_position{SwitchPosition::ai};
  std::optional<double> speed_target;  // 0 under MinimalRisk
  std::vector<RecordTrigger> record_triggers;
  std::vector<CommandResult> command_results;
  bool escalation{false};

  bool operator==(const Actions&) const = default;
};

struct ReactorConfig {
  std::vector<std::string> ai_sources;
  /// Quorum needed among surviving sources to keep driving on the AI path.
  int min_agreeing_sources{1};

  bool operator==(const ReactorConfig&) const = default;
};

SystemMode initial_mode(const ReactorConfig& config);

struct StepResult {
  SystemMode mode;
  Actions actions;
};

/// Pure function of its arguments.
StepResult step_reactor(const SystemMode& mode, const fm::FmVerdict& fm, const std::optional<am::AmVerdict>& am,
                        std::span<const OperatorCommand> commands, const ReactorConfig& config);

struct VoterOutput {
  std::vector<ObjectList> lists;
  bool escalation{false};  // every input list was excluded
};

VoterOutput voter_filter(std::span<const ObjectList> lists, const SystemMode& mode);

struct RecorderConfig {
  double pre_trigger_window{3.0};   // s
  double post_trigger_window{2.0};  // s

  bool operator==(const RecorderConfig&) const = default;
};

void validate(const RecorderConfig& c);

struct IncidentInfo {
  std::filesystem::path path;
  std::int64_t start_tick{0};
  std::int64_t end_tick{0};  // inclusive
  std::vector<RecordTrigger> triggers;
  bool written{false};
};

/// Ring buffer of per-tick records. A trigger opens an incident covering
/// pre_window before and post_window after it; a trigger inside an open
/// incident extends it, and a new incident never re-covers ticks of the
/// previous one.
class Recorder {
 public:
  /// `header` is copied into every incident header; an empty `directory`
  /// keeps incidents in memory only.
  Recorder(RecorderConfig config, double dt, std::filesystem::path directory, nlohmann::json header = {});

  std::int64_t pre_ticks() const { return pre_ticks_; }
  std::int64_t post_ticks() const { return post_ticks_; }

  void push(std::int64_t tick, nlohmann::json record, const SceneRaster& raster,
            std::span<const RecordTrigger> triggers);
  /// Closes an open incident, truncating its post window.
  void finish();

  const std::vector<IncidentInfo>& incidents() const { return incidents_; }
  /// Storage failures; the run continues without the incident.
  const std::vector<std::string>& alerts() const { return alerts_; }
  bool open() const { return open_.has_value(); }
  std::optional<std::int64_t> open_start() const {
    return open_ ? std::optional<std::int64_t>(open_->info.start_tick) : std::nullopt;
  }

 private:
  struct Entry {
    std::int64_t tick;
    nlohmann::json record;
    nlohmann::json raster;
  };
  struct Open {
    IncidentInfo info;
    std::vector<Entry> entries;
  };

  void close();

  RecorderConfig config_;
  std::int64_t pre_ticks_;
  std::int64_t post_ticks_;
  std::filesystem::path directory_;
  nlohmann::json header_;
  std::deque<Entry> ring_;
  std::optional<Open> open_;
  std::int64_t last_end_{-1};
  std::vector<IncidentInfo> incidents_;
  std::vector<std::string> alerts_;
};

}  // namespace depcage::reactor
