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

#include "reactor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "digest.hpp"
#include "errors.hpp"
#include "records.hpp"

namespace depcage::reactor {

std::string_view to_string(State s) {
  switch (s) {
    case State::Nominal:
      return "Nominal";
    case State::DegradedPrimary:
      return "DegradedPrimary";
    case State::FallbackDeterministic:
      return "FallbackDeterministic";
    case State::MinimalRisk:
      return "MinimalRisk";
    case State::RemoteOperated:
      return "RemoteOperated";
  }
  return "unknown";
}

std::optional<State> state_from(std::string_view s) {
  for (const State st : {State::Nominal, State::DegradedPrimary, State::FallbackDeterministic, State::MinimalRisk,
                         State::RemoteOperated}) {
    if (to_string(st) == s) return st;
  }
  return std::nullopt;
}

std::string_view to_string(Responsibility r) { return r == Responsibility::vehicle ? "vehicle" : "operator"; }

std::optional<Responsibility> responsibility_from(std::string_view s) {
  if (s == "vehicle") return Responsibility::vehicle;
  if (s == "operator") return Responsibility::safety_operator;
  return std::nullopt;
}

std::string_view to_string(CommandKind k) {
  switch (k) {
    case CommandKind::emergency_stop:
      return "emergency_stop";
    case CommandKind::resume:
      return "resume";
    case CommandKind::set_mode:
      return "set_mode";
    case CommandKind::restore_source:
      return "restore_source";
    case CommandKind::ack_handover:
      return "ack_handover";
  }
  return "unknown";
}

std::optional<CommandKind> command_kind_from(std::string_view s) {
  for (const CommandKind k : {CommandKind::emergency_stop, CommandKind::resume, CommandKind::set_mode,
                              CommandKind::restore_source, CommandKind::ack_handover}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::string_view to_string(SwitchPosition p) { return p == SwitchPosition::ai ? "ai" : "deterministic"; }

void check_invariants(const SystemMode& mode) {
  for (const auto& s : mode.active_sources) {
    if (mode.excluded_sources.contains(s)) throw StateError("source '" + s + "' is both active and excluded");
  }
  if (mode.state == State::FallbackDeterministic &&
      mode.active_sources != std::set<std::string>{std::string(kDeterministicSource)}) {
    throw StateError("FallbackDeterministic must run on the deterministic source only");
  }
}

SystemMode initial_mode(const ReactorConfig& config) {
  SystemMode mode;
  mode.active_sources.insert(config.ai_sources.begin(), config.ai_sources.end());
  return mode;
}

namespace {

std::set<std::string> surviving_ai(const SystemMode& mode, const ReactorConfig& config) {
  std::set<std::string> out;
  for (const auto& s : config.ai_sources) {
    if (!mode.excluded_sources.contains(s)) out.insert(s);
  }
  return out;
}

void enter_minimal_risk(SystemMode& mode) {
  mode.state = State::MinimalRisk;
  mode.handover_acked = false;
}

/// Back onto the AI path with whatever sources survive.
void hand_back(SystemMode& mode, const ReactorConfig& config) {
  mode.active_sources = surviving_ai(mode, config);
  mode.state = mode.excluded_sources.empty() ? State::Nominal : State::DegradedPrimary;
  mode.responsibility = Responsibility::vehicle;
  mode.handover_acked = false;
}

CommandResult apply_command(SystemMode& mode, const OperatorCommand& cmd, const ReactorConfig& config,
                            std::int64_t tick, Actions& actions) {
  const auto reject = [&](std::string reason) { return CommandResult{cmd.command_id, false, std::move(reason)}; };
  const auto accept = [&] { return CommandResult{cmd.command_id, true, {}}; };
  const auto kind = command_kind_from(cmd.kind);
  if (!kind) return reject("unknown command kind '" + cmd.kind + "'");

  switch (*kind) {
    case CommandKind::emergency_stop:
      enter_minimal_risk(mode);
      mode.responsibility = Responsibility::safety_operator;
      actions.record_triggers.push_back({"operator", tick, {"emergency_stop"}});
      return accept();

    case CommandKind::ack_handover:
      mode.handover_acked = true;
      mode.responsibility = Responsibility::safety_operator;
      return accept();

    case CommandKind::resume: {
      if (!mode.handover_acked) return reject("resume requires ack_handover first");
      if (mode.state != State::MinimalRisk && mode.state != State::RemoteOperated &&
          mode.state != State::FallbackDeterministic) {
        return reject("nothing to resume from " + std::string(to_string(mode.state)));
      }
      if (surviving_ai(mode, config).empty()) return reject("every AI source is excluded; restore one first");
      hand_back(mode, config);
      return accept();
    }

    case CommandKind::restore_source: {
      if (!mode.handover_acked) return reject("restore_source requires ack_handover first");
      const auto it = cmd.args.find("source");
      if (it == cmd.args.end()) return reject("missing argument 'source'");
      if (!mode.excluded_sources.contains(it->second)) return reject("source '" + it->second + "' is not excluded");
      mode.excluded_sources.erase(it->second);
      if (mode.state == State::Nominal || mode.state == State::DegradedPrimary) hand_back(mode, config);
      return accept();
    }

    case CommandKind::set_mode: {
      const auto it = cmd.args.find("mode");
      if (it == cmd.args.end()) return reject("missing argument 'mode'");
      const auto target = state_from(it->second);
      if (!target) return reject("unknown mode '" + it->second + "'");
      if (*target == State::MinimalRisk) {
        enter_minimal_risk(mode);
        mode.responsibility = Responsibility::safety_operator;
        actions.record_triggers.push_back({"operator", tick, {"set_mode MinimalRisk"}});
        return accept();
      }
      if (mode.state == State::MinimalRisk) return reject("leaving MinimalRisk requires ack_handover and resume");
      if (*target == State::RemoteOperated) {
        if (!mode.handover_acked) return reject("RemoteOperated requires ack_handover first");
        mode.state = State::RemoteOperated;
        mode.active_sources = surviving_ai(mode, config);
        return accept();
      }
      if (*target == State::FallbackDeterministic) {
        mode.state = State::FallbackDeterministic;
        mode.active_sources = {std::string(kDeterministicSource)};
        return accept();
      }
      return reject("use resume or restore_source to return to " + std::string(to_string(*target)));
    }
  }
  return reject("unhandled command");
}

std::vector<std::string> fm_detail(const fm::FmVerdict& fm) {
  std::vector<std::string> out;
  for (const auto& s : fm.implicated_sources) out.push_back("implicated:" + s);
  for (const auto& ev : fm.per_object_evidence) {
    for (const auto& v : ev.violations) out.push_back("violation:" + v);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

StepResult step_reactor(const SystemMode& before, const fm::FmVerdict& fm, const std::optional<am::AmVerdict>& am,
                        std::span<const OperatorCommand> commands, const ReactorConfig& config) {
  StepResult result{before, {}};
  SystemMode& mode = result.mode;
  Actions& actions = result.actions;
  const std::int64_t tick = fm.tick;

  for (const auto& cmd : commands) actions.command_results.push_back(apply_command(mode, cmd, config, tick, actions));

  const bool am_flag = am && am->flag;
  if (mode.state == State::Nominal || mode.state == State::DegradedPrimary) {
    if (am_flag) {
      mode.state = State::FallbackDeterministic;
      mode.active_sources = {std::string(kDeterministicSource)};
    } else if (fm.flag) {
      std::set<std::string> newly;
      std::set<std::string> survivors;
      for (const auto& s : mode.active_sources) {
        (fm.implicated_sources.contains(s) ? newly : survivors).insert(s);
      }
      if (!newly.empty() && static_cast<int>(survivors.size()) >= config.min_agreeing_sources) {
        mode.state = State::DegradedPrimary;
        mode.excluded_sources.insert(newly.begin(), newly.end());
        mode.active_sources = survivors;
      } else {
        enter_minimal_risk(mode);
      }
    }
    if ((mode.state == State::Nominal || mode.state == State::DegradedPrimary) && mode.active_sources.empty()) {
      enter_minimal_risk(mode);
      actions.escalation = true;
      actions.record_triggers.push_back({"escalation", tick, {"no active source"}});
    }
  }
  if (am_flag) {
    actions.record_triggers.push_back({"am", tick, {"score:" + format_double(am->score)}});
  }
  if (fm.flag) actions.record_triggers.push_back({"fm", tick, fm_detail(fm)});

  actions.voter_exclusions = mode.excluded_sources;
  actions.switch_position =
      mode.state == State::FallbackDeterministic ? SwitchPosition::deterministic : SwitchPosition::ai;
  if (mode.state == State::MinimalRisk) actions.speed_target = 0.0;
  return result;
}

VoterOutput voter_filter(std::span<const ObjectList> lists, const SystemMode& mode) {
  VoterOutput out;
  for (const auto& l : lists) {
    if (!mode.excluded_sources.contains(l.source)) out.lists.push_back(l);
  }
  out.escalation = !lists.empty() && out.lists.empty();
  return out;
}

// ---------------------------------------------------------------------------
// Recorder

void validate(const RecorderConfig& c) {
  if (!(c.pre_trigger_window > 0)) throw ValidationError("pre_trigger_window", "must be > 0");
  if (!(c.post_trigger_window > 0)) throw ValidationError("post_trigger_window", "must be > 0");
}

Recorder::Recorder(RecorderConfig config, double dt, std::filesystem::path directory, nlohmann::json header)
    : config_(config),
      pre_ticks_(std::llround(config.pre_trigger_window / dt)),
      post_ticks_(std::llround(config.post_trigger_window / dt)),
      directory_(std::move(directory)),
      header_(std::move(header)) {
  validate(config_);
  if (!(dt > 0)) throw ValidationError("dt", "must be > 0");
}

void Recorder::push(std::int64_t tick, nlohmann::json record, const SceneRaster& raster,
                    std::span<const RecordTrigger> triggers) {
  Entry entry{tick, std::move(record), encode(raster)};
  ring_.push_back(entry);
  while (static_cast<std::int64_t>(ring_.size()) > pre_ticks_ + 1) ring_.pop_front();
  if (open_) open_->entries.push_back(std::move(entry));

  for (const auto& t : triggers) {
    if (open_) {
      open_->info.end_tick = std::max(open_->info.end_tick, t.tick + post_ticks_);
      open_->info.triggers.push_back(t);
      continue;
    }
    Open inc;
    inc.info.start_tick = std::max({t.tick - pre_ticks_, last_end_ + 1, std::int64_t{0}});
    inc.info.end_tick = t.tick + post_ticks_;
    inc.info.triggers.push_back(t);
    for (const auto& e : ring_) {
      if (e.tick >= inc.info.start_tick) inc.entries.push_back(e);
    }
    open_ = std::move(inc);
  }
  if (open_ && tick >= open_->info.end_tick) close();
}

void Recorder::finish() {
  if (open_) close();
}

void Recorder::close() {
  Open inc = std::move(*open_);
  open_.reset();
  IncidentInfo info = std::move(inc.info);
  if (!inc.entries.empty()) {
    info.start_tick = inc.entries.front().tick;
    info.end_tick = inc.entries.back().tick;
  }
  last_end_ = info.end_tick;

  if (!directory_.empty()) {
    info.path = directory_ / (std::to_string(info.triggers.front().tick) + ".inc");
    nlohmann::json head = header_.is_object() ? header_ : nlohmann::json::object();
    head["type"] = "incident";
    head["start_tick"] = info.start_tick;
    head["end_tick"] = info.end_tick;
    head["triggers"] = nlohmann::json::array();
    for (const auto& t : info.triggers) head["triggers"].push_back(encode(t));
    std::string text = encode_record_line(head);
    for (const auto& e : inc.entries) text += encode_record_line(e.record);
    for (const auto& e : inc.entries) {
      text += encode_record_line({{"type", "raster"}, {"tick", e.tick}, {"raster", e.raster}});
    }
    std::error_code ec;
    std::filesystem::create_directories(directory_, ec);
    std::ofstream out(info.path, std::ios::binary | std::ios::trunc);
    if (out) out << text;
    if (!out) {
      alerts_.push_back("incident write failed: " + info.path.string());
    } else {
      info.written = true;
    }
  }
  incidents_.push_back(std::move(info));
}

}  // namespace depcage::reactor
