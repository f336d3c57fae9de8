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

#include "depcage/depcage.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "anomaly.hpp"
#include "ccc.hpp"
#include "errors.hpp"
#include "pipeline.hpp"
#include "records.hpp"
#include "scenario.hpp"
#include "version.hpp"

namespace fs = std::filesystem;
using namespace depcage;

struct dc_service {
  std::unique_ptr<ccc::Service> service;
};

struct dc_run {
  fs::path scenario_path;
  std::vector<fs::path> configs;
  std::optional<std::uint64_t> seed;
  fs::path out_dir;
  fs::path kb;
  bool export_rasters{false};
  dc_service* service{nullptr};
  double realtime{0.0};
  std::optional<pipeline::RunResult> result;
};

namespace {

thread_local std::string last_error;

dc_status fail(dc_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

template <class F>
dc_status guard(F&& f) {
  try {
    last_error.clear();
    return f();
  } catch (const ParseError& e) {
    return fail(DC_ERR_PARSE, e.what());
  } catch (const ValidationError& e) {
    return fail(DC_ERR_VALIDATION, e.what());
  } catch (const IoError& e) {
    return fail(DC_ERR_IO, e.what());
  } catch (const DigestMismatch& e) {
    return fail(DC_ERR_DIGEST, e.what());
  } catch (const NumericError& e) {
    return fail(DC_ERR_NUMERIC, e.what());
  } catch (const StateError& e) {
    return fail(DC_ERR_STATE, e.what());
  } catch (const Error& e) {
    // pipeline wraps errors with the tick; keep the status generic
    return fail(DC_ERR_INTERNAL, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(DC_ERR_PARSE, e.what());
  } catch (const fs::filesystem_error& e) {
    return fail(DC_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(DC_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(DC_ERR_INTERNAL, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

#define DC_REQUIRE(cond, what) \
  if (!(cond)) return fail(DC_ERR_INVALID_ARGUMENT, what)

fs::path resolve_kb(const dc_run& run, const sim::Scenario& s) {
  if (!run.kb.empty()) return run.kb;
  if (s.anomaly.kb.empty()) return {};
  const fs::path p(s.anomaly.kb);
  return p.is_absolute() ? p : run.scenario_path.parent_path() / p;
}

std::vector<fs::path> incident_files(const fs::path& p) {
  if (!fs::is_directory(p)) return {p};
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(p)) {
    if (e.is_regular_file() && e.path().extension() == ".inc") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

/// Knowledge-base file name for rasters learned from an incident.
std::string recording_name(std::span<const SceneRaster> rasters) {
  return "incident-" + am::training_set_digest(rasters).substr(0, 12);
}

/// Rasters from "raster" records, or from the "raster" field of tick records.
std::vector<SceneRaster> rasters_in(const fs::path& file) {
  auto rasters = am::read_raster_records(file);
  if (!rasters.empty()) return rasters;
  const std::string text = sim::read_text_file(file);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    ++line_no;
    const std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    if (line.empty()) continue;
    const Json rec = parse_record_line(line, line_no);
    if (rec.value("type", "") == "tick" && rec.contains("raster")) {
      rasters.push_back(decode_raster(rec.at("raster"), "raster"));
    }
  }
  return rasters;
}

}  // namespace

extern "C" {

const char* dc_last_error(void) { return last_error.c_str(); }

const char* dc_version(void) { return kVersion; }

const char* dc_status_name(dc_status status) {
  switch (status) {
    case DC_OK: return "ok";
    case DC_ERR_INVALID_ARGUMENT: return "invalid argument";
    case DC_ERR_PARSE: return "parse error";
    case DC_ERR_VALIDATION: return "validation error";
    case DC_ERR_IO: return "i/o error";
    case DC_ERR_DIGEST: return "digest mismatch";
    case DC_ERR_NUMERIC: return "numeric error";
    case DC_ERR_STATE: return "state error";
    case DC_ERR_INTERNAL: return "internal error";
    case DC_ERR_REPLAY_MISMATCH: return "replay mismatch";
  }
  return "unknown status";
}

void dc_string_free(char* s) { std::free(s); }

dc_status dc_service_create(const char* host, uint16_t port, const char* token, dc_service** out) {
  DC_REQUIRE(out, "out is null");
  return guard([&] {
    ccc::ServiceConfig cfg;
    if (host) cfg.host = host;
    cfg.port = port;
    if (token) cfg.token = token;
    auto s = std::make_unique<dc_service>();
    s->service = std::make_unique<ccc::Service>(cfg);
    *out = s.release();
    return DC_OK;
  });
}

dc_status dc_service_port(const dc_service* service, uint16_t* out) {
  DC_REQUIRE(service && out, "null argument");
  return guard([&] {
    *out = service->service->port();
    return DC_OK;
  });
}

dc_status dc_service_client_count(const dc_service* service, size_t* out) {
  DC_REQUIRE(service && out, "null argument");
  return guard([&] {
    *out = service->service->client_count();
    return DC_OK;
  });
}

void dc_service_destroy(dc_service* service) { delete service; }

dc_status dc_run_create(const char* scenario_path, dc_run** out) {
  DC_REQUIRE(scenario_path && out, "null argument");
  return guard([&] {
    auto r = std::make_unique<dc_run>();
    r->scenario_path = scenario_path;
    *out = r.release();
    return DC_OK;
  });
}

dc_status dc_run_add_config(dc_run* run, const char* path) {
  DC_REQUIRE(run && path, "null argument");
  run->configs.emplace_back(path);
  return DC_OK;
}

dc_status dc_run_set_seed(dc_run* run, uint64_t seed) {
  DC_REQUIRE(run, "run is null");
  run->seed = seed;
  return DC_OK;
}

dc_status dc_run_set_out_dir(dc_run* run, const char* dir) {
  DC_REQUIRE(run && dir, "null argument");
  run->out_dir = dir;
  return DC_OK;
}

dc_status dc_run_set_kb(dc_run* run, const char* dir) {
  DC_REQUIRE(run && dir, "null argument");
  run->kb = dir;
  return DC_OK;
}

dc_status dc_run_set_export_rasters(dc_run* run, int enable) {
  DC_REQUIRE(run, "run is null");
  run->export_rasters = enable != 0;
  return DC_OK;
}

dc_status dc_run_attach_service(dc_run* run, dc_service* service) {
  DC_REQUIRE(run, "run is null");
  run->service = service;
  return DC_OK;
}

dc_status dc_run_set_realtime(dc_run* run, double factor) {
  DC_REQUIRE(run, "run is null");
  DC_REQUIRE(factor >= 0.0 && std::isfinite(factor), "realtime factor must be finite and >= 0");
  run->realtime = factor;
  return DC_OK;
}

dc_status dc_run_execute(dc_run* run) {
  DC_REQUIRE(run, "run is null");
  return guard([&] {
    run->result.reset();
    sim::Scenario s = sim::load_scenario(run->scenario_path, run->configs);
    if (run->seed) s.seed = *run->seed;
    const fs::path kb_dir = resolve_kb(*run, s);

    pipeline::RunOptions options;
    options.out_dir = run->out_dir;
    options.keep_frames = false;
    if (s.anomaly.enabled) {
      if (kb_dir.empty()) throw ValidationError("anomaly_monitor/kb", "no knowledge base given");
      am::KnowledgeBase kb(kb_dir);
      options.model = s.anomaly.model_version > 0 ? kb.load_model(s.anomaly.model_version) : kb.load_latest();
    }
    if (run->export_rasters && kb_dir.empty()) {
      throw ValidationError("anomaly_monitor/kb", "raster export needs a knowledge base");
    }

    pipeline::RunHooks hooks;
    if (run->service) {
      run->service->service->set_run_id(pipeline::run_id(s));
      hooks = run->service->service->hooks();
    }
    if (run->realtime > 0.0) {
      // wall-clock pacing stays outside the simulation
      const auto start = std::chrono::steady_clock::now();
      const double period = s.dt / run->realtime;
      auto publish = hooks.telemetry;
      hooks.telemetry = [start, period, publish](const pipeline::TickFrame& f) {
        if (publish) publish(f);
        const auto due = start + std::chrono::duration<double>(period * static_cast<double>(f.fm.tick + 1));
        std::this_thread::sleep_until(std::chrono::time_point_cast<std::chrono::steady_clock::duration>(due));
      };
    }

    auto result = pipeline::run_scenario(s, options, hooks);
    if (run->export_rasters) {
      am::KnowledgeBase kb(kb_dir);
      kb.bind_window(s.raster);
      kb.add_rasters(result.run_id, result.rasters);
    }
    result.rasters.clear();
    run->result = std::move(result);
    return DC_OK;
  });
}

dc_status dc_run_summary_json(const dc_run* run, char** out) {
  DC_REQUIRE(run && out, "null argument");
  if (!run->result) return fail(DC_ERR_STATE, "run has not been executed");
  return guard([&] {
    *out = dup_string(run->result->summary.dump(2));
    return DC_OK;
  });
}

dc_status dc_run_runlog(const dc_run* run, char** out) {
  DC_REQUIRE(run && out, "null argument");
  if (!run->result) return fail(DC_ERR_STATE, "run has not been executed");
  return guard([&] {
    *out = dup_string(run->result->runlog);
    return DC_OK;
  });
}

void dc_run_destroy(dc_run* run) { delete run; }

dc_status dc_train(const char* kb_dir, const char* const* incidents, size_t incident_count, const char* params_json,
                   double quantile, int* out_version) {
  DC_REQUIRE(kb_dir, "kb_dir is null");
  DC_REQUIRE(incident_count == 0 || incidents, "incidents is null");
  return guard([&] {
    am::TrainParams params;
    if (params_json && *params_json) params = decode_train_params(parse_document(params_json), "params");
    am::KnowledgeBase kb(kb_dir);
    const double q = quantile > 0.0 ? quantile : am::kDefaultQuantile;

    std::vector<std::pair<std::string, std::vector<SceneRaster>>> recordings;
    for (size_t i = 0; i < incident_count; ++i) {
      DC_REQUIRE(incidents[i], "incident path is null");
      auto rasters = pipeline::incident_rasters(incidents[i]);
      if (rasters.empty()) throw ValidationError("incidents", std::string("no rasters in ") + incidents[i]);
      const std::string name = recording_name(rasters);
      recordings.emplace_back(name, std::move(rasters));
    }

    am::AnomalyModel model;
    if (!recordings.empty() && kb.latest_version() > 0) {
      const am::AnomalyModel base = kb.load_latest();
      for (std::size_t i = 0; i + 1 < recordings.size(); ++i) kb.add_rasters(recordings[i].first, recordings[i].second);
      model = am::retrain_with_recordings(base, kb, recordings.back().second, params, recordings.back().first);
    } else {
      for (const auto& [name, rasters] : recordings) kb.add_rasters(name, rasters);
      model = am::train_model(kb, params, q);
    }
    if (out_version) *out_version = model.version;
    return DC_OK;
  });
}

dc_status dc_calibrate(const char* kb_dir, int version, double quantile, int* out_version) {
  DC_REQUIRE(kb_dir, "kb_dir is null");
  DC_REQUIRE(version >= 0, "version must be >= 0");
  DC_REQUIRE(quantile > 0.0 && quantile <= 1.0, "quantile must be in (0, 1]");
  return guard([&] {
    am::KnowledgeBase kb(kb_dir);
    const int v = version > 0 ? version : kb.latest_version();
    if (v == 0) throw StateError(std::string("knowledge base ") + kb_dir + " holds no model");
    const auto model = am::recalibrate_model(kb, v, quantile);
    if (out_version) *out_version = model.version;
    return DC_OK;
  });
}

dc_status dc_score(const char* model_path, const char* raster_file, char** out_json) {
  DC_REQUIRE(model_path && raster_file && out_json, "null argument");
  return guard([&] {
    const am::AnomalyModel model = am::parse_model(sim::read_text_file(model_path));
    const auto rasters = rasters_in(raster_file);
    Json scores = Json::array();
    std::size_t flags = 0;
    for (const auto& r : rasters) {
      const auto v = am::detect(model, r);
      flags += v.flag ? 1 : 0;
      scores.push_back(encode(v));
    }
    const Json doc = {{"model_version", model.version},
                      {"threshold", model.threshold},
                      {"rasters", rasters.size()},
                      {"flags", flags},
                      {"verdicts", std::move(scores)}};
    *out_json = dup_string(doc.dump(2));
    return DC_OK;
  });
}

dc_status dc_replay(const char* incident_path, char** out_json) {
  DC_REQUIRE(incident_path && out_json, "null argument");
  bool ok = true;
  const dc_status st = guard([&] {
    const auto files = incident_files(incident_path);
    if (files.empty()) throw IoError(std::string("no incident files under ") + incident_path);
    Json reports = Json::array();
    for (const auto& f : files) {
      const auto rep = pipeline::replay_incident(f);
      ok = ok && rep.ok();
      reports.push_back({{"incident", f.string()}, {"ticks", rep.ticks}, {"mismatches", rep.mismatches}});
    }
    const Json doc = {{"ok", ok}, {"incidents", std::move(reports)}};
    *out_json = dup_string(doc.dump(2));
    return DC_OK;
  });
  if (st == DC_OK && !ok) return fail(DC_ERR_REPLAY_MISMATCH, "replay did not reproduce the recorded verdicts");
  return st;
}

dc_status dc_summarize(const char* runlog_path, char** out_json) {
  DC_REQUIRE(runlog_path && out_json, "null argument");
  return guard([&] {
    *out_json = dup_string(pipeline::summarize_runlog(runlog_path).dump(2));
    return DC_OK;
  });
}

}  // extern "C"
