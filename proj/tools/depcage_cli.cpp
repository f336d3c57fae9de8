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

// depcage command-line runner. Talks to the library only through depcage.h.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "depcage/depcage.h"

namespace {

// Exit codes.
constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitInput = 2;  // parse, validation or usage errors
constexpr int kExitReplayMismatch = 3;
constexpr int kExitDigest = 4;

int exit_code(dc_status st) {
  switch (st) {
    case DC_OK: return kExitOk;
    case DC_ERR_INVALID_ARGUMENT:
    case DC_ERR_PARSE:
    case DC_ERR_VALIDATION: return kExitInput;
    case DC_ERR_REPLAY_MISMATCH: return kExitReplayMismatch;
    case DC_ERR_DIGEST: return kExitDigest;
    default: return kExitFailure;
  }
}

int report(dc_status st, const char* what) {
  if (st != DC_OK) std::cerr << "depcage " << what << ": " << dc_status_name(st) << ": " << dc_last_error() << "\n";
  return exit_code(st);
}

struct CString {
  char* p{nullptr};
  ~CString() { dc_string_free(p); }
};

struct RunDeleter {
  void operator()(dc_run* r) const { dc_run_destroy(r); }
};
struct ServiceDeleter {
  void operator()(dc_service* s) const { dc_service_destroy(s); }
};

std::string read_file(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw CLI::ValidationError("--params", "cannot read " + path);
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) out.append(buf, n);
  std::fclose(f);
  return out;
}

struct Globals {
  std::optional<std::uint64_t> seed;
  std::vector<std::string> configs;
  std::string out;
};

struct RunArgs {
  std::string scenario;
  std::string kb;
  bool export_rasters{false};
  bool serve{false};
  std::string host{"127.0.0.1"};
  std::uint16_t port{8700};
  std::string token{"depcage"};
  double realtime{0.0};
  double linger{0.0};
  bool print_runlog{false};
};

int cmd_run(const Globals& g, const RunArgs& a) {
  dc_run* raw = nullptr;
  if (auto st = dc_run_create(a.scenario.c_str(), &raw); st != DC_OK) return report(st, "run");
  std::unique_ptr<dc_run, RunDeleter> run(raw);
  for (const auto& c : g.configs) dc_run_add_config(run.get(), c.c_str());
  if (g.seed) dc_run_set_seed(run.get(), *g.seed);
  dc_run_set_out_dir(run.get(), (g.out.empty() ? std::string("out") : g.out).c_str());
  if (!a.kb.empty()) dc_run_set_kb(run.get(), a.kb.c_str());
  dc_run_set_export_rasters(run.get(), a.export_rasters ? 1 : 0);

  std::unique_ptr<dc_service, ServiceDeleter> service;
  double realtime = a.realtime;
  if (a.serve) {
    dc_service* s = nullptr;
    if (auto st = dc_service_create(a.host.c_str(), a.port, a.token.c_str(), &s); st != DC_OK) {
      return report(st, "serve");
    }
    service.reset(s);
    std::uint16_t port = 0;
    dc_service_port(s, &port);
    std::cerr << "ccc service on ws://" << a.host << ":" << port << "/ws?token=... (health: /health)\n";
    dc_run_attach_service(run.get(), s);
    if (realtime == 0.0) realtime = 1.0;
  }
  if (auto st = dc_run_set_realtime(run.get(), realtime); st != DC_OK) return report(st, "run");

  if (auto st = dc_run_execute(run.get()); st != DC_OK) return report(st, "run");
  CString out;
  if (a.print_runlog) {
    if (auto st = dc_run_runlog(run.get(), &out.p); st != DC_OK) return report(st, "run");
  } else if (auto st = dc_run_summary_json(run.get(), &out.p); st != DC_OK) {
    return report(st, "run");
  }
  std::cout << out.p << (a.print_runlog ? "" : "\n");
  if (service && a.linger > 0.0) std::this_thread::sleep_for(std::chrono::duration<double>(a.linger));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"depcage: dependability cage simulator and runtime-safety monitors"};
  app.set_version_flag("--version", std::string(dc_version()));
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Root seed (overrides the scenario seed; seeds training)");
  app.add_option("--config", g.configs, "Config file merged over the scenario (repeatable)");
  app.add_option("--out", g.out, "Output directory for run logs, summaries and incidents");

  RunArgs ra;
  auto* run = app.add_subcommand("run", "Run a scenario through the full pipeline");
  run->add_option("scenario,--scenario", ra.scenario, "Scenario file")->required();
  run->add_option("--kb", ra.kb, "Knowledge base (overrides anomaly_monitor.kb)");
  run->add_flag("--export-rasters", ra.export_rasters, "Store every tick raster in the knowledge base");
  run->add_flag("--serve", ra.serve, "Start the command-and-control service while running");
  run->add_option("--ccc-host", ra.host, "Service listen address")->capture_default_str();
  run->add_option("--ccc-port", ra.port, "Service port")->capture_default_str();
  run->add_option("--ccc-token", ra.token, "Static client token")->capture_default_str();
  run->add_option("--realtime", ra.realtime, "Pace at this multiple of real time (default 1 with --serve)")
      ->check(CLI::NonNegativeNumber);
  run->add_option("--linger", ra.linger, "Keep serving this many seconds after the run")
      ->check(CLI::NonNegativeNumber);
  run->add_flag("--runlog", ra.print_runlog, "Print the run log instead of the summary");

  std::string kb;
  std::vector<std::string> incidents;
  std::string params_file;
  std::optional<double> lr;
  std::optional<int> epochs, batch, hidden;
  double quantile = 0.0;
  auto* train = app.add_subcommand("train", "Train (or retrain on incidents) an anomaly model");
  train->add_option("--kb", kb, "Knowledge base directory")->required();
  train->add_option("--incident", incidents, "Incident file or directory to learn from (repeatable)");
  train->add_option("--params", params_file, "JSON file with {lr, epochs, batch, hidden, seed}");
  train->add_option("--lr", lr, "Learning rate")->check(CLI::PositiveNumber);
  train->add_option("--epochs", epochs, "Epochs")->check(CLI::PositiveNumber);
  train->add_option("--batch", batch, "Batch size")->check(CLI::PositiveNumber);
  train->add_option("--hidden", hidden, "Latent size")->check(CLI::PositiveNumber);
  train->add_option("--quantile", quantile, "Calibration quantile")->check(CLI::Range(0.0, 1.0));

  int model_version = 0;
  double cal_quantile = 0.99;
  auto* calibrate = app.add_subcommand("calibrate", "Recalibrate a model threshold on its knowledge base");
  calibrate->add_option("--kb", kb, "Knowledge base directory")->required();
  calibrate->add_option("--model-version", model_version, "Version to recalibrate (default latest)");
  calibrate->add_option("--quantile", cal_quantile, "Calibration quantile")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();

  std::string model_path, raster_file;
  auto* score = app.add_subcommand("score", "Score rasters from a record file against a model");
  score->add_option("--model", model_path, "Model file")->required();
  score->add_option("rasters", raster_file, "Record file with rasters")->required();

  std::string incident_path;
  auto* replay = app.add_subcommand("replay", "Re-run the monitors over recorded incidents");
  replay->add_option("incident", incident_path, "Incident file or directory")->required();

  std::string runlog;
  auto* summarize = app.add_subcommand("summarize", "Summarize a run log");
  summarize->add_option("runlog", runlog, "Run log file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*run) {
      return cmd_run(g, ra);
    }
    if (*train) {
      nlohmann::json params = nlohmann::json::object();
      if (!params_file.empty()) {
        try {
          params = nlohmann::json::parse(read_file(params_file));
        } catch (const nlohmann::json::parse_error& e) {
          std::cerr << "depcage train: " << params_file << ": " << e.what() << "\n";
          return kExitInput;
        }
        if (!params.is_object()) {
          std::cerr << "depcage train: " << params_file << ": expected a JSON object\n";
          return kExitInput;
        }
      }
      // command-line flags override the params file
      if (lr) params["lr"] = *lr;
      if (epochs) params["epochs"] = *epochs;
      if (batch) params["batch"] = *batch;
      if (hidden) params["hidden"] = *hidden;
      if (g.seed) params["seed"] = *g.seed;
      const std::string params_text = params.dump();
      std::vector<const char*> inc;
      for (const auto& i : incidents) inc.push_back(i.c_str());
      int version = 0;
      const auto st = dc_train(kb.c_str(), inc.data(), inc.size(), params_text.c_str(), quantile, &version);
      if (st != DC_OK) return report(st, "train");
      std::cout << "{\"model_version\": " << version << "}\n";
      return kExitOk;
    }
    if (*calibrate) {
      int version = 0;
      const auto st = dc_calibrate(kb.c_str(), model_version, cal_quantile, &version);
      if (st != DC_OK) return report(st, "calibrate");
      std::cout << "{\"model_version\": " << version << "}\n";
      return kExitOk;
    }
    if (*score) {
      CString out;
      const auto st = dc_score(model_path.c_str(), raster_file.c_str(), &out.p);
      if (st != DC_OK) return report(st, "score");
      std::cout << out.p << "\n";
      return kExitOk;
    }
    if (*replay) {
      CString out;
      const auto st = dc_replay(incident_path.c_str(), &out.p);
      if (out.p) std::cout << out.p << "\n";
      return report(st, "replay");
    }
    if (*summarize) {
      CString out;
      const auto st = dc_summarize(runlog.c_str(), &out.p);
      if (st != DC_OK) return report(st, "summarize");
      std::cout << out.p << "\n";
      return kExitOk;
    }
  } catch (const CLI::Error& e) {
    std::cerr << "depcage: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
