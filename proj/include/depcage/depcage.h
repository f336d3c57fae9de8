/*
 * SPDX-License-Identifier: Apache-2.0
 * Copyright (C) 2026 The depcage authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing,
 * software distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions
 * and limitations under the License.
 */

/**
 * @file depcage.h
 *
 * C interface to the depcage simulator and runtime-safety framework.
 *
 * Every function returns a dc_status. On failure, dc_last_error() returns a
 * diagnostic for the calling thread, valid until the next call on that
 * thread. Strings returned through `char**` are owned by the caller and must
 * be released with dc_string_free().
 */

#ifndef DEPCAGE_DEPCAGE_H
#define DEPCAGE_DEPCAGE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DC_API __declspec(dllexport)
#else
#define DC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dc_status {
  DC_OK = 0,
  DC_ERR_INVALID_ARGUMENT = 1, /* null handle, bad flag value */
  DC_ERR_PARSE = 2,            /* malformed text; diagnostic carries the line */
  DC_ERR_VALIDATION = 3,       /* contract violation; diagnostic carries the field path */
  DC_ERR_IO = 4,
  DC_ERR_DIGEST = 5,           /* model/knowledge-base digest mismatch */
  DC_ERR_NUMERIC = 6,          /* non-finite value during training */
  DC_ERR_STATE = 7,            /* operation not allowed in the current state */
  DC_ERR_INTERNAL = 8,
  DC_ERR_REPLAY_MISMATCH = 9   /* replay ran but did not reproduce the record */
} dc_status;

DC_API const char* dc_last_error(void);
DC_API const char* dc_version(void);
DC_API const char* dc_status_name(dc_status status);
DC_API void dc_string_free(char* s);

/* --- live command-and-control service ------------------------------------ */

typedef struct dc_service dc_service;

/* `port` 0 picks a free port; `token` NULL uses the default token. */
DC_API dc_status dc_service_create(const char* host, uint16_t port, const char* token, dc_service** out);
DC_API dc_status dc_service_port(const dc_service* service, uint16_t* out);
DC_API dc_status dc_service_client_count(const dc_service* service, size_t* out);
DC_API void dc_service_destroy(dc_service* service);

/* --- scenario runs -------------------------------------------------------- */

typedef struct dc_run dc_run;

DC_API dc_status dc_run_create(const char* scenario_path, dc_run** out);
/* Config files are merge-patched over the scenario in the order added. */
DC_API dc_status dc_run_add_config(dc_run* run, const char* path);
DC_API dc_status dc_run_set_seed(dc_run* run, uint64_t seed);
/* Run log, summary.json and incidents/ go here; unset writes nothing. */
DC_API dc_status dc_run_set_out_dir(dc_run* run, const char* dir);
/* Overrides the scenario's knowledge base (anomaly_monitor.kb). */
DC_API dc_status dc_run_set_kb(dc_run* run, const char* dir);
/* After the run, store every tick raster in the knowledge base. */
DC_API dc_status dc_run_set_export_rasters(dc_run* run, int enable);
/* Stream telemetry to and take commands from `service`; not owned. */
DC_API dc_status dc_run_attach_service(dc_run* run, dc_service* service);
/* Pace ticks against the wall clock at `factor` x real time; 0 = unpaced. */
DC_API dc_status dc_run_set_realtime(dc_run* run, double factor);
DC_API dc_status dc_run_execute(dc_run* run);
DC_API dc_status dc_run_summary_json(const dc_run* run, char** out);
DC_API dc_status dc_run_runlog(const dc_run* run, char** out);
DC_API void dc_run_destroy(dc_run* run);

/* --- anomaly models and records ------------------------------------------ */

/*
 * Trains a new model version in `kb_dir`. With incidents (files or
 * directories), their rasters are added to the knowledge base first and the
 * latest model, if any, is retrained on the union and keeps that model's
 * calibration quantile. `params_json` may be NULL or a JSON object
 * {lr, epochs, batch, hidden, seed}; `quantile` <= 0 keeps the default.
 */
DC_API dc_status dc_train(const char* kb_dir, const char* const* incidents, size_t incident_count,
                          const char* params_json, double quantile, int* out_version);
/* Recalibrates `version` (0 = latest) and publishes it as a new version. */
DC_API dc_status dc_calibrate(const char* kb_dir, int version, double quantile, int* out_version);
/* Scores every raster in a record file; result is a JSON document. */
DC_API dc_status dc_score(const char* model_path, const char* raster_file, char** out_json);
/* Replays an incident file or every incident in a directory. */
DC_API dc_status dc_replay(const char* incident_path, char** out_json);
DC_API dc_status dc_summarize(const char* runlog_path, char** out_json);

#ifdef __cplusplus
}
#endif

#endif /* DEPCAGE_DEPCAGE_H */
