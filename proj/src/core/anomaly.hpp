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
 * @file anomaly.hpp
 *
 * Out-of-distribution scoring of scene rasters with a single-hidden-layer
 * autoencoder (sigmoid hidden units, linear output), a quantile threshold,
 * and the on-disk knowledge base of training rasters and model versions.
 *
 * Scores are per-cell mean squared reconstruction error. Training runs
 * mini-batch gradient descent on the per-sample objective
 * 1/2 * sum_j (y_j - x_j)^2, averaged over the batch.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "scene.hpp"

namespace depcage::am {

struct Autoencoder {
  int inputs{0};
  int hidden{0};
  std::vector<double> w1;  // hidden x inputs, row-major
  std::vector<double> b1;  // hidden
  std::vector<double> w2;  // inputs x hidden, row-major
  std::vector<double> b2;  // inputs

  bool empty() const { return inputs == 0; }
  bool operator==(const Autoencoder&) const = default;
};

/// Weights uniform(-0.1, 0.1) from `seed`, biases zero.
Autoencoder init_autoencoder(int inputs, int hidden, std::uint64_t seed);

std::vector<double> forward(const Autoencoder& ae, std::span<const double> x);

/// Per-cell MSE between x and its reconstruction.
double reconstruction_error(const Autoencoder& ae, std::span<const double> x);

/// Training objective over a batch of flattened rasters.
double objective(const Autoencoder& ae, std::span<const std::vector<double>> batch);

/// Analytic gradient of `objective`, laid out like the weights.
Autoencoder gradient(const Autoencoder& ae, std::span<const std::vector<double>> batch);

struct TrainParams {
  double learning_rate{0.05};
  int epochs{500};
  int batch_size{16};
  int hidden{16};
  std::uint64_t seed{1};

  bool operator==(const TrainParams&) const = default;
};

inline constexpr std::size_t kMinTrainingSamples = 10;

struct TrainResult {
  Autoencoder ae;
  /// Mean per-cell MSE over the training set; [0] before the first epoch,
  /// [e] after epoch e.
  std::vector<double> loss_curve;
};

/// Throws ValidationError for < 10 samples or mixed grid sizes and
/// NumericError when the objective turns non-finite.
TrainResult train(std::span<const SceneRaster> rasters, const TrainParams& params);

inline constexpr double kThresholdSafetyFactor = 1.5;
inline constexpr double kDefaultQuantile = 0.99;

/// Nearest-rank quantile: the ceil(q * n)-th smallest value.
double nearest_rank_quantile(std::vector<double> values, double q);

/// tau = nearest-rank q-quantile of `scores` times 1.5 (floored at 1e-12).
double calibrate_threshold(std::span<const double> scores, double q);

struct AnomalyModel {
  Autoencoder ae;
  double threshold{0.0};
  double quantile{kDefaultQuantile};
  std::string training_set_digest;
  std::size_t training_set_size{0};
  int version{0};
  RasterWindow window;

  bool trained() const { return !ae.empty(); }
  bool calibrated() const { return trained() && threshold > 0.0; }
  bool operator==(const AnomalyModel&) const = default;
};

double calibrate_threshold(const AnomalyModel& model, std::span<const SceneRaster> rasters, double q);

struct Reconstruction {
  std::vector<double> output;
  double score{0.0};
};

/// Throws StateError for an untrained model, ValidationError on grid mismatch.
Reconstruction reconstruct(const AnomalyModel& model, const SceneRaster& raster);

struct AmVerdict {
  std::int64_t tick{0};
  double score{0.0};
  bool flag{false};
  int model_version{0};

  bool operator==(const AmVerdict&) const = default;
};

/// flag <=> score > threshold. Throws StateError for an uncalibrated model.
AmVerdict detect(const AnomalyModel& model, const SceneRaster& raster);

std::string raster_digest(const SceneRaster& raster);

/// Order-independent digest of a raster set (sorted member digests).
std::string training_set_digest(std::span<const SceneRaster> rasters);

/// Text model file: a magic line, a `digest <sha256>` line covering the
/// rest of the file, then `key value...` lines with shortest round-trip
/// decimals.
std::string serialize_model(const AnomalyModel& model);
/// Throws ParseError on malformed text, DigestMismatch on a bad digest line.
AnomalyModel parse_model(std::string_view text);
/// sha256 of the model body as written in its digest line.
std::string model_file_digest(std::string_view text);

/// Directory layout: `rasters/*.rec` (raster records, one per line) and
/// `models/v<N>.model`. Older model versions are never removed.
class KnowledgeBase {
 public:
  explicit KnowledgeBase(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }

  /// All stored rasters, de-duplicated by content, in file-name then line order.
  std::vector<SceneRaster> rasters() const;

  /// Stores the rasters not yet present under `rasters/<name>.rec`.
  /// Returns how many were new.
  std::size_t add_rasters(const std::string& name, std::span<const SceneRaster> rasters);

  /// Highest stored version, 0 when none.
  int latest_version() const;
  std::filesystem::path model_path(int version) const;
  AnomalyModel load_model(int version) const;
  AnomalyModel load_latest() const;
  /// Writes `models/v<version>.model` via rename so readers never see a partial file.
  void publish(const AnomalyModel& model) const;

  /// Raster window of the stored rasters (`window.json`), if recorded.
  std::optional<RasterWindow> window() const;
  /// Records the window on first use; throws ValidationError if it differs
  /// from the recorded one.
  void bind_window(const RasterWindow& window) const;

 private:
  std::filesystem::path root_;
};

/// Train on every knowledge-base raster, calibrate on the same set and
/// publish as the next version. The window defaults to the knowledge base's.
AnomalyModel train_model(const KnowledgeBase& kb, const TrainParams& params, double quantile = kDefaultQuantile,
                         std::optional<RasterWindow> window = std::nullopt);

/// Recalibrate `version` on the knowledge-base rasters and publish the
/// result as the next version. Throws DigestMismatch unless the model was
/// trained on exactly the current raster set.
AnomalyModel recalibrate_model(const KnowledgeBase& kb, int version, double quantile);

/// Add `recorded` to the knowledge base, retrain on the union and publish
/// version max(base, latest) + 1. Requires at least one recording.
AnomalyModel retrain_with_recordings(const AnomalyModel& base, KnowledgeBase& kb,
                                     std::span<const SceneRaster> recorded, const TrainParams& params,
                                     const std::string& recording_name);

/// Reads raster records (lines with "type":"raster") from a record file.
std::vector<SceneRaster> read_raster_records(const std::filesystem::path& file);

}  // namespace depcage::am
