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

#include "anomaly.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "digest.hpp"
#include "errors.hpp"
#include "records.hpp"
#include "rng.hpp"

namespace depcage::am {

namespace fs = std::filesystem;

Autoencoder init_autoencoder(int inputs, int hidden, std::uint64_t seed) {
  if (inputs < 1 || hidden < 1) throw ValidationError("hidden", "layer sizes must be >= 1");
  if (hidden >= inputs) throw ValidationError("hidden", "latent size must be smaller than the input size");
  Rng rng(derive_seed(seed, "am/init"));
  Autoencoder ae;
  ae.inputs = inputs;
  ae.hidden = hidden;
  const auto n = static_cast<std::size_t>(inputs) * hidden;
  ae.w1.resize(n);
  ae.w2.resize(n);
  for (double& w : ae.w1) w = rng.uniform(-0.1, 0.1);
  for (double& w : ae.w2) w = rng.uniform(-0.1, 0.1);
  ae.b1.assign(static_cast<std::size_t>(hidden), 0.0);
  ae.b2.assign(static_cast<std::size_t>(inputs), 0.0);
  return ae;
}

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

void hidden_layer(const Autoencoder& ae, std::span<const double> x, std::vector<double>& act) {
  const std::size_t d = static_cast<std::size_t>(ae.inputs);
  act.assign(ae.b1.begin(), ae.b1.end());
  for (std::size_t i = 0; i < d; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;  // rasters are sparse
    for (std::size_t k = 0; k < act.size(); ++k) act[k] += ae.w1[k * d + i] * xi;
  }
  for (double& a : act) a = sigmoid(a);
}

void output_layer(const Autoencoder& ae, const std::vector<double>& act, std::vector<double>& out) {
  const std::size_t h = static_cast<std::size_t>(ae.hidden);
  out.resize(static_cast<std::size_t>(ae.inputs));
  for (std::size_t j = 0; j < out.size(); ++j) {
    double s = ae.b2[j];
    const double* row = &ae.w2[j * h];
    for (std::size_t k = 0; k < h; ++k) s += row[k] * act[k];
    out[j] = s;
  }
}

void check_input(const Autoencoder& ae, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(ae.inputs)) {
    throw ValidationError("raster", "has " + std::to_string(x.size()) + " cells, model expects " +
                                        std::to_string(ae.inputs));
  }
}

}  // namespace

std::vector<double> forward(const Autoencoder& ae, std::span<const double> x) {
  check_input(ae, x);
  std::vector<double> act, out;
  hidden_layer(ae, x, act);
  output_layer(ae, act, out);
  return out;
}

double reconstruction_error(const Autoencoder& ae, std::span<const double> x) {
  const auto y = forward(ae, x);
  double acc = 0.0;
  for (std::size_t j = 0; j < y.size(); ++j) acc += (y[j] - x[j]) * (y[j] - x[j]);
  return acc / static_cast<double>(y.size());
}

double objective(const Autoencoder& ae, std::span<const std::vector<double>> batch) {
  double total = 0.0;
  for (const auto& x : batch) {
    const auto y = forward(ae, x);
    for (std::size_t j = 0; j < y.size(); ++j) total += 0.5 * (y[j] - x[j]) * (y[j] - x[j]);
  }
  return total / static_cast<double>(batch.size());
}

namespace {

/// Accumulates the batch gradient into `g` (zeroed by the caller) and
/// returns the batch objective.
double accumulate_gradient(const Autoencoder& ae, std::span<const std::vector<double>* const> batch, Autoencoder& g) {
  const std::size_t d = static_cast<std::size_t>(ae.inputs);
  const std::size_t h = static_cast<std::size_t>(ae.hidden);
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  std::vector<double> act, out, g_act(h);
  double loss = 0.0;
  for (const std::vector<double>* xp : batch) {
    const auto& x = *xp;
    hidden_layer(ae, x, act);
    output_layer(ae, act, out);
    std::fill(g_act.begin(), g_act.end(), 0.0);
    for (std::size_t j = 0; j < d; ++j) {
      const double err = out[j] - x[j];
      loss += 0.5 * err * err;
      const double gy = err * inv_b;
      g.b2[j] += gy;
      double* grow = &g.w2[j * h];
      const double* wrow = &ae.w2[j * h];
      for (std::size_t k = 0; k < h; ++k) {
        grow[k] += gy * act[k];
        g_act[k] += gy * wrow[k];
      }
    }
    for (std::size_t k = 0; k < h; ++k) {
      const double gz = g_act[k] * act[k] * (1.0 - act[k]);
      g.b1[k] += gz;
      if (gz == 0.0) continue;
      double* grow = &g.w1[k * d];
      for (std::size_t i = 0; i < d; ++i) {
        if (x[i] != 0.0) grow[i] += gz * x[i];
      }
    }
  }
  return loss * inv_b;
}

Autoencoder zeros_like(const Autoencoder& ae) {
  Autoencoder g = ae;
  std::fill(g.w1.begin(), g.w1.end(), 0.0);
  std::fill(g.b1.begin(), g.b1.end(), 0.0);
  std::fill(g.w2.begin(), g.w2.end(), 0.0);
  std::fill(g.b2.begin(), g.b2.end(), 0.0);
  return g;
}

void descend(std::vector<double>& w, const std::vector<double>& g, double lr) {
  for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * g[i];
}

double mean_error(const Autoencoder& ae, const std::vector<std::vector<double>>& data) {
  double acc = 0.0;
  for (const auto& x : data) acc += reconstruction_error(ae, x);
  return acc / static_cast<double>(data.size());
}

}  // namespace

Autoencoder gradient(const Autoencoder& ae, std::span<const std::vector<double>> batch) {
  for (const auto& x : batch) check_input(ae, x);
  std::vector<const std::vector<double>*> ptrs;
  for (const auto& x : batch) ptrs.push_back(&x);
  Autoencoder g = zeros_like(ae);
  accumulate_gradient(ae, ptrs, g);
  return g;
}

TrainResult train(std::span<const SceneRaster> rasters, const TrainParams& params) {
  if (rasters.size() < kMinTrainingSamples) {
    throw ValidationError("rasters", "training needs at least " + std::to_string(kMinTrainingSamples) +
                                         " samples, got " + std::to_string(rasters.size()));
  }
  if (!(params.learning_rate > 0)) throw ValidationError("learning_rate", "must be > 0");
  if (params.epochs < 0) throw ValidationError("epochs", "must be >= 0");
  if (params.batch_size < 1) throw ValidationError("batch_size", "must be >= 1");
  const int grid = rasters.front().grid;
  std::vector<std::vector<double>> data;
  data.reserve(rasters.size());
  for (const auto& r : rasters) {
    if (r.grid != grid || r.cells.size() != static_cast<std::size_t>(grid) * grid) {
      throw ValidationError("rasters", "all rasters must share one grid size");
    }
    data.push_back(r.cells);
  }

  TrainResult result;
  result.ae = init_autoencoder(grid * grid, params.hidden, params.seed);
  Autoencoder& ae = result.ae;
  result.loss_curve.push_back(mean_error(ae, data));

  Rng shuffle(derive_seed(params.seed, "am/shuffle"));
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  Autoencoder g = zeros_like(ae);
  std::vector<const std::vector<double>*> batch;
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(params.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(params.batch_size));
      batch.clear();
      for (std::size_t i = start; i < stop; ++i) batch.push_back(&data[order[i]]);
      g = zeros_like(ae);
      const double loss = accumulate_gradient(ae, batch, g);
      if (!std::isfinite(loss)) {
        throw NumericError("training diverged: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(start / static_cast<std::size_t>(params.batch_size)) +
                           " (try a smaller learning rate)");
      }
      descend(ae.w1, g.w1, params.learning_rate);
      descend(ae.b1, g.b1, params.learning_rate);
      descend(ae.w2, g.w2, params.learning_rate);
      descend(ae.b2, g.b2, params.learning_rate);
    }
    const double epoch_loss = mean_error(ae, data);
    if (!std::isfinite(epoch_loss)) {
      throw NumericError("training diverged: non-finite loss after epoch " + std::to_string(epoch));
    }
    result.loss_curve.push_back(epoch_loss);
  }
  return result;
}

double nearest_rank_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ValidationError("scores", "must not be empty");
  if (!(q > 0.0 && q <= 1.0)) throw ValidationError("quantile", "must lie in (0, 1]");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  // the epsilon keeps q*n = 99.000000000000014 at rank 99
  auto rank = static_cast<std::size_t>(std::ceil(q * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

double calibrate_threshold(std::span<const double> scores, double q) {
  const double tau = nearest_rank_quantile({scores.begin(), scores.end()}, q) * kThresholdSafetyFactor;
  return std::max(tau, 1e-12);
}

double calibrate_threshold(const AnomalyModel& model, std::span<const SceneRaster> rasters, double q) {
  if (!model.trained()) throw StateError("model is not trained");
  std::vector<double> scores;
  scores.reserve(rasters.size());
  for (const auto& r : rasters) scores.push_back(reconstruction_error(model.ae, r.cells));
  return calibrate_threshold(scores, q);
}

Reconstruction reconstruct(const AnomalyModel& model, const SceneRaster& raster) {
  if (!model.trained()) throw StateError("model is not trained");
  Reconstruction r;
  r.output = forward(model.ae, raster.cells);
  double acc = 0.0;
  for (std::size_t j = 0; j < r.output.size(); ++j) {
    acc += (r.output[j] - raster.cells[j]) * (r.output[j] - raster.cells[j]);
  }
  r.score = acc / static_cast<double>(r.output.size());
  return r;
}

AmVerdict detect(const AnomalyModel& model, const SceneRaster& raster) {
  if (!model.calibrated()) throw StateError("model is not calibrated");
  AmVerdict v;
  v.tick = raster.tick;
  v.score = reconstruct(model, raster).score;
  v.flag = v.score > model.threshold;
  v.model_version = model.version;
  return v;
}

std::string raster_digest(const SceneRaster& raster) {
  std::string text = std::to_string(raster.grid);
  for (const double c : raster.cells) {
    text.push_back(' ');
    text += format_double(c);
  }
  return sha256_hex(text);
}

std::string training_set_digest(std::span<const SceneRaster> rasters) {
  std::vector<std::string> digests;
  digests.reserve(rasters.size());
  for (const auto& r : rasters) digests.push_back(raster_digest(r));
  std::sort(digests.begin(), digests.end());
  std::string joined;
  for (const auto& d : digests) joined += d + "\n";
  return sha256_hex(joined);
}

// ---------------------------------------------------------------------------
// Model file

namespace {

constexpr std::string_view kMagic = "depcage-anomaly-model 1";

void put_array(std::ostringstream& os, std::string_view key, const std::vector<double>& v) {
  os << key;
  for (const double x : v) os << ' ' << format_double(x);
  os << '\n';
}

std::vector<double> parse_doubles(std::string_view text, std::size_t line) {
  std::vector<double> out;
  const char* p = text.data();
  const char* end = text.data() + text.size();
  while (p < end) {
    while (p < end && *p == ' ') ++p;
    if (p == end) break;
    double v = 0.0;
    const auto res = std::from_chars(p, end, v);
    if (res.ec != std::errc{}) throw ParseError("invalid number", line);
    out.push_back(v);
    p = res.ptr;
  }
  return out;
}

}  // namespace

std::string serialize_model(const AnomalyModel& m) {
  std::ostringstream body;
  body << "version " << m.version << '\n';
  body << "training_set_digest " << (m.training_set_digest.empty() ? "-" : m.training_set_digest) << '\n';
  body << "training_set_size " << m.training_set_size << '\n';
  body << "inputs " << m.ae.inputs << '\n';
  body << "hidden " << m.ae.hidden << '\n';
  body << "threshold " << format_double(m.threshold) << '\n';
  body << "quantile " << format_double(m.quantile) << '\n';
  body << "window " << format_double(m.window.x_min) << ' ' << format_double(m.window.y_min) << ' '
       << format_double(m.window.width) << ' ' << format_double(m.window.height) << ' ' << m.window.grid << '\n';
  put_array(body, "w1", m.ae.w1);
  put_array(body, "b1", m.ae.b1);
  put_array(body, "w2", m.ae.w2);
  put_array(body, "b2", m.ae.b2);
  const std::string text = body.str();
  return std::string(kMagic) + "\ndigest " + sha256_hex(text) + "\n" + text;
}

std::string model_file_digest(std::string_view text) {
  const auto first = text.find('\n');
  const auto second = first == std::string_view::npos ? first : text.find('\n', first + 1);
  if (second == std::string_view::npos) throw ParseError("model file is truncated", 1);
  const std::string_view line = text.substr(first + 1, second - first - 1);
  if (!line.starts_with("digest ")) throw ParseError("expected digest line", 2);
  return std::string(line.substr(7));
}

AnomalyModel parse_model(std::string_view text) {
  const auto first = text.find('\n');
  if (first == std::string_view::npos || text.substr(0, first) != kMagic) {
    throw ParseError("not a depcage anomaly model", 1);
  }
  const std::string declared = model_file_digest(text);
  const auto second = text.find('\n', first + 1);
  const std::string_view body = text.substr(second + 1);
  if (sha256_hex(body) != declared) throw DigestMismatch("model file digest does not match its contents");

  AnomalyModel m;
  std::map<std::string, std::string_view> fields;
  std::size_t line_no = 2;
  std::size_t pos = 0;
  std::map<std::string, std::size_t> lines;
  while (pos < body.size()) {
    ++line_no;
    auto nl = body.find('\n', pos);
    if (nl == std::string_view::npos) nl = body.size();
    const std::string_view line = body.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    const auto sp = line.find(' ');
    const std::string key(line.substr(0, sp));
    fields[key] = sp == std::string_view::npos ? std::string_view{} : line.substr(sp + 1);
    lines[key] = line_no;
  }
  const auto need = [&](const std::string& key) {
    const auto it = fields.find(key);
    if (it == fields.end()) throw ParseError("missing field '" + key + "'");
    return it->second;
  };
  const auto need_int = [&](const std::string& key) {
    const auto v = need(key);
    long long out = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) throw ParseError("invalid integer", lines[key]);
    return out;
  };
  const auto need_doubles = [&](const std::string& key) { return parse_doubles(need(key), lines[key]); };

  m.version = static_cast<int>(need_int("version"));
  const auto digest = need("training_set_digest");
  m.training_set_digest = digest == "-" ? std::string{} : std::string(digest);
  m.training_set_size = static_cast<std::size_t>(need_int("training_set_size"));
  m.ae.inputs = static_cast<int>(need_int("inputs"));
  m.ae.hidden = static_cast<int>(need_int("hidden"));
  const auto one = [&](const std::string& key) {
    const auto v = need_doubles(key);
    if (v.size() != 1) throw ParseError("expected one value", lines[key]);
    return v[0];
  };
  m.threshold = one("threshold");
  m.quantile = one("quantile");
  const auto win = need_doubles("window");
  if (win.size() != 5) throw ParseError("window needs 5 values", lines["window"]);
  m.window = {win[0], win[1], win[2], win[3], static_cast<int>(win[4])};
  m.ae.w1 = need_doubles("w1");
  m.ae.b1 = need_doubles("b1");
  m.ae.w2 = need_doubles("w2");
  m.ae.b2 = need_doubles("b2");
  const auto n = static_cast<std::size_t>(m.ae.inputs) * static_cast<std::size_t>(m.ae.hidden);
  if (m.ae.w1.size() != n || m.ae.w2.size() != n || m.ae.b1.size() != static_cast<std::size_t>(m.ae.hidden) ||
      m.ae.b2.size() != static_cast<std::size_t>(m.ae.inputs)) {
    throw ParseError("weight array sizes do not match inputs/hidden");
  }
  return m;
}

// ---------------------------------------------------------------------------
// Knowledge base

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& p, const std::string& text) {
  const fs::path tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << text;
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, p, ec);
  if (ec) throw IoError("cannot publish " + p.string() + ": " + ec.message());
}

}  // namespace

std::vector<SceneRaster> read_raster_records(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot read " + file.string());
  std::vector<SceneRaster> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto rec = parse_record_line(line, line_no);
    if (rec.value("type", "") != "raster") continue;
    try {
      out.push_back(decode_raster(rec.at("raster")));
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), line_no, file.string());
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(e.what(), line_no, file.string());
    }
  }
  return out;
}

KnowledgeBase::KnowledgeBase(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_ / "rasters", ec);
  fs::create_directories(root_ / "models", ec);
  if (!fs::is_directory(root_ / "rasters") || !fs::is_directory(root_ / "models")) {
    throw IoError("cannot create knowledge base at " + root_.string());
  }
}

std::vector<SceneRaster> KnowledgeBase::rasters() const {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(root_ / "rasters")) {
    if (entry.is_regular_file() && entry.path().extension() == ".rec") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<SceneRaster> out;
  std::set<std::string> seen;
  for (const auto& f : files) {
    for (auto& r : read_raster_records(f)) {
      if (seen.insert(raster_digest(r)).second) out.push_back(std::move(r));
    }
  }
  return out;
}

std::size_t KnowledgeBase::add_rasters(const std::string& name, std::span<const SceneRaster> rasters) {
  std::set<std::string> seen;
  for (const auto& r : this->rasters()) seen.insert(raster_digest(r));
  std::string text;
  std::size_t added = 0;
  for (const auto& r : rasters) {
    if (!seen.insert(raster_digest(r)).second) continue;
    nlohmann::json rec = {{"type", "raster"}, {"raster", encode(r)}};
    text += encode_record_line(rec);
    ++added;
  }
  if (added == 0) return 0;
  fs::path target = root_ / "rasters" / (name + ".rec");
  for (int i = 1; fs::exists(target); ++i) target = root_ / "rasters" / (name + "-" + std::to_string(i) + ".rec");
  write_file_atomic(target, text);
  return added;
}

int KnowledgeBase::latest_version() const {
  int best = 0;
  for (const auto& entry : fs::directory_iterator(root_ / "models")) {
    const std::string stem = entry.path().stem().string();
    if (entry.path().extension() != ".model" || stem.size() < 2 || stem[0] != 'v') continue;
    int v = 0;
    const auto res = std::from_chars(stem.data() + 1, stem.data() + stem.size(), v);
    if (res.ec == std::errc{} && res.ptr == stem.data() + stem.size()) best = std::max(best, v);
  }
  return best;
}

fs::path KnowledgeBase::model_path(int version) const {
  return root_ / "models" / ("v" + std::to_string(version) + ".model");
}

AnomalyModel KnowledgeBase::load_model(int version) const {
  const fs::path p = model_path(version);
  if (!fs::exists(p)) throw IoError("no model version " + std::to_string(version) + " in " + root_.string());
  AnomalyModel m = parse_model(read_file(p));
  if (m.version != version) {
    throw DigestMismatch(p.string() + " declares version " + std::to_string(m.version));
  }
  return m;
}

AnomalyModel KnowledgeBase::load_latest() const {
  const int v = latest_version();
  if (v == 0) throw StateError("knowledge base " + root_.string() + " holds no model");
  return load_model(v);
}

void KnowledgeBase::publish(const AnomalyModel& model) const {
  if (model.version < 1) throw ValidationError("version", "must be >= 1");
  if (fs::exists(model_path(model.version))) {
    throw IoError("model version " + std::to_string(model.version) + " already exists");
  }
  write_file_atomic(model_path(model.version), serialize_model(model));
}

std::optional<RasterWindow> KnowledgeBase::window() const {
  const fs::path p = root_ / "window.json";
  if (!fs::exists(p)) return std::nullopt;
  try {
    return decode_window(parse_document(read_file(p)), "window");
  } catch (const ParseError& e) {
    throw ParseError(e.message(), e.line(), p.string());
  }
}

void KnowledgeBase::bind_window(const RasterWindow& window) const {
  if (const auto current = this->window()) {
    if (!(*current == window)) {
      throw ValidationError("raster", "window differs from the knowledge base window in " + root_.string());
    }
    return;
  }
  write_file_atomic(root_ / "window.json", encode(window).dump() + "\n");
}

AnomalyModel train_model(const KnowledgeBase& kb, const TrainParams& params, double quantile,
                         std::optional<RasterWindow> window) {
  if (!window) window = kb.window();
  if (!window) throw StateError("knowledge base " + kb.root().string() + " has no raster window");
  const auto rasters = kb.rasters();
  if (!rasters.empty() && rasters.front().grid != window->grid) {
    throw ValidationError("raster/grid", "stored rasters do not match the window grid");
  }
  AnomalyModel model;
  model.ae = train(rasters, params).ae;
  model.quantile = quantile;
  model.threshold = calibrate_threshold(model, rasters, quantile);
  model.training_set_digest = training_set_digest(rasters);
  model.training_set_size = rasters.size();
  model.version = kb.latest_version() + 1;
  model.window = *window;
  kb.publish(model);
  return model;
}

AnomalyModel recalibrate_model(const KnowledgeBase& kb, int version, double quantile) {
  AnomalyModel model = kb.load_model(version);
  const auto rasters = kb.rasters();
  const std::string digest = training_set_digest(rasters);
  if (model.training_set_digest != digest) {
    throw DigestMismatch("model v" + std::to_string(version) + " was trained on " + model.training_set_digest +
                         " but the knowledge base holds " + digest);
  }
  model.quantile = quantile;
  model.threshold = calibrate_threshold(model, rasters, quantile);
  model.version = kb.latest_version() + 1;
  kb.publish(model);
  return model;
}

AnomalyModel retrain_with_recordings(const AnomalyModel& base, KnowledgeBase& kb,
                                     std::span<const SceneRaster> recorded, const TrainParams& params,
                                     const std::string& recording_name) {
  if (recorded.empty()) throw ValidationError("recordings", "must not be empty");
  kb.add_rasters(recording_name, recorded);
  const auto rasters = kb.rasters();
  AnomalyModel model;
  model.ae = train(rasters, params).ae;
  model.quantile = base.quantile;
  model.threshold = calibrate_threshold(model, rasters, base.quantile);
  model.training_set_digest = training_set_digest(rasters);
  model.training_set_size = rasters.size();
  model.version = std::max(base.version, kb.latest_version()) + 1;
  model.window = base.window;
  kb.publish(model);
  return model;
}

}  // namespace depcage::am
