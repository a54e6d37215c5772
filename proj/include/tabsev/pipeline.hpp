/*
 * Copyright 2026 The tabsev Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// The end-to-end commands behind the tabsev tool. Each command reads its
// inputs, computes every output in memory and returns them; nothing touches
// the output directory until write_outputs runs, so a failing command leaves
// no partial files behind.

#include "tabsev/dataset.hpp"
#include "tabsev/models.hpp"
#include "tabsev/trainer.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tabsev {

struct OutputFile {
  std::string name;
  std::string content;
};

struct CommandOutput {
  std::vector<OutputFile> files;
  /// Resolved settings recorded in the manifest.
  nlohmann::json config = nlohmann::json::object();
  /// Input path and content digest pairs.
  std::vector<std::pair<std::string, std::string>> inputs;

  void add(std::string name, std::string content);
  const std::string& file(std::string_view name) const;
};

struct RunManifest {
  std::string command;
  nlohmann::json config;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> inputs;
  /// Output path and content digest pairs.
  std::vector<std::pair<std::string, std::string>> outputs;
  double wall_seconds = 0.0;

  nlohmann::json to_json() const;
};

/// 64-bit FNV-1a of the bytes as 16 hex digits.
std::string content_digest(std::string_view bytes);

/// Writes each file under out_dir through a temporary and a rename, then
/// manifest.json listing them. Returns the manifest it wrote.
RunManifest write_outputs(const std::filesystem::path& out_dir, const std::string& command, std::uint64_t seed,
                          const CommandOutput& output, double wall_seconds);

/// Reads a labels file: a JSON object with a "labels" array (as written by
/// synth) or a CSV whose "label" column, or else its first column, holds
/// integers.
Labels read_labels(const std::filesystem::path& path);
std::string labels_csv(const Labels& labels);

struct SynthOptions {
  std::size_t n = 2000;
  std::size_t levels = 2;
  std::uint64_t seed = 0;
  std::size_t informative = 6;
  double strength = 0.5;
  double missing_rate = 0.0;
};

/// dataset.csv, schema.json and ground_truth.json (severity per row).
CommandOutput run_synth(const SynthOptions& options);

struct ClusterOptions {
  std::filesystem::path input;
  std::filesystem::path schema;
  std::optional<Index> k;
  std::optional<std::pair<Index, Index>> k_range;
  std::uint64_t seed = 0;
  int n_init = 10;
  /// Token that marks a reported difficulty in the target questions.
  std::string positive = "yes";
};

/// With k: labels.csv ordered by severity plus modes.json. With k_range:
/// cost_curve.csv. Both may be requested together.
CommandOutput run_cluster(const ClusterOptions& options);

struct TrainOptions {
  std::filesystem::path input;
  std::filesystem::path labels;
  /// Defaults to the built-in schema when empty.
  std::filesystem::path schema;
  ModelKind model = ModelKind::kWideDeep;
  /// Number of classes; 0 takes the largest label plus one.
  int levels = 0;
  int epochs = 100;
  Index batch_size = 256;
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  double test_fraction = 0.2;
  std::optional<double> learning_rate;
  /// Keys overriding the default model config (config_to_json names).
  nlohmann::json model_overrides = nlohmann::json::object();
};

/// Split, K-fold epoch selection and a final fit on the training split.
/// Writes model.json, history.csv, fold_<k>_history.csv, cv.json, and the
/// held-out rows as test.csv with test_labels.csv.
CommandOutput run_train(const TrainOptions& options);

struct EvaluateOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path input;
  std::filesystem::path labels;
};

/// metrics.json and roc.csv (binary) or roc_class_<c>.csv per class.
CommandOutput run_evaluate(const EvaluateOptions& options);

struct ExplainOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path input;
  Index rows = 100;
};

/// mask_step_<i>.csv for every decision step and mask_aggregate.csv, one
/// column per input feature, plus importance.csv with the mean aggregate
/// mass per feature. Throws kConfigMismatch unless the checkpoint is TabNet.
CommandOutput run_explain(const ExplainOptions& options);

/// Encoded model inputs with the fitted preprocessing needed to encode
/// further tables the same way.
struct PreparedData {
  FeatureSchema features;
  EncodedMatrix encoded;
  Batch batch;
  InputSchema schema;
};

/// Drops target-question columns, imputes, label-encodes and standardises
/// with the statistics of `fit_rows` (all rows when empty).
PreparedData prepare_features(const DataTable& table, const std::vector<std::size_t>& fit_rows = {});
/// Preprocessing settings stored with a trained checkpoint.
nlohmann::json preprocessing_json(const PreparedData& data);
/// Encodes a table with stored preprocessing settings.
Batch encode_features(const DataTable& table, const nlohmann::json& preprocessing);

}  // namespace tabsev
