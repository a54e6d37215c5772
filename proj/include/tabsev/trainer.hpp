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

#include "tabsev/metrics.hpp"
#include "tabsev/models.hpp"
#include "tabsev/ops.hpp"

#include "json.hpp"

#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace tabsev {

/// Model inputs with integer labels in [0, classes).
struct Dataset {
  Batch x;
  Labels y;
  int classes = 2;

  Index rows() const { return x.rows(); }
  Dataset take(const std::vector<std::size_t>& rows) const;
  /// 0/1 column for output width 1, one-hot rows otherwise.
  Matrix targets(Index output_dim) const;
};

enum class LossKind { kBinaryCrossEntropy, kCategoricalCrossEntropy };
std::string_view to_string(LossKind kind);
LossKind loss_for(Index output_dim);
/// Mean loss of probabilities against targets, as the training loss computes it.
double loss_value(const Matrix& probabilities, const Matrix& targets, LossKind kind);

struct TrainConfig {
  int epochs = 100;
  Index batch_size = 256;
  double learning_rate = 1e-3;
  double rho = 0.9;
  double epsilon = 1e-8;
  bool early_stopping = true;
  int early_stop_patience = 10;
  bool reduce_on_plateau = true;
  int plateau_patience = 10;
  double plateau_factor = 0.5;
  double min_lr = 1e-6;
  double min_delta = 0.0;
  /// Keep the weights of the best validation accuracy and restore them at the end.
  bool checkpoint_best = true;
  std::optional<PenaltyForm> penalty;
  double penalty_lambda = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
  /// Starts from the defaults and overrides any keys present.
  static TrainConfig from_json(const nlohmann::json& doc);
};

/// Stops once the monitored loss has failed to improve on its best by more
/// than min_delta for `patience` consecutive epochs.
class EarlyStopping {
 public:
  EarlyStopping(int patience, double min_delta) : patience_(patience), min_delta_(min_delta) {}
  /// Feed one epoch's loss; true means stop now.
  bool update(double loss);
  int wait() const { return wait_; }
  double best() const { return best_; }

 private:
  int patience_;
  double min_delta_;
  double best_ = std::numeric_limits<double>::infinity();
  int wait_ = 0;
};

/// Multiplies the learning rate by `factor` (floored at min_lr) after
/// `patience` epochs without improvement, then starts counting again.
class ReduceLrOnPlateau {
 public:
  ReduceLrOnPlateau(int patience, double factor, double min_lr, double min_delta)
      : patience_(patience), factor_(factor), min_lr_(min_lr), min_delta_(min_delta) {}
  /// Learning rate to use for the next epoch.
  double update(double loss, double learning_rate);
  int wait() const { return wait_; }

 private:
  int patience_;
  double factor_;
  double min_lr_;
  double min_delta_;
  double best_ = std::numeric_limits<double>::infinity();
  int wait_ = 0;
};

/// Copy of the parameters at the epoch with the highest validation accuracy.
/// Only a strict improvement replaces the stored copy.
class BestCheckpoint {
 public:
  bool update(int epoch, double accuracy, const ParamStore& params);
  bool has_value() const { return epoch_ > 0; }
  int epoch() const { return epoch_; }
  double accuracy() const { return accuracy_; }
  const ParamStore& params() const { return params_; }

 private:
  int epoch_ = 0;
  double accuracy_ = -std::numeric_limits<double>::infinity();
  ParamStore params_;
};

struct EpochRecord {
  int epoch = 0;
  double learning_rate = 0.0;
  double train_loss = 0.0;
  /// Accuracy of the train-mode predictions made during the epoch.
  double train_accuracy = 0.0;
  double val_loss = std::numeric_limits<double>::quiet_NaN();
  double val_accuracy = std::numeric_limits<double>::quiet_NaN();
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  /// 1-based epoch of the best validation accuracy; 0 without validation.
  int best_epoch = 0;
  bool stopped_early = false;
  std::size_t steps = 0;

  std::string csv() const;
  nlohmann::json digest() const;
};

/// Mini-batch RMSprop on `model`. With validation data the callbacks run
/// after every epoch; without it the loop simply runs config.epochs.
TrainHistory train(Model& model, const Dataset& train_data, const Dataset* validation, const TrainConfig& config);

/// Infer-mode predictions scored by the metrics module.
EvalReport evaluate(Model& model, const Dataset& data);

struct CrossValidation {
  std::vector<TrainHistory> folds;
  /// Mean validation loss per epoch over the epochs every fold completed.
  std::vector<double> mean_val_loss;
  /// 1-based argmin of mean_val_loss (first on ties).
  int selected_epochs = 0;
};

/// K runs with fold k held out. Every fold starts from the same initial
/// parameters (model_seed) and uses the same training streams (config.seed),
/// so folds differ only in their data.
CrossValidation cross_validate(const ModelConfig& model_config, const InputSchema& schema, const Dataset& data,
                               std::size_t k, const TrainConfig& config, std::uint64_t model_seed);

struct FitResult {
  std::unique_ptr<Model> model;
  CrossValidation cv;
  TrainHistory history;
};

/// Cross-validates to choose the epoch count, then retrains a fresh model on
/// all of `data` for that many epochs.
FitResult fit(const ModelConfig& model_config, const InputSchema& schema, const Dataset& data, std::size_t k,
              const TrainConfig& config, std::uint64_t model_seed);

/// Checkpoint document: parameters plus an echo of the model config, its
/// input schema, the history digest and any caller metadata under "extra".
std::string checkpoint_text(const Model& model, const TrainHistory* history = nullptr,
                            const nlohmann::json& extra = nullptr);

struct LoadedModel {
  std::unique_ptr<Model> model;
  /// The "extra" object stored with the checkpoint, or null.
  nlohmann::json extra;
};
LoadedModel parse_model_checkpoint(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const Model& model, const TrainHistory* history = nullptr);
std::unique_ptr<Model> load_checkpoint(const std::filesystem::path& path);

}  // namespace tabsev
