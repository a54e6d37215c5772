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

#include "tabsev/trainer.hpp"

#include "tabsev/dataset.hpp"
#include "tabsev/error.hpp"
#include "tabsev/io.hpp"
#include "tabsev/optim.hpp"

#include <cmath>
#include <numeric>

namespace tabsev {

namespace {

void check_dataset(const Dataset& d, Index output_dim, const char* what) {
  if (d.rows() == 0 || d.y.empty()) throw Error(ErrorKind::kEmptyData, std::string(what) + " set is empty");
  if (static_cast<Index>(d.y.size()) != d.rows())
    throw Error(ErrorKind::kLengthMismatch, std::string(what) + " labels and rows differ in length");
  const Index expected = d.classes == 2 ? 1 : d.classes;
  if (d.classes < 2 || expected != output_dim)
    throw Error(ErrorKind::kConfigMismatch, std::string(what) + " set has " + std::to_string(d.classes) +
                                                " classes but the model outputs " + std::to_string(output_dim));
  for (int label : d.y)
    if (label < 0 || label >= d.classes)
      throw Error(ErrorKind::kLabelOutOfRange, "label " + std::to_string(label) + " outside [0, " +
                                                   std::to_string(d.classes) + ")");
}

Var loss_node(Var p, const Matrix& y, LossKind kind) {
  return kind == LossKind::kBinaryCrossEntropy ? binary_cross_entropy(p, y) : categorical_cross_entropy(p, y);
}

double accuracy_of(const Matrix& probabilities, const Labels& labels) {
  const Labels predicted = predict_labels(probabilities);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += predicted[i] == labels[i];
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

template <typename T>
void read(const nlohmann::json& doc, const char* key, T& out) {
  if (doc.contains(key)) out = doc.at(key).get<T>();
}

}  // namespace

Dataset Dataset::take(const std::vector<std::size_t>& rows) const {
  Dataset out;
  out.x = x.take(rows);
  out.classes = classes;
  out.y.reserve(rows.size());
  for (std::size_t r : rows) out.y.push_back(y.at(r));
  return out;
}

Matrix Dataset::targets(Index output_dim) const {
  Matrix t = Matrix::Zero(static_cast<Index>(y.size()), output_dim);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (output_dim == 1)
      t(static_cast<Index>(i), 0) = y[i];
    else
      t(static_cast<Index>(i), y[i]) = 1.0;
  }
  return t;
}

std::string_view to_string(LossKind kind) {
  return kind == LossKind::kBinaryCrossEntropy ? "binary_cross_entropy" : "categorical_cross_entropy";
}

LossKind loss_for(Index output_dim) {
  return output_dim == 1 ? LossKind::kBinaryCrossEntropy : LossKind::kCategoricalCrossEntropy;
}

double loss_value(const Matrix& probabilities, const Matrix& targets, LossKind kind) {
  Tape tape;
  return loss_node(tape.constant(probabilities), targets, kind).value()(0, 0);
}

// ---------------------------------------------------------------- config

void TrainConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorKind::kConfigMismatch, what);
  };
  require(epochs >= 1, "epochs must be at least 1");
  require(batch_size >= 1, "batch_size must be at least 1");
  require(learning_rate >= 0.0 && std::isfinite(learning_rate), "learning_rate must be finite and non-negative");
  require(rho >= 0.0 && rho < 1.0, "rho must lie in [0, 1)");
  require(epsilon > 0.0, "epsilon must be positive");
  require(early_stop_patience >= 1 && plateau_patience >= 1, "patience must be at least 1");
  require(plateau_factor > 0.0 && plateau_factor < 1.0, "plateau_factor must lie in (0, 1)");
  require(min_lr >= 0.0, "min_lr must be non-negative");
  require(min_delta >= 0.0, "min_delta must be non-negative");
  require(penalty_lambda >= 0.0, "penalty_lambda must be non-negative");
}

nlohmann::json TrainConfig::to_json() const {
  nlohmann::json j{{"epochs", epochs},
                   {"batch_size", batch_size},
                   {"learning_rate", learning_rate},
                   {"rho", rho},
                   {"epsilon", epsilon},
                   {"early_stopping", early_stopping},
                   {"early_stop_patience", early_stop_patience},
                   {"reduce_on_plateau", reduce_on_plateau},
                   {"plateau_patience", plateau_patience},
                   {"plateau_factor", plateau_factor},
                   {"min_lr", min_lr},
                   {"min_delta", min_delta},
                   {"checkpoint_best", checkpoint_best},
                   {"penalty_lambda", penalty_lambda},
                   {"seed", seed}};
  j["penalty"] = penalty ? (*penalty == PenaltyForm::kL1 ? "l1" : "l2") : "none";
  return j;
}

TrainConfig TrainConfig::from_json(const nlohmann::json& doc) {
  TrainConfig c;
  try {
    read(doc, "epochs", c.epochs);
    read(doc, "batch_size", c.batch_size);
    read(doc, "learning_rate", c.learning_rate);
    read(doc, "rho", c.rho);
    read(doc, "epsilon", c.epsilon);
    read(doc, "early_stopping", c.early_stopping);
    read(doc, "early_stop_patience", c.early_stop_patience);
    read(doc, "reduce_on_plateau", c.reduce_on_plateau);
    read(doc, "plateau_patience", c.plateau_patience);
    read(doc, "plateau_factor", c.plateau_factor);
    read(doc, "min_lr", c.min_lr);
    read(doc, "min_delta", c.min_delta);
    read(doc, "checkpoint_best", c.checkpoint_best);
    read(doc, "penalty_lambda", c.penalty_lambda);
    read(doc, "seed", c.seed);
    if (doc.contains("penalty")) {
      const auto form = doc.at("penalty").get<std::string>();
      if (form == "l1")
        c.penalty = PenaltyForm::kL1;
      else if (form == "l2")
        c.penalty = PenaltyForm::kL2;
      else if (form != "none")
        throw Error(ErrorKind::kConfigMismatch, "penalty must be none, l1 or l2");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfigMismatch, std::string("train config: ") + e.what());
  }
  c.validate();
  return c;
}

// ---------------------------------------------------------------- callbacks

bool EarlyStopping::update(double loss) {
  if (loss < best_ - min_delta_) {
    best_ = loss;
    wait_ = 0;
    return false;
  }
  return ++wait_ >= patience_;
}

double ReduceLrOnPlateau::update(double loss, double learning_rate) {
  if (loss < best_ - min_delta_) {
    best_ = loss;
    wait_ = 0;
    return learning_rate;
  }
  if (++wait_ < patience_) return learning_rate;
  wait_ = 0;
  return std::max(learning_rate * factor_, min_lr_);
}

bool BestCheckpoint::update(int epoch, double accuracy, const ParamStore& params) {
  if (!(accuracy > accuracy_)) return false;
  epoch_ = epoch;
  accuracy_ = accuracy;
  params_ = params;
  return true;
}

// ---------------------------------------------------------------- history

std::string TrainHistory::csv() const {
  std::string out = "epoch,learning_rate,train_loss,train_accuracy,val_loss,val_accuracy\n";
  for (const EpochRecord& e : epochs) {
    out += csv_line({std::to_string(e.epoch), format_double(e.learning_rate), format_double(e.train_loss),
                     format_double(e.train_accuracy), std::isnan(e.val_loss) ? "" : format_double(e.val_loss),
                     std::isnan(e.val_accuracy) ? "" : format_double(e.val_accuracy)});
  }
  return out;
}

nlohmann::json TrainHistory::digest() const {
  nlohmann::json j{{"epochs", epochs.size()}, {"best_epoch", best_epoch}, {"stopped_early", stopped_early},
                   {"steps", steps}};
  if (!epochs.empty()) {
    j["final_train_loss"] = epochs.back().train_loss;
    j["final_learning_rate"] = epochs.back().learning_rate;
    if (!std::isnan(epochs.back().val_loss)) j["final_val_loss"] = epochs.back().val_loss;
  }
  return j;
}

// ---------------------------------------------------------------- training

TrainHistory train(Model& model, const Dataset& train_data, const Dataset* validation, const TrainConfig& config) {
  config.validate();
  const Index out = model.output_dim();
  check_dataset(train_data, out, "training");
  if (validation) check_dataset(*validation, out, "validation");
  const LossKind kind = loss_for(out);
  const Matrix targets = train_data.targets(out);
  const Matrix val_targets = validation ? validation->targets(out) : Matrix();

  Rng shuffle_stream = Rng::derive(config.seed, 11);
  Rng dropout_stream = Rng::derive(config.seed, 12);
  OptimizerState opt;
  opt.learning_rate = config.learning_rate;
  opt.rho = config.rho;
  opt.epsilon = config.epsilon;
  EarlyStopping stopper(config.early_stop_patience, config.min_delta);
  ReduceLrOnPlateau plateau(config.plateau_patience, config.plateau_factor, config.min_lr, config.min_delta);
  BestCheckpoint best;

  TrainHistory history;
  const auto n = static_cast<std::size_t>(train_data.rows());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::size_t> rows;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle_stream.shuffle(order);
    EpochRecord record;
    record.epoch = epoch;
    record.learning_rate = opt.learning_rate;
    double loss_sum = 0.0;
    std::size_t hits = 0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop = std::min(n, start + static_cast<std::size_t>(config.batch_size));
      rows.assign(order.begin() + static_cast<std::ptrdiff_t>(start), order.begin() + static_cast<std::ptrdiff_t>(stop));
      const Batch xb = train_data.x.take(rows);
      Matrix yb(static_cast<Index>(rows.size()), out);
      for (std::size_t i = 0; i < rows.size(); ++i) yb.row(static_cast<Index>(i)) = targets.row(static_cast<Index>(rows[i]));

      Tape tape;
      Var p = model.forward(tape, xb, {Mode::kTrain, &dropout_stream});
      Var data_loss = loss_node(p, yb, kind);
      Var total = config.penalty ? add(data_loss, penalty(tape, model.params(), *config.penalty, config.penalty_lambda))
                                 : data_loss;
      const double value = total.value()(0, 0);
      if (!std::isfinite(value))
        throw Error(ErrorKind::kNonFiniteLoss, "loss became " + std::to_string(value) + " at epoch " +
                                                   std::to_string(epoch) + ", batch starting at row " +
                                                   std::to_string(start));
      tape.backward(total);
      rmsprop_step(model.params(), tape.gradients(model.params()), opt);
      ++history.steps;

      loss_sum += data_loss.value()(0, 0) * static_cast<double>(rows.size());
      const Labels predicted = predict_labels(p.value());
      for (std::size_t i = 0; i < rows.size(); ++i) hits += predicted[i] == train_data.y[rows[i]];
    }
    record.train_loss = loss_sum / static_cast<double>(n);
    record.train_accuracy = static_cast<double>(hits) / static_cast<double>(n);

    bool stop = false;
    if (validation) {
      const Matrix probs = model.predict(validation->x);
      record.val_loss = loss_value(probs, val_targets, kind);
      record.val_accuracy = accuracy_of(probs, validation->y);
      if (config.checkpoint_best) best.update(epoch, record.val_accuracy, model.params());
      if (config.reduce_on_plateau) opt.learning_rate = plateau.update(record.val_loss, opt.learning_rate);
      if (config.early_stopping) stop = stopper.update(record.val_loss);
    }
    history.epochs.push_back(record);
    if (stop) {
      history.stopped_early = true;
      break;
    }
  }
  if (best.has_value()) {
    history.best_epoch = best.epoch();
    model.params().assign(best.params());
  } else if (validation) {
    int arg = 0;
    for (std::size_t e = 0; e < history.epochs.size(); ++e)
      if (history.epochs[e].val_accuracy > history.epochs[static_cast<std::size_t>(arg)].val_accuracy)
        arg = static_cast<int>(e);
    history.best_epoch = arg + 1;
  }
  return history;
}

EvalReport evaluate(Model& model, const Dataset& data) {
  check_dataset(data, model.output_dim(), "evaluation");
  const Matrix probs = model.predict(data.x);
  const double loss = loss_value(probs, data.targets(model.output_dim()), loss_for(model.output_dim()));
  return evaluate_predictions(probs, data.y, loss);
}

CrossValidation cross_validate(const ModelConfig& model_config, const InputSchema& schema, const Dataset& data,
                               std::size_t k, const TrainConfig& config, std::uint64_t model_seed) {
  if (k < 2) throw Error(ErrorKind::kBadK, "cross-validation needs at least 2 folds");
  if (data.rows() < static_cast<Index>(k))
    throw Error(ErrorKind::kEmptySplit, "fewer rows than folds");
  SplitPlan plan;
  plan.train.resize(static_cast<std::size_t>(data.rows()));
  std::iota(plan.train.begin(), plan.train.end(), 0);
  plan.seed = config.seed;
  plan = kfold(std::move(plan), k);

  CrossValidation cv;
  for (std::size_t f = 0; f < k; ++f) {
    std::vector<std::size_t> rest;
    for (std::size_t g = 0; g < k; ++g)
      if (g != f) rest.insert(rest.end(), plan.folds[g].begin(), plan.folds[g].end());
    const Dataset fold_train = data.take(rest);
    const Dataset fold_val = data.take(plan.folds[f]);
    auto model = build_model(model_config, schema, model_seed);
    cv.folds.push_back(train(*model, fold_train, &fold_val, config));
  }
  std::size_t common = cv.folds.front().epochs.size();
  for (const TrainHistory& h : cv.folds) common = std::min(common, h.epochs.size());
  cv.mean_val_loss.assign(common, 0.0);
  for (const TrainHistory& h : cv.folds)
    for (std::size_t e = 0; e < common; ++e) cv.mean_val_loss[e] += h.epochs[e].val_loss / static_cast<double>(k);
  cv.selected_epochs = 1;
  for (std::size_t e = 1; e < common; ++e)
    if (cv.mean_val_loss[e] < cv.mean_val_loss[static_cast<std::size_t>(cv.selected_epochs - 1)])
      cv.selected_epochs = static_cast<int>(e) + 1;
  return cv;
}

FitResult fit(const ModelConfig& model_config, const InputSchema& schema, const Dataset& data, std::size_t k,
              const TrainConfig& config, std::uint64_t model_seed) {
  FitResult result;
  result.cv = cross_validate(model_config, schema, data, k, config, model_seed);
  TrainConfig final_config = config;
  final_config.epochs = result.cv.selected_epochs;
  result.model = build_model(model_config, schema, model_seed);
  result.history = train(*result.model, data, nullptr, final_config);
  return result;
}

std::string checkpoint_text(const Model& model, const TrainHistory* history, const nlohmann::json& extra) {
  nlohmann::json echo{{"model", config_to_json(model.config())}, {"schema", model.schema().to_json()}};
  if (history) echo["history"] = history->digest();
  if (!extra.is_null()) echo["extra"] = extra;
  return checkpoint_json(model.params(), echo);
}

LoadedModel parse_model_checkpoint(const std::string& text) {
  const Checkpoint ck = parse_checkpoint(text);
  if (!ck.config_echo.contains("model") || !ck.config_echo.contains("schema"))
    throw Error(ErrorKind::kConfigMismatch, "checkpoint does not describe its model");
  const nlohmann::json& m = ck.config_echo.at("model");
  const Index out = m.value("output_dim", Index{1});
  const ModelConfig config = config_from_json(m, out == 1 ? 2 : static_cast<int>(out));
  LoadedModel loaded;
  loaded.model = build_model(config, InputSchema::from_json(ck.config_echo.at("schema")), 0);
  restore_params(ck, loaded.model->params());
  if (ck.config_echo.contains("extra")) loaded.extra = ck.config_echo.at("extra");
  return loaded;
}

void save_checkpoint(const std::filesystem::path& path, const Model& model, const TrainHistory* history) {
  write_file_atomic(path, checkpoint_text(model, history));
}

std::unique_ptr<Model> load_checkpoint(const std::filesystem::path& path) {
  return parse_model_checkpoint(read_file(path)).model;
}

}  // namespace tabsev
