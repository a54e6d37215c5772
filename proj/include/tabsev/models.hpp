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

#include "tabsev/layers.hpp"

#include "json.hpp"

#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace tabsev {

/// What a model consumes: categorical columns with their vocabulary sizes and
/// numeric columns.
struct InputSchema {
  std::vector<std::string> cat_names;
  std::vector<Index> vocab_sizes;
  std::vector<std::string> cont_names;

  Index n_cat() const { return static_cast<Index>(cat_names.size()); }
  Index n_cont() const { return static_cast<Index>(cont_names.size()); }

  nlohmann::json to_json() const;
  static InputSchema from_json(const nlohmann::json& doc);
  bool operator==(const InputSchema&) const = default;
};

struct Batch {
  CodeMatrix cat;
  Matrix cont;

  Index rows() const { return std::max(cat.rows(), cont.rows()); }
  Batch take(const std::vector<std::size_t>& rows) const;
};

struct ForwardContext {
  Mode mode = Mode::kInfer;
  /// Needed only when dropout is active in train mode.
  Rng* rng = nullptr;
};

enum class ModelKind { kWideDeep, kTabTransformer, kTabNet };
std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

struct WideDeepConfig {
  Index emb_dim = 32;
  std::vector<Index> deep_units{32, 32, 32};
  Index output_dim = 1;
  /// Feed the wide part one-hot codes instead of raw label codes.
  bool wide_one_hot = false;
  double dropout = 0.0;
};

struct TabTransformerConfig {
  Index emb_dim = 32;
  Index blocks = 4;
  Index heads = 4;
  Index ffn_units = 32;
  std::vector<Index> mlp_units{16, 16, 16, 16};
  Index output_dim = 1;
  double dropout = 0.0;
};

struct TabNetConfig {
  Index n_steps = 7;
  Index n_a = 16;
  Index n_d = 16;
  double gamma_relax = 1.3;
  Index emb_dim = 8;
  Index output_dim = 1;
  double bn_momentum = 0.99;
};

using ModelConfig = std::variant<WideDeepConfig, TabTransformerConfig, TabNetConfig>;

ModelKind kind_of(const ModelConfig& config);
Index output_dim_of(const ModelConfig& config);
/// Full-size defaults for a task with `classes` labels (output width 1 for
/// two classes). TabTransformer uses 6 blocks of 8 heads for three classes.
ModelConfig default_config(ModelKind kind, int classes);
nlohmann::json config_to_json(const ModelConfig& config);
/// Starts from default_config(kind, classes) and overrides any keys present.
ModelConfig config_from_json(const nlohmann::json& doc, int classes);

/// Per-step masks and bookkeeping of one TabNet forward pass. Step i runs from
/// 1 to n_steps; index 0 of `priors` is the all-ones starting prior and
/// index 0 of `attention` is the output of the initial splitter.
struct TabNetState {
  std::vector<Matrix> masks;      // n_steps, batch x D
  std::vector<Matrix> priors;     // n_steps + 1, batch x D
  std::vector<Matrix> attention;  // n_steps + 1, batch x N_a
  std::vector<Matrix> decision;   // n_steps, batch x N_d (before ReLU)
  Matrix eta;                     // batch x n_steps, row sums of ReLU(d_i)
};

/// sum_i eta_i M_i normalised per row; rows whose weights are all zero become
/// uniform.
Matrix aggregate_mask(const TabNetState& state);
/// Sums mask columns into one column per input feature (`widths` columns each).
Matrix group_columns(const Matrix& mask, const std::vector<Index>& widths);

class Model {
 public:
  virtual ~Model() = default;

  /// Pre-activation outputs, batch x output_dim.
  virtual Var logits(Tape& tape, const Batch& batch, const ForwardContext& ctx) = 0;
  /// sigmoid for a single output, row softmax otherwise.
  Var forward(Tape& tape, const Batch& batch, const ForwardContext& ctx);
  /// Inference-mode probabilities.
  Matrix predict(const Batch& batch);

  ModelKind kind() const { return kind_of(config_); }
  const ModelConfig& config() const { return config_; }
  const InputSchema& schema() const { return schema_; }
  Index output_dim() const { return output_dim_of(config_); }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

 protected:
  Model(ModelConfig config, InputSchema schema) : config_(std::move(config)), schema_(std::move(schema)) {}
  void check_batch(const Batch& batch) const;

  ModelConfig config_;
  InputSchema schema_;
  ParamStore params_;
};

class WideDeep final : public Model {
 public:
  WideDeep(const WideDeepConfig& config, InputSchema schema, std::uint64_t seed);
  Var logits(Tape& tape, const Batch& batch, const ForwardContext& ctx) override;
  Var wide_logits(Tape& tape, const Batch& batch);
  Var deep_logits(Tape& tape, const Batch& batch, const ForwardContext& ctx);

 private:
  const WideDeepConfig& cfg() const { return std::get<WideDeepConfig>(config_); }
  Matrix wide_input(const Batch& batch) const;
};

class TabTransformer final : public Model {
 public:
  TabTransformer(const TabTransformerConfig& config, InputSchema schema, std::uint64_t seed);
  Var logits(Tape& tape, const Batch& batch, const ForwardContext& ctx) override;
  /// Flattened contextual embeddings concatenated with normalised numerics.
  Var features(Tape& tape, const Batch& batch, const ForwardContext& ctx);

 private:
  const TabTransformerConfig& cfg() const { return std::get<TabTransformerConfig>(config_); }
};

class TabNet final : public Model {
 public:
  TabNet(const TabNetConfig& config, InputSchema schema, std::uint64_t seed);
  Var logits(Tape& tape, const Batch& batch, const ForwardContext& ctx) override;
  Var logits(Tape& tape, const Batch& batch, const ForwardContext& ctx, TabNetState* state);
  /// Forward pass from an already embedded batch x D input.
  Var logits_from_features(Tape& tape, Var x, const ForwardContext& ctx, TabNetState* state);
  /// Embedded categorical columns followed by the numeric columns.
  Var embed(Tape& tape, const Batch& batch);
  TabNetState explain(const Batch& batch);

  Index input_width() const;
  /// Columns of the embedded input per feature, categorical then numeric.
  std::vector<Index> feature_widths() const;
  std::vector<std::string> feature_names() const;

 private:
  const TabNetConfig& cfg() const { return std::get<TabNetConfig>(config_); }
  Var feature_transformer(Tape& tape, Var x, Index step, Mode mode);
};

/// Allocates and initialises every parameter from `seed`. Throws
/// kConfigMismatch for invalid settings and kHeadDivisibility when the
/// embedding width does not split across heads.
std::unique_ptr<Model> build_model(const ModelConfig& config, const InputSchema& schema, std::uint64_t seed);

}  // namespace tabsev
