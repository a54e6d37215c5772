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

#include "tabsev/models.hpp"

#include "tabsev/error.hpp"

#include <cmath>
#include <numeric>

namespace tabsev {

namespace {

const double kSqrtHalf = std::sqrt(0.5);

std::vector<int> column_codes(const CodeMatrix& cat, Index j) {
  std::vector<int> codes(static_cast<std::size_t>(cat.rows()));
  for (Index i = 0; i < cat.rows(); ++i) codes[static_cast<std::size_t>(i)] = cat(i, j);
  return codes;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::kConfigMismatch, what);
}

void validate_schema(const InputSchema& s) {
  require(s.vocab_sizes.size() == s.cat_names.size(), "one vocabulary size per categorical column");
  for (Index v : s.vocab_sizes) require(v >= 1, "vocabulary sizes must be positive");
  require(s.n_cat() + s.n_cont() > 0, "model needs at least one input column");
}

void validate_units(const std::vector<Index>& units, const char* what) {
  for (Index u : units) require(u >= 1, std::string(what) + " must be positive");
}

Var maybe_dropout(Var x, double rate, const ForwardContext& ctx) {
  if (rate <= 0.0 || ctx.mode == Mode::kInfer) return x;
  require(ctx.rng != nullptr, "dropout in train mode needs a random stream");
  return dropout(x, rate, ctx.mode, *ctx.rng);
}

template <typename T>
void read(const nlohmann::json& doc, const char* key, T& out) {
  if (doc.contains(key)) out = doc.at(key).get<T>();
}

}  // namespace

nlohmann::json InputSchema::to_json() const {
  return {{"cat_names", cat_names}, {"vocab_sizes", vocab_sizes}, {"cont_names", cont_names}};
}

InputSchema InputSchema::from_json(const nlohmann::json& doc) {
  InputSchema s;
  try {
    s.cat_names = doc.at("cat_names").get<std::vector<std::string>>();
    s.vocab_sizes = doc.at("vocab_sizes").get<std::vector<Index>>();
    s.cont_names = doc.at("cont_names").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfigMismatch, std::string("input schema: ") + e.what());
  }
  validate_schema(s);
  return s;
}

Batch Batch::take(const std::vector<std::size_t>& rows) const {
  Batch out;
  out.cat.resize(static_cast<Index>(rows.size()), cat.cols());
  out.cont.resize(static_cast<Index>(rows.size()), cont.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<Index>(rows[i]);
    if (cat.cols()) out.cat.row(static_cast<Index>(i)) = cat.row(r);
    if (cont.cols()) out.cont.row(static_cast<Index>(i)) = cont.row(r);
  }
  return out;
}

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kWideDeep:
      return "widedeep";
    case ModelKind::kTabTransformer:
      return "tabtransformer";
    case ModelKind::kTabNet:
      return "tabnet";
  }
  return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "widedeep") return ModelKind::kWideDeep;
  if (name == "tabtransformer") return ModelKind::kTabTransformer;
  if (name == "tabnet") return ModelKind::kTabNet;
  throw Error(ErrorKind::kConfigMismatch, "unknown model '" + name + "'");
}

ModelKind kind_of(const ModelConfig& config) {
  return static_cast<ModelKind>(config.index());
}

Index output_dim_of(const ModelConfig& config) {
  return std::visit([](const auto& c) { return c.output_dim; }, config);
}

ModelConfig default_config(ModelKind kind, int classes) {
  require(classes >= 2, "need at least two classes");
  const Index out = classes == 2 ? 1 : classes;
  switch (kind) {
    case ModelKind::kWideDeep: {
      WideDeepConfig c;
      c.output_dim = out;
      return c;
    }
    case ModelKind::kTabTransformer: {
      TabTransformerConfig c;
      c.output_dim = out;
      if (classes == 3) {
        c.blocks = 6;
        c.heads = 8;
      }
      return c;
    }
    case ModelKind::kTabNet: {
      TabNetConfig c;
      c.output_dim = out;
      return c;
    }
  }
  throw Error(ErrorKind::kConfigMismatch, "unknown model kind");
}

nlohmann::json config_to_json(const ModelConfig& config) {
  nlohmann::json j;
  j["kind"] = std::string(to_string(kind_of(config)));
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        j["output_dim"] = c.output_dim;
        if constexpr (std::is_same_v<T, WideDeepConfig>) {
          j["emb_dim"] = c.emb_dim;
          j["deep_units"] = c.deep_units;
          j["wide_one_hot"] = c.wide_one_hot;
          j["dropout"] = c.dropout;
        } else if constexpr (std::is_same_v<T, TabTransformerConfig>) {
          j["emb_dim"] = c.emb_dim;
          j["blocks"] = c.blocks;
          j["heads"] = c.heads;
          j["ffn_units"] = c.ffn_units;
          j["mlp_units"] = c.mlp_units;
          j["dropout"] = c.dropout;
        } else {
          j["n_steps"] = c.n_steps;
          j["n_a"] = c.n_a;
          j["n_d"] = c.n_d;
          j["gamma_relax"] = c.gamma_relax;
          j["emb_dim"] = c.emb_dim;
          j["bn_momentum"] = c.bn_momentum;
        }
      },
      config);
  return j;
}

ModelConfig config_from_json(const nlohmann::json& doc, int classes) {
  if (!doc.is_object() || !doc.contains("kind")) throw Error(ErrorKind::kConfigMismatch, "model config needs 'kind'");
  ModelConfig config = default_config(model_kind_from_string(doc.at("kind").get<std::string>()), classes);
  try {
    std::visit(
        [&](auto& c) {
          using T = std::decay_t<decltype(c)>;
          read(doc, "output_dim", c.output_dim);
          if constexpr (std::is_same_v<T, WideDeepConfig>) {
            read(doc, "emb_dim", c.emb_dim);
            read(doc, "deep_units", c.deep_units);
            read(doc, "wide_one_hot", c.wide_one_hot);
            read(doc, "dropout", c.dropout);
          } else if constexpr (std::is_same_v<T, TabTransformerConfig>) {
            read(doc, "emb_dim", c.emb_dim);
            read(doc, "blocks", c.blocks);
            read(doc, "heads", c.heads);
            read(doc, "ffn_units", c.ffn_units);
            read(doc, "mlp_units", c.mlp_units);
            read(doc, "dropout", c.dropout);
          } else {
            read(doc, "n_steps", c.n_steps);
            read(doc, "n_a", c.n_a);
            read(doc, "n_d", c.n_d);
            read(doc, "gamma_relax", c.gamma_relax);
            read(doc, "emb_dim", c.emb_dim);
            read(doc, "bn_momentum", c.bn_momentum);
          }
        },
        config);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfigMismatch, std::string("model config: ") + e.what());
  }
  return config;
}

Matrix aggregate_mask(const TabNetState& state) {
  if (state.masks.empty()) throw Error(ErrorKind::kConfigMismatch, "state has no steps");
  Matrix agg = Matrix::Zero(state.masks.front().rows(), state.masks.front().cols());
  for (std::size_t i = 0; i < state.masks.size(); ++i)
    agg += (state.masks[i].array().colwise() * state.eta.col(static_cast<Index>(i)).array()).matrix();
  for (Index b = 0; b < agg.rows(); ++b) {
    const double total = agg.row(b).sum();
    if (total > 0.0)
      agg.row(b) /= total;
    else
      agg.row(b).setConstant(1.0 / static_cast<double>(agg.cols()));
  }
  return agg;
}

Matrix group_columns(const Matrix& mask, const std::vector<Index>& widths) {
  const Index total = std::accumulate(widths.begin(), widths.end(), Index{0});
  if (total != mask.cols())
    throw Error(ErrorKind::kShapeMismatch, "widths cover " + std::to_string(total) + " of " +
                                               std::to_string(mask.cols()) + " columns");
  Matrix out(mask.rows(), static_cast<Index>(widths.size()));
  Index start = 0;
  for (std::size_t f = 0; f < widths.size(); ++f) {
    out.col(static_cast<Index>(f)) = mask.middleCols(start, widths[f]).rowwise().sum();
    start += widths[f];
  }
  return out;
}

// ---------------------------------------------------------------- Model

Var Model::forward(Tape& tape, const Batch& batch, const ForwardContext& ctx) {
  Var z = logits(tape, batch, ctx);
  return output_dim() == 1 ? sigmoid(z) : softmax(z, 1);
}

Matrix Model::predict(const Batch& batch) {
  // inference is row independent, so chunking only bounds memory
  constexpr Index kChunk = 512;
  Matrix out(batch.rows(), output_dim());
  for (Index start = 0; start < batch.rows(); start += kChunk) {
    const Index n = std::min(kChunk, batch.rows() - start);
    Batch part;
    part.cat = batch.cat.middleRows(start, n);
    part.cont = batch.cont.middleRows(start, n);
    Tape tape;
    out.middleRows(start, n) = forward(tape, part, {}).value();
  }
  return out;
}

void Model::check_batch(const Batch& batch) const {
  require(batch.cat.cols() == schema_.n_cat(), "batch has " + std::to_string(batch.cat.cols()) +
                                                   " categorical columns, model expects " +
                                                   std::to_string(schema_.n_cat()));
  require(batch.cont.cols() == schema_.n_cont(), "batch has " + std::to_string(batch.cont.cols()) +
                                                     " numeric columns, model expects " +
                                                     std::to_string(schema_.n_cont()));
  require(batch.cat.cols() == 0 || batch.cont.cols() == 0 || batch.cat.rows() == batch.cont.rows(),
          "categorical and numeric parts differ in rows");
  require(batch.rows() > 0, "empty batch");
  for (Index j = 0; j < batch.cat.cols(); ++j) {
    const Index v = schema_.vocab_sizes[static_cast<std::size_t>(j)];
    if (batch.cat.col(j).minCoeff() < 0 || batch.cat.col(j).maxCoeff() >= v)
      throw Error(ErrorKind::kConfigMismatch, "codes of '" + schema_.cat_names[static_cast<std::size_t>(j)] +
                                                  "' outside vocabulary of size " + std::to_string(v));
  }
  if (!batch.cont.allFinite()) throw Error(ErrorKind::kNonFiniteInput, "non-finite numeric input");
}

// ---------------------------------------------------------------- Wide & Deep

WideDeep::WideDeep(const WideDeepConfig& config, InputSchema schema, std::uint64_t seed)
    : Model(config, std::move(schema)) {
  validate_schema(schema_);
  require(config.emb_dim >= 1 && config.output_dim >= 1, "widths must be positive");
  require(config.dropout >= 0.0 && config.dropout < 1.0, "dropout must lie in [0, 1)");
  validate_units(config.deep_units, "deep units");
  Rng rng(seed);
  const Index wide_in =
      (config.wide_one_hot ? std::accumulate(schema_.vocab_sizes.begin(), schema_.vocab_sizes.end(), Index{0})
                           : schema_.n_cat()) +
      schema_.n_cont();
  Dense{"wide", wide_in, config.output_dim}.build(params_, rng);
  for (Index j = 0; j < schema_.n_cat(); ++j)
    Embedding{"deep/embedding_" + std::to_string(j), schema_.vocab_sizes[static_cast<std::size_t>(j)], config.emb_dim}
        .build(params_, rng);
  Index in = schema_.n_cat() * config.emb_dim + schema_.n_cont();
  for (std::size_t l = 0; l < config.deep_units.size(); ++l) {
    Dense{"deep/dense_" + std::to_string(l), in, config.deep_units[l]}.build(params_, rng);
    in = config.deep_units[l];
  }
  Dense{"deep/head", in, config.output_dim}.build(params_, rng);
}

Matrix WideDeep::wide_input(const Batch& batch) const {
  const Index n = batch.rows();
  if (!cfg().wide_one_hot) {
    Matrix x(n, schema_.n_cat() + schema_.n_cont());
    x.leftCols(schema_.n_cat()) = batch.cat.cast<double>();
    x.rightCols(schema_.n_cont()) = batch.cont;
    return x;
  }
  const Index width = std::accumulate(schema_.vocab_sizes.begin(), schema_.vocab_sizes.end(), Index{0});
  Matrix x = Matrix::Zero(n, width + schema_.n_cont());
  Index offset = 0;
  for (Index j = 0; j < schema_.n_cat(); ++j) {
    for (Index i = 0; i < n; ++i) x(i, offset + batch.cat(i, j)) = 1.0;
    offset += schema_.vocab_sizes[static_cast<std::size_t>(j)];
  }
  x.rightCols(schema_.n_cont()) = batch.cont;
  return x;
}

Var WideDeep::wide_logits(Tape& tape, const Batch& batch) {
  check_batch(batch);
  return Dense{"wide", 0, 0}(tape, params_, tape.constant(wide_input(batch)));
}

Var WideDeep::deep_logits(Tape& tape, const Batch& batch, const ForwardContext& ctx) {
  check_batch(batch);
  std::vector<Var> parts;
  for (Index j = 0; j < schema_.n_cat(); ++j) {
    const auto codes = column_codes(batch.cat, j);
    parts.push_back(Embedding{"deep/embedding_" + std::to_string(j), 0, 0}(tape, params_, codes));
  }
  if (schema_.n_cont()) parts.push_back(tape.constant(batch.cont));
  Var h = parts.size() == 1 ? parts.front() : concat(parts, 1);
  for (std::size_t l = 0; l < cfg().deep_units.size(); ++l) {
    h = relu(Dense{"deep/dense_" + std::to_string(l), 0, 0}(tape, params_, h));
    h = maybe_dropout(h, cfg().dropout, ctx);
  }
  return Dense{"deep/head", 0, 0}(tape, params_, h);
}

Var WideDeep::logits(Tape& tape, const Batch& batch, const ForwardContext& ctx) {
  return add(wide_logits(tape, batch), deep_logits(tape, batch, ctx));
}

// ---------------------------------------------------------------- TabTransformer

namespace {

std::string block_name(Index b, const char* part) { return "block_" + std::to_string(b) + "/" + part; }

}  // namespace

TabTransformer::TabTransformer(const TabTransformerConfig& config, InputSchema schema, std::uint64_t seed)
    : Model(config, std::move(schema)) {
  validate_schema(schema_);
  require(config.emb_dim >= 1 && config.output_dim >= 1 && config.ffn_units >= 1 && config.blocks >= 0,
          "widths must be positive");
  require(config.dropout >= 0.0 && config.dropout < 1.0, "dropout must lie in [0, 1)");
  validate_units(config.mlp_units, "MLP units");
  if (config.heads < 1 || config.emb_dim % config.heads != 0)
    throw Error(ErrorKind::kHeadDivisibility, "embedding width " + std::to_string(config.emb_dim) +
                                                  " not divisible by " + std::to_string(config.heads) + " heads");
  Rng rng(seed);
  const Index d = config.emb_dim;
  for (Index j = 0; j < schema_.n_cat(); ++j)
    Embedding{"embedding_" + std::to_string(j), schema_.vocab_sizes[static_cast<std::size_t>(j)], d}.build(params_,
                                                                                                          rng);
  if (schema_.n_cat() > 0) {
    for (Index b = 0; b < config.blocks; ++b) {
      MultiHeadAttention{block_name(b, "attention"), d, config.heads}.build(params_, rng);
      LayerNorm{block_name(b, "norm_1"), d}.build(params_);
      Dense{block_name(b, "ffn_1"), d, config.ffn_units}.build(params_, rng);
      Dense{block_name(b, "ffn_2"), config.ffn_units, d}.build(params_, rng);
      LayerNorm{block_name(b, "norm_2"), d}.build(params_);
    }
  }
  if (schema_.n_cont()) LayerNorm{"cont_norm", schema_.n_cont()}.build(params_);
  Index in = schema_.n_cat() * d + schema_.n_cont();
  for (std::size_t l = 0; l < config.mlp_units.size(); ++l) {
    Dense{"mlp_" + std::to_string(l), in, config.mlp_units[l]}.build(params_, rng);
    in = config.mlp_units[l];
  }
  Dense{"head", in, config.output_dim}.build(params_, rng);
}

Var TabTransformer::features(Tape& tape, const Batch& batch, const ForwardContext& ctx) {
  check_batch(batch);
  const Index n = batch.rows();
  const Index m = schema_.n_cat();
  const Index d = cfg().emb_dim;
  std::vector<Var> parts;
  if (m > 0) {
    std::vector<Var> columns;
    for (Index j = 0; j < m; ++j) {
      const auto codes = column_codes(batch.cat, j);
      columns.push_back(Embedding{"embedding_" + std::to_string(j), 0, 0}(tape, params_, codes));
    }
    // row b * m + j holds column j of sample b
    Var x = reshape(columns.size() == 1 ? columns.front() : concat(columns, 1), n * m, d);
    for (Index b = 0; b < cfg().blocks; ++b) {
      Var attended = MultiHeadAttention{block_name(b, "attention"), d, cfg().heads}(tape, params_, x, n);
      attended = maybe_dropout(attended, cfg().dropout, ctx);
      Var x1 = LayerNorm{block_name(b, "norm_1"), d}(tape, params_, add(x, attended));
      Var f = relu(Dense{block_name(b, "ffn_1"), 0, 0}(tape, params_, x1));
      f = relu(Dense{block_name(b, "ffn_2"), 0, 0}(tape, params_, f));
      f = maybe_dropout(f, cfg().dropout, ctx);
      x = LayerNorm{block_name(b, "norm_2"), d}(tape, params_, add(x1, f));
    }
    parts.push_back(flatten(x, n));
  }
  if (schema_.n_cont()) parts.push_back(LayerNorm{"cont_norm", schema_.n_cont()}(tape, params_, tape.constant(batch.cont)));
  return parts.size() == 1 ? parts.front() : concat(parts, 1);
}

Var TabTransformer::logits(Tape& tape, const Batch& batch, const ForwardContext& ctx) {
  Var h = features(tape, batch, ctx);
  for (std::size_t l = 0; l < cfg().mlp_units.size(); ++l) {
    h = relu(Dense{"mlp_" + std::to_string(l), 0, 0}(tape, params_, h));
    h = maybe_dropout(h, cfg().dropout, ctx);
  }
  return Dense{"head", 0, 0}(tape, params_, h);
}

// ---------------------------------------------------------------- TabNet

namespace {

std::string step_name(Index s, const std::string& part) { return "step_" + std::to_string(s) + "/" + part; }

}  // namespace

TabNet::TabNet(const TabNetConfig& config, InputSchema schema, std::uint64_t seed) : Model(config, std::move(schema)) {
  validate_schema(schema_);
  require(config.n_steps >= 1, "n_steps must be at least 1");
  require(config.n_a >= 1 && config.n_d >= 1 && config.emb_dim >= 1 && config.output_dim >= 1,
          "widths must be positive");
  require(config.gamma_relax >= 1.0, "gamma_relax must be at least 1");
  require(config.bn_momentum >= 0.0 && config.bn_momentum < 1.0, "bn_momentum must lie in [0, 1)");
  Rng rng(seed);
  const Index D = input_width();
  const Index w = config.n_d + config.n_a;
  for (Index j = 0; j < schema_.n_cat(); ++j)
    Embedding{"embedding_" + std::to_string(j), schema_.vocab_sizes[static_cast<std::size_t>(j)], config.emb_dim}
        .build(params_, rng);
  BatchNorm{"input_bn", D, 1e-5, config.bn_momentum}.build(params_);
  Dense{"shared_0", D, w, false}.build(params_, rng);
  Dense{"shared_1", w, w, false}.build(params_, rng);
  for (Index s = 0; s <= config.n_steps; ++s) {
    Dense{step_name(s, "fc_2"), w, w, false}.build(params_, rng);
    Dense{step_name(s, "fc_3"), w, w, false}.build(params_, rng);
    for (int k = 0; k < 4; ++k) BatchNorm{step_name(s, "bn_" + std::to_string(k)), w, 1e-5, config.bn_momentum}.build(params_);
    if (s == 0) continue;
    Dense{step_name(s, "attention_fc"), config.n_a, D, false}.build(params_, rng);
    BatchNorm{step_name(s, "attention_bn"), D, 1e-5, config.bn_momentum}.build(params_);
  }
  Dense{"head", config.n_d, config.output_dim}.build(params_, rng);
}

Index TabNet::input_width() const { return schema_.n_cat() * cfg().emb_dim + schema_.n_cont(); }

std::vector<Index> TabNet::feature_widths() const {
  std::vector<Index> widths(static_cast<std::size_t>(schema_.n_cat()), cfg().emb_dim);
  widths.resize(widths.size() + static_cast<std::size_t>(schema_.n_cont()), 1);
  return widths;
}

std::vector<std::string> TabNet::feature_names() const {
  std::vector<std::string> names = schema_.cat_names;
  names.insert(names.end(), schema_.cont_names.begin(), schema_.cont_names.end());
  return names;
}

Var TabNet::embed(Tape& tape, const Batch& batch) {
  check_batch(batch);
  std::vector<Var> parts;
  for (Index j = 0; j < schema_.n_cat(); ++j) {
    const auto codes = column_codes(batch.cat, j);
    parts.push_back(Embedding{"embedding_" + std::to_string(j), 0, 0}(tape, params_, codes));
  }
  if (schema_.n_cont()) parts.push_back(tape.constant(batch.cont));
  return parts.size() == 1 ? parts.front() : concat(parts, 1);
}

Var TabNet::feature_transformer(Tape& tape, Var x, Index step, Mode mode) {
  const Index w = cfg().n_d + cfg().n_a;
  auto block = [&](Var in, const std::string& fc, int k) {
    Var z = Dense{fc, 0, 0, false}(tape, params_, in);
    return glu(BatchNorm{step_name(step, "bn_" + std::to_string(k)), w, 1e-5, cfg().bn_momentum}(tape, params_, z, mode));
  };
  Var h = block(x, "shared_0", 0);
  h = affine(add(h, block(h, "shared_1", 1)), kSqrtHalf, 0.0);
  h = affine(add(h, block(h, step_name(step, "fc_2"), 2)), kSqrtHalf, 0.0);
  h = affine(add(h, block(h, step_name(step, "fc_3"), 3)), kSqrtHalf, 0.0);
  return h;
}

Var TabNet::logits_from_features(Tape& tape, Var x_raw, const ForwardContext& ctx, TabNetState* state) {
  const TabNetConfig& c = cfg();
  const Index D = input_width();
  require(x_raw.cols() == D, "TabNet input has " + std::to_string(x_raw.cols()) + " columns, expected " +
                                 std::to_string(D));
  const Index n = x_raw.rows();
  Var x = BatchNorm{"input_bn", D, 1e-5, c.bn_momentum}(tape, params_, x_raw, ctx.mode);
  Var a = slice_cols(feature_transformer(tape, x, 0, ctx.mode), c.n_d, c.n_a);
  Var prior = tape.constant(Matrix::Ones(n, D));
  if (state) {
    *state = TabNetState{};
    state->priors.push_back(prior.value());
    state->attention.push_back(a.value());
    state->eta.resize(n, c.n_steps);
  }
  Var out;
  for (Index s = 1; s <= c.n_steps; ++s) {
    Var h = Dense{step_name(s, "attention_fc"), 0, 0, false}(tape, params_, a);
    h = BatchNorm{step_name(s, "attention_bn"), D, 1e-5, c.bn_momentum}(tape, params_, h, ctx.mode);
    Var mask = sparsemax(mul(prior, h), 1);
    prior = mul(prior, affine(mask, -1.0, c.gamma_relax));
    Var t = feature_transformer(tape, mul(mask, x), s, ctx.mode);
    Var d = slice_cols(t, 0, c.n_d);
    a = slice_cols(t, c.n_d, c.n_a);
    Var r = relu(d);
    out = s == 1 ? r : add(out, r);
    if (state) {
      state->masks.push_back(mask.value());
      state->priors.push_back(prior.value());
      state->attention.push_back(a.value());
      state->decision.push_back(d.value());
      state->eta.col(s - 1) = r.value().rowwise().sum();
    }
  }
  return Dense{"head", 0, 0}(tape, params_, out);
}

Var TabNet::logits(Tape& tape, const Batch& batch, const ForwardContext& ctx, TabNetState* state) {
  return logits_from_features(tape, embed(tape, batch), ctx, state);
}

Var TabNet::logits(Tape& tape, const Batch& batch, const ForwardContext& ctx) {
  return logits(tape, batch, ctx, nullptr);
}

TabNetState TabNet::explain(const Batch& batch) {
  Tape tape;
  TabNetState state;
  logits(tape, batch, {}, &state);
  return state;
}

std::unique_ptr<Model> build_model(const ModelConfig& config, const InputSchema& schema, std::uint64_t seed) {
  return std::visit(
      [&](const auto& c) -> std::unique_ptr<Model> {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, WideDeepConfig>)
          return std::make_unique<WideDeep>(c, schema, seed);
        else if constexpr (std::is_same_v<T, TabTransformerConfig>)
          return std::make_unique<TabTransformer>(c, schema, seed);
        else
          return std::make_unique<TabNet>(c, schema, seed);
      },
      config);
}

}  // namespace tabsev
