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

// Fixtures shared by the model tests and the acceptance runner.

#include "tabsev/models.hpp"
#include "tabsev/ops.hpp"

#include <algorithm>
#include <string>

namespace tabsev::harness {

inline InputSchema tiny_schema(Index n_cat, Index n_cont, Index vocab = 3) {
  InputSchema s;
  for (Index j = 0; j < n_cat; ++j) {
    s.cat_names.push_back("c" + std::to_string(j));
    s.vocab_sizes.push_back(vocab + j % 2);
  }
  for (Index j = 0; j < n_cont; ++j) s.cont_names.push_back("x" + std::to_string(j));
  return s;
}

inline Batch random_batch(const InputSchema& s, Index rows, Rng& rng) {
  Batch b;
  b.cat.resize(rows, s.n_cat());
  b.cont.resize(rows, s.n_cont());
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < s.n_cat(); ++j)
      b.cat(i, j) = static_cast<int>(rng.below(static_cast<std::uint64_t>(s.vocab_sizes[static_cast<std::size_t>(j)])));
    for (Index j = 0; j < s.n_cont(); ++j) b.cont(i, j) = rng.normal();
  }
  return b;
}

/// One-hot targets for a c-column output, or a 0/1 column for a single output.
inline Matrix random_targets(Index rows, Index output_dim, Rng& rng) {
  if (output_dim == 1) {
    Matrix y(rows, 1);
    for (Index i = 0; i < rows; ++i) y(i, 0) = rng.bernoulli(0.5);
    return y;
  }
  Matrix y = Matrix::Zero(rows, output_dim);
  for (Index i = 0; i < rows; ++i) y(i, static_cast<Index>(rng.below(static_cast<std::uint64_t>(output_dim)))) = 1.0;
  return y;
}

/// Tiny configurations: emb 4, one block or step.
inline ModelConfig tiny_config(ModelKind kind, Index output_dim) {
  switch (kind) {
    case ModelKind::kWideDeep: {
      WideDeepConfig c;
      c.emb_dim = 4;
      c.deep_units = {5};
      c.output_dim = output_dim;
      return c;
    }
    case ModelKind::kTabTransformer: {
      TabTransformerConfig c;
      c.emb_dim = 4;
      c.blocks = 1;
      c.heads = 2;
      c.ffn_units = 5;
      c.mlp_units = {5};
      c.output_dim = output_dim;
      return c;
    }
    case ModelKind::kTabNet: {
      TabNetConfig c;
      c.emb_dim = 4;
      c.n_steps = 1;
      c.n_a = 3;
      c.n_d = 3;
      c.output_dim = output_dim;
      return c;
    }
  }
  return WideDeepConfig{};
}

/// Moves every trainable parameter off its initial value. Zero-initialised
/// biases put ReLU inputs exactly on the kink, where central differences see
/// an average of the two one-sided slopes.
inline void jitter(Model& model, Rng& rng, double sd = 0.1) {
  for (Parameter& p : model.params())
    if (p.trainable)
      for (Index i = 0; i < p.value.size(); ++i) p.value.data()[i] += sd * rng.normal();
}

/// Worst per-tensor relative error between the tape gradient of the batch
/// loss and central differences over every trainable parameter. Tensors
/// whose gradient is below 1e-6 on both sides are judged on absolute error,
/// since central differences of an O(1) loss carry about 1e-11 of rounding.
/// The store is restored before each evaluation because train-mode batch
/// norm updates its running statistics.
inline double model_gradient_check(Model& model, const Batch& batch, const Matrix& y, Mode mode,
                                   double step = 1e-5) {
  const ParamStore snapshot = model.params();
  auto loss = [&](Tape& tape) {
    Var p = model.forward(tape, batch, {mode, nullptr});
    return y.cols() == 1 ? binary_cross_entropy(p, y) : categorical_cross_entropy(p, y);
  };
  Gradients analytic;
  {
    Tape tape;
    Var l = loss(tape);
    tape.backward(l);
    analytic = tape.gradients(model.params());
  }
  auto evaluate = [&](const std::string& name, Index i, double delta) {
    model.params().assign(snapshot);
    model.params().value(name).data()[i] += delta;
    Tape tape;
    return loss(tape).value()(0, 0);
  };
  double worst = 0.0;
  for (const Parameter& p : snapshot) {
    if (!p.trainable) continue;
    Matrix numeric(p.value.rows(), p.value.cols());
    for (Index i = 0; i < p.value.size(); ++i)
      numeric.data()[i] = (evaluate(p.name, i, step) - evaluate(p.name, i, -step)) / (2.0 * step);
    const Matrix& a = analytic.at(p.name);
    const double scale = std::max({numeric.cwiseAbs().maxCoeff(), a.cwiseAbs().maxCoeff(), 1e-6});
    worst = std::max(worst, (a - numeric).cwiseAbs().maxCoeff() / scale);
  }
  model.params().assign(snapshot);
  return worst;
}

}  // namespace tabsev::harness
