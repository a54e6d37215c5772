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

#include "tabsev/layers.hpp"

#include "tabsev/error.hpp"

namespace tabsev {

void Dense::build(ParamStore& store, Rng& rng) const {
  store.add(kernel(), glorot_uniform(in, out, rng), ParamRole::kWeight);
  if (use_bias) store.add(bias(), Matrix::Zero(1, out), ParamRole::kBias);
}

Var Dense::operator()(Tape& tape, ParamStore& store, Var x) const {
  Var y = matmul(x, tape.parameter(store, kernel()));
  return use_bias ? add(y, tape.parameter(store, bias())) : y;
}

void Embedding::build(ParamStore& store, Rng& rng) const {
  store.add(table(), glorot_uniform(vocab, dim, rng), ParamRole::kWeight);
}

Var Embedding::operator()(Tape& tape, ParamStore& store, std::span<const int> codes) const {
  return embedding_lookup(tape.parameter(store, table()), codes);
}

void LayerNorm::build(ParamStore& store) const {
  store.add(name + "/gamma", Matrix::Ones(1, dim), ParamRole::kScale);
  store.add(name + "/beta", Matrix::Zero(1, dim), ParamRole::kShift);
}

Var LayerNorm::operator()(Tape& tape, ParamStore& store, Var x) const {
  return layer_norm(x, tape.parameter(store, name + "/gamma"), tape.parameter(store, name + "/beta"), eps);
}

void BatchNorm::build(ParamStore& store) const {
  store.add(name + "/gamma", Matrix::Ones(1, dim), ParamRole::kScale);
  store.add(name + "/beta", Matrix::Zero(1, dim), ParamRole::kShift);
  store.add(name + "/moving_mean", Matrix::Zero(1, dim), ParamRole::kRunningStat);
  store.add(name + "/moving_var", Matrix::Ones(1, dim), ParamRole::kRunningStat);
}

Var BatchNorm::operator()(Tape& tape, ParamStore& store, Var x, Mode mode) const {
  NormState state{store.value(name + "/moving_mean"), store.value(name + "/moving_var"), eps, momentum};
  return batch_norm(x, tape.parameter(store, name + "/gamma"), tape.parameter(store, name + "/beta"), state, mode);
}

void MultiHeadAttention::build(ParamStore& store, Rng& rng) const {
  if (heads < 1 || dim % heads != 0) {
    throw Error(ErrorKind::kHeadDivisibility,
                name + ": dim " + std::to_string(dim) + " not divisible by " + std::to_string(heads) + " heads");
  }
  query().build(store, rng);
  key().build(store, rng);
  value().build(store, rng);
  output().build(store, rng);
}

Var MultiHeadAttention::operator()(Tape& tape, ParamStore& store, Var x, Index groups, Matrix* weights) const {
  Var q = query()(tape, store, x);
  Var k = key()(tape, store, x);
  Var v = value()(tape, store, x);
  return output()(tape, store, scaled_dot_attention(q, k, v, groups, heads, weights));
}

}  // namespace tabsev
