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

// Parameterised layers. Each layer owns only parameter *names*; values live in
// a ParamStore so one model state can be checkpointed, copied and restored.

#include "tabsev/ops.hpp"

#include <span>
#include <string>

namespace tabsev {

struct Dense {
  std::string name;
  Index in = 0;
  Index out = 0;
  bool use_bias = true;

  void build(ParamStore& store, Rng& rng) const;
  Var operator()(Tape& tape, ParamStore& store, Var x) const;
  std::string kernel() const { return name + "/kernel"; }
  std::string bias() const { return name + "/bias"; }
};

struct Embedding {
  std::string name;
  Index vocab = 0;
  Index dim = 0;

  void build(ParamStore& store, Rng& rng) const;
  Var operator()(Tape& tape, ParamStore& store, std::span<const int> codes) const;
  std::string table() const { return name + "/table"; }
};

struct LayerNorm {
  std::string name;
  Index dim = 0;
  double eps = 1e-5;

  void build(ParamStore& store) const;
  Var operator()(Tape& tape, ParamStore& store, Var x) const;
};

struct BatchNorm {
  std::string name;
  Index dim = 0;
  double eps = 1e-5;
  double momentum = 0.99;

  void build(ParamStore& store) const;
  Var operator()(Tape& tape, ParamStore& store, Var x, Mode mode) const;
};

/// Self-attention over `groups` stacked sequences with learned query, key,
/// value and output projections (dim x dim each, split across heads).
struct MultiHeadAttention {
  std::string name;
  Index dim = 0;
  Index heads = 1;

  void build(ParamStore& store, Rng& rng) const;
  Var operator()(Tape& tape, ParamStore& store, Var x, Index groups, Matrix* weights = nullptr) const;

  Dense query() const { return {name + "/query", dim, dim}; }
  Dense key() const { return {name + "/key", dim, dim}; }
  Dense value() const { return {name + "/value", dim, dim}; }
  Dense output() const { return {name + "/output", dim, dim}; }
};

}  // namespace tabsev
