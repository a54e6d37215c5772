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

#include "tabsev/params.hpp"
#include "tabsev/types.hpp"

#include <functional>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace tabsev {

class Tape;

/// Handle to a node on a Tape. Cheap to copy; valid while its tape lives.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  std::size_t id() const { return id_; }
  Tape* tape() const { return tape_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

using Gradients = std::map<std::string, Matrix>;

/// Records a computation as it runs so gradients can be replayed in reverse.
///
/// Nodes are appended in evaluation order, so every parent precedes its
/// children and reverse insertion order is a valid topological replay. A node
/// only keeps a backward closure when some ancestor needs a gradient.
class Tape {
 public:
  /// Propagates the incoming gradient of one node into its parents.
  using Backward = std::function<void(Tape&, const Matrix& grad_out)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  /// Unnamed leaf that receives a gradient.
  Var variable(Matrix value);
  /// Leaf bound to a stored parameter; repeated calls return the same node,
  /// so shared weights accumulate their gradient in one place.
  Var parameter(ParamStore& store, const std::string& name);

  Var record(Matrix value, std::initializer_list<Var> parents, Backward backward);
  Var record(Matrix value, const std::vector<Var>& parents, Backward backward);

  const Matrix& value(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  bool requires_grad(const Var& v) const { return requires_grad(v.id()); }
  /// Adds g into the gradient of node id (no-op for constants).
  void accumulate(std::size_t id, const Matrix& g);

  /// Reverse sweep from a scalar loss. Throws NonScalarLoss otherwise.
  void backward(const Var& loss);

  /// Gradient of a node after backward(); zero if it was never reached.
  Matrix grad(const Var& v) const;

  /// Gradients for every trainable parameter of the store; parameters the
  /// loss never touched get zeros.
  Gradients gradients(const ParamStore& store) const;

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    bool has_grad = false;
    Backward backward;
  };

  std::vector<Node> nodes_;
  std::unordered_map<std::string, std::size_t> bound_params_;
};

}  // namespace tabsev
