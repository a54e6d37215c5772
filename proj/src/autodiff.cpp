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

#include "tabsev/autodiff.hpp"

#include "tabsev/error.hpp"

namespace tabsev {

const Matrix& Var::value() const { return tape_->value(id_); }

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), Matrix(), false, false, nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Tape::variable(Matrix value) {
  nodes_.push_back(Node{std::move(value), Matrix(), true, false, nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(ParamStore& store, const std::string& name) {
  if (auto it = bound_params_.find(name); it != bound_params_.end()) return Var(this, it->second);
  const Parameter& p = store.get(name);
  Var v = p.trainable ? variable(p.value) : constant(p.value);
  bound_params_.emplace(name, v.id());
  return v;
}

Var Tape::record(Matrix value, std::initializer_list<Var> parents, Backward backward) {
  return record(std::move(value), std::vector<Var>(parents), std::move(backward));
}

Var Tape::record(Matrix value, const std::vector<Var>& parents, Backward backward) {
  bool needs = false;
  for (const Var& p : parents) {
    if (p.tape() != this) throw Error(ErrorKind::kShapeMismatch, "operands belong to different tapes");
    needs = needs || nodes_[p.id()].requires_grad;
  }
  nodes_.push_back(Node{std::move(value), Matrix(), needs, false, needs ? std::move(backward) : nullptr});
  return Var(this, nodes_.size() - 1);
}

void Tape::accumulate(std::size_t id, const Matrix& g) {
  Node& n = nodes_[id];
  if (!n.requires_grad) return;
  if (!n.has_grad) {
    n.grad = g;
    n.has_grad = true;
  } else {
    n.grad += g;
  }
}

void Tape::backward(const Var& loss) {
  if (loss.rows() != 1 || loss.cols() != 1) {
    throw Error(ErrorKind::kNonScalarLoss, "loss must be 1x1, got " + std::to_string(loss.rows()) +
                                               "x" + std::to_string(loss.cols()));
  }
  for (auto& n : nodes_) {
    n.has_grad = false;
    n.grad.resize(0, 0);
  }
  accumulate(loss.id(), Matrix::Ones(1, 1));
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.has_grad || !n.backward) continue;
    // parents always precede i, so the closure never touches this node's grad
    Matrix g = std::move(n.grad);
    n.backward(*this, g);
    nodes_[i].grad = std::move(g);
  }
}

Matrix Tape::grad(const Var& v) const {
  const Node& n = nodes_[v.id()];
  if (n.has_grad) return n.grad;
  return Matrix::Zero(n.value.rows(), n.value.cols());
}

Gradients Tape::gradients(const ParamStore& store) const {
  Gradients out;
  for (const auto& p : store) {
    if (!p.trainable) continue;
    auto it = bound_params_.find(p.name);
    if (it != bound_params_.end() && nodes_[it->second].has_grad) {
      out.emplace(p.name, nodes_[it->second].grad);
    } else {
      out.emplace(p.name, Matrix::Zero(p.value.rows(), p.value.cols()));
    }
  }
  return out;
}

}  // namespace tabsev
