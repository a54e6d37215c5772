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

#include "tabsev/params.hpp"

#include "tabsev/error.hpp"

#include <cmath>

namespace tabsev {

Parameter& ParamStore::add(std::string name, Matrix value, ParamRole role) {
  if (contains(name)) {
    throw Error(ErrorKind::kConfigMismatch, "duplicate parameter name '" + name + "'");
  }
  index_.emplace(name, params_.size());
  const bool trainable = role != ParamRole::kRunningStat;
  params_.push_back(Parameter{std::move(name), std::move(value), role, trainable});
  return params_.back();
}

Parameter& ParamStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error(ErrorKind::kConfigMismatch, "unknown parameter '" + name + "'");
  return params_[it->second];
}

const Parameter& ParamStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error(ErrorKind::kConfigMismatch, "unknown parameter '" + name + "'");
  return params_[it->second];
}

void ParamStore::assign(const ParamStore& other) {
  for (const auto& p : other) {
    Parameter& mine = get(p.name);
    if (mine.value.rows() != p.value.rows() || mine.value.cols() != p.value.cols()) {
      throw Error(ErrorKind::kShapeMismatch, "shape differs for '" + p.name + "'");
    }
    mine.value = p.value;
  }
}

std::size_t ParamStore::scalar_count(bool trainable_only) const {
  std::size_t n = 0;
  for (const auto& p : params_) {
    if (!trainable_only || p.trainable) n += static_cast<std::size_t>(p.value.size());
  }
  return n;
}

bool ParamStore::operator==(const ParamStore& other) const {
  if (params_.size() != other.params_.size()) return false;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto& a = params_[i];
    const auto& b = other.params_[i];
    if (a.name != b.name || a.role != b.role) return false;
    if (a.value.rows() != b.value.rows() || a.value.cols() != b.value.cols()) return false;
    if (a.value != b.value) return false;
  }
  return true;
}

Matrix glorot_uniform(Index fan_in, Index fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Matrix w(fan_in, fan_out);
  for (Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-limit, limit);
  return w;
}

}  // namespace tabsev
