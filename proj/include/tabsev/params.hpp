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

#include "tabsev/rng.hpp"
#include "tabsev/types.hpp"

#include <string>
#include <unordered_map>
#include <vector>

namespace tabsev {

/// What a stored tensor is for. Penalties apply to weights only; running
/// statistics are state, not trainable parameters.
enum class ParamRole { kWeight, kBias, kScale, kShift, kRunningStat };

struct Parameter {
  std::string name;
  Matrix value;
  ParamRole role = ParamRole::kWeight;
  bool trainable = true;
};

/// Named tensors of one model in creation order. Names are unique and shapes
/// never change after creation.
class ParamStore {
 public:
  Parameter& add(std::string name, Matrix value, ParamRole role);
  bool contains(const std::string& name) const { return index_.count(name) > 0; }
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  Matrix& value(const std::string& name) { return get(name).value; }
  const Matrix& value(const std::string& name) const { return get(name).value; }

  /// Overwrite values from another store with identical names and shapes.
  void assign(const ParamStore& other);

  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count(bool trainable_only = true) const;
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  bool operator==(const ParamStore& other) const;

 private:
  std::vector<Parameter> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Uniform in +-sqrt(6 / (fan_in + fan_out)).
Matrix glorot_uniform(Index fan_in, Index fan_out, Rng& rng);

}  // namespace tabsev
