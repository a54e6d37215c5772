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

#include "tabsev/optim.hpp"

#include "tabsev/error.hpp"

namespace tabsev {

void rmsprop_step(ParamStore& params, const Gradients& grads, OptimizerState& state) {
  if (!(state.learning_rate >= 0.0)) throw Error(ErrorKind::kConfigMismatch, "learning rate must be >= 0");
  for (const auto& [name, g] : grads) {
    Parameter& p = params.get(name);
    if (!p.trainable) continue;
    if (g.rows() != p.value.rows() || g.cols() != p.value.cols()) {
      throw Error(ErrorKind::kShapeMismatch, "gradient shape differs for '" + name + "'");
    }
    auto [it, fresh] = state.accumulators.try_emplace(name, Matrix::Zero(g.rows(), g.cols()));
    Matrix& s = it->second;
    s = state.rho * s + (1.0 - state.rho) * g.cwiseAbs2();
    p.value.array() -= state.learning_rate * g.array() / (s.array().sqrt() + state.epsilon);
  }
}

}  // namespace tabsev
