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

// Differentiable operations on Tape variables. Every op validates shapes,
// computes its value eagerly and records a backward closure.

#include "tabsev/autodiff.hpp"
#include "tabsev/rng.hpp"

#include <span>
#include <vector>

namespace tabsev {

enum class Mode { kTrain, kInfer };

Var matmul(Var a, Var b);
/// Elementwise sum. `b` may also be a 1 x cols row broadcast over the rows of `a`.
Var add(Var a, Var b);
Var sub(Var a, Var b);
/// Elementwise (Hadamard) product of equal shapes.
Var mul(Var a, Var b);
/// scale * a + shift.
Var affine(Var a, double scale, double shift);
Var relu(Var x);
Var sigmoid(Var x);
/// Gated unit x * sigmoid(x).
Var glu(Var x);

/// axis 0 stacks rows, axis 1 stacks columns.
Var concat(std::span<const Var> parts, int axis);
Var concat(std::initializer_list<Var> parts, int axis);
/// Row-major reinterpretation to a new shape with the same element count.
Var reshape(Var x, Index rows, Index cols);
/// (groups * n) x d  ->  groups x (n * d), keeping each group's rows in order.
Var flatten(Var x, Index groups);
Var slice_cols(Var x, Index start, Index count);
/// Row i of the result is row codes[i] of the table.
Var embedding_lookup(Var table, std::span<const int> codes);

/// axis 1 normalises each row, axis 0 each column.
Var softmax(Var z, int axis = 1);
Var sparsemax(Var z, int axis = 1);

/// Per-row normalisation over the feature axis, then gamma * x_hat + beta.
/// gamma and beta are 1 x cols.
Var layer_norm(Var x, Var gamma, Var beta, double eps = 1e-5);

/// Running statistics plus the constants of one batch-normalisation layer.
/// The matrices are owned elsewhere (typically a ParamStore).
struct NormState {
  Matrix& running_mean;
  Matrix& running_var;
  double eps = 1e-5;
  double momentum = 0.99;
};

/// Train mode normalises each column with the batch mean and population
/// variance and folds them into the running estimates; infer mode uses the
/// running estimates.
Var batch_norm(Var x, Var gamma, Var beta, NormState state, Mode mode);

/// Inverted dropout: train mode keeps each element with probability 1 - rate
/// and scales survivors by 1 / (1 - rate); infer mode is the identity.
Var dropout(Var x, double rate, Mode mode, Rng& rng);

/// Scaled dot-product attention for `groups` independent sequences stacked
/// row-wise. q and k are (groups * n) x d_k, v is (groups * n) x d_v; both
/// widths are split evenly across heads. Each head computes
/// softmax(Q K^T / sqrt(d_head)) V over its own sequence; head outputs are
/// concatenated column-wise. If `weights` is given it receives the
/// attention matrices stacked as (groups * heads * n) x n.
Var scaled_dot_attention(Var q, Var k, Var v, Index groups, Index heads, Matrix* weights = nullptr);

Var sum(Var x);
Var mean(Var x);

/// Mean of -[y ln p + (1 - y) ln(1 - p)] with p clamped to [1e-7, 1 - 1e-7].
Var binary_cross_entropy(Var p, const Matrix& y);
/// Mean over rows of -sum_c y_c ln p_c with the same clamp. Rows of p must
/// sum to one within 1e-6.
Var categorical_cross_entropy(Var p, const Matrix& y);

enum class PenaltyForm { kL1, kL2 };
/// lambda * sum|w| or lambda * 0.5 * sum w^2 over the store's weight tensors.
Var penalty(Tape& tape, ParamStore& store, PenaltyForm form, double lambda);

inline constexpr double kProbabilityClamp = 1e-7;

}  // namespace tabsev
