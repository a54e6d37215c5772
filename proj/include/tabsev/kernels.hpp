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

// Row-wise activation kernels shared by the differentiable ops and by callers
// that only need values (metrics, reports). All take any Eigen expression.

#include "tabsev/types.hpp"

#include <algorithm>
#include <cmath>
#include <concepts>
#include <functional>
#include <vector>

namespace tabsev::kernels {

template <typename Derived>
MatrixX<typename Derived::Scalar> softmax_rows(const Eigen::MatrixBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  MatrixX<Scalar> out(z.rows(), z.cols());
  for (Index r = 0; r < z.rows(); ++r) {
    const Scalar peak = z.row(r).maxCoeff();
    out.row(r) = (z.row(r).array() - peak).exp().matrix();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

/// Euclidean projection of one vector onto the probability simplex.
/// Sort descending, find the largest support size k with
/// 1 + k z_(k) > sum_{j<=k} z_(j), then tau = (sum_{j<=k} z_(j) - 1) / k.
template <typename Derived>
RowVectorX<typename Derived::Scalar> sparsemax(const Eigen::MatrixBase<Derived>& z,
                                               typename Derived::Scalar* tau_out = nullptr) {
  using Scalar = typename Derived::Scalar;
  const Index n = z.size();
  std::vector<Scalar> sorted(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) sorted[static_cast<std::size_t>(i)] = z(i);
  std::sort(sorted.begin(), sorted.end(), std::greater<Scalar>());
  Scalar cumulative = 0;
  Scalar support_sum = 0;
  Index support = 0;
  for (Index k = 0; k < n; ++k) {
    cumulative += sorted[k];
    if (Scalar(1) + Scalar(k + 1) * sorted[k] > cumulative) {
      support = k + 1;
      support_sum = cumulative;
    }
  }
  const Scalar tau = (support_sum - Scalar(1)) / Scalar(support);
  if (tau_out) *tau_out = tau;
  RowVectorX<Scalar> out(n);
  for (Index i = 0; i < n; ++i) out(i) = std::max(z(i) - tau, Scalar(0));
  return out;
}

template <typename Derived>
MatrixX<typename Derived::Scalar> sparsemax_rows(const Eigen::MatrixBase<Derived>& z) {
  MatrixX<typename Derived::Scalar> out(z.rows(), z.cols());
  for (Index r = 0; r < z.rows(); ++r) {
    RowVectorX<typename Derived::Scalar> row = z.row(r);
    out.row(r) = sparsemax(row);
  }
  return out;
}

template <std::floating_point Scalar>
Scalar sigmoid(Scalar x) {
  // split on sign so exp never overflows
  if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-x));
  const Scalar e = std::exp(x);
  return e / (Scalar(1) + e);
}

template <typename Derived>
MatrixX<typename Derived::Scalar> sigmoid(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return x.unaryExpr([](Scalar v) { return sigmoid(v); });
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& x) {
  return x.allFinite();
}

/// Index of the row maximum; the lowest index wins on exact ties.
template <typename Derived>
std::vector<int> argmax_rows(const Eigen::MatrixBase<Derived>& x) {
  std::vector<int> out(static_cast<std::size_t>(x.rows()));
  for (Index r = 0; r < x.rows(); ++r) {
    Index best = 0;
    for (Index c = 1; c < x.cols(); ++c) {
      if (x(r, c) > x(r, best)) best = c;
    }
    out[static_cast<std::size_t>(r)] = static_cast<int>(best);
  }
  return out;
}

}  // namespace tabsev::kernels
