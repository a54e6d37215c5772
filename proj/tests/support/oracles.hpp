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

// Independent reference computations used only by tests. Nothing here calls
// into the code paths it checks.

#include "tabsev/autodiff.hpp"
#include "tabsev/types.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <vector>

namespace tabsev::oracle {

/// Simplex projection by trying every support set: for support S the
/// threshold is tau = (sum_S z - 1) / |S|, and S is accepted when exactly
/// the entries of S exceed tau.
inline std::vector<double> simplex_projection_bruteforce(const std::vector<double>& z) {
  const std::size_t n = z.size();
  for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
    double total = 0.0;
    int size = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::size_t{1} << i)) {
        total += z[i];
        ++size;
      }
    }
    const double tau = (total - 1.0) / size;
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      const bool in = mask & (std::size_t{1} << i);
      ok = in ? z[i] > tau : z[i] <= tau;
    }
    if (!ok) continue;
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = std::max(z[i] - tau, 0.0);
    return p;
  }
  return {};
}

/// Builds a scalar loss from leaf variables on a fresh tape.
using LossFn = std::function<Var(Tape&, const std::vector<Var>&)>;

/// Largest per-tensor relative error between reverse-mode gradients and
/// central differences: max|analytic - numeric| / max(max|numeric|, max|analytic|, 1e-6).
/// The floor judges an exactly-zero gradient (e.g. sparsemax with every row
/// one-hot) on absolute error, since central differences of an O(1) loss
/// carry about 1e-11 of rounding.
inline double gradient_check(const LossFn& loss_fn, std::vector<Matrix> inputs, double step = 1e-5) {
  std::vector<Matrix> analytic;
  {
    Tape tape;
    std::vector<Var> vars;
    for (const auto& m : inputs) vars.push_back(tape.variable(m));
    Var loss = loss_fn(tape, vars);
    tape.backward(loss);
    for (const auto& v : vars) analytic.push_back(tape.grad(v));
  }
  auto evaluate = [&](const std::vector<Matrix>& xs) {
    Tape tape;
    std::vector<Var> vars;
    for (const auto& m : xs) vars.push_back(tape.constant(m));
    return loss_fn(tape, vars).value()(0, 0);
  };
  double worst = 0.0;
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    Matrix numeric(inputs[t].rows(), inputs[t].cols());
    for (Index i = 0; i < inputs[t].size(); ++i) {
      const double saved = inputs[t].data()[i];
      inputs[t].data()[i] = saved + step;
      const double up = evaluate(inputs);
      inputs[t].data()[i] = saved - step;
      const double down = evaluate(inputs);
      inputs[t].data()[i] = saved;
      numeric.data()[i] = (up - down) / (2.0 * step);
    }
    const double scale = std::max({numeric.cwiseAbs().maxCoeff(), analytic[t].cwiseAbs().maxCoeff(), 1e-6});
    worst = std::max(worst, (analytic[t] - numeric).cwiseAbs().maxCoeff() / scale);
  }
  return worst;
}

/// Adjusted Rand index from raw pair counts (O(N^2)): a = pairs together in
/// both partitions, b and c = pairs together in each one.
inline double adjusted_rand_pairs(const std::vector<int>& u, const std::vector<int>& v) {
  const std::size_t n = u.size();
  double a = 0, b = 0, c = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool su = u[i] == u[j], sv = v[i] == v[j];
      a += su && sv;
      b += su;
      c += sv;
    }
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  const double expected = b * c / pairs;
  const double max_index = 0.5 * (b + c);
  if (max_index == expected) return 1.0;
  return (a - expected) / (max_index - expected);
}

/// Minimum K-modes cost over every labelling of the rows into k groups (row 0
/// fixed to group 0). A group's cost is, per column, its size minus the count
/// of its most frequent code.
inline Index kmodes_partition_optimum(const CodeMatrix& data, int k) {
  const auto n = static_cast<std::size_t>(data.rows());
  std::vector<int> labels(n, 0);
  Index best = std::numeric_limits<Index>::max();
  while (true) {
    Index cost = 0;
    for (int g = 0; g < k; ++g)
      for (Index j = 0; j < data.cols(); ++j) {
        std::map<int, Index> freq;
        Index size = 0;
        for (std::size_t i = 0; i < n; ++i)
          if (labels[i] == g) {
            ++freq[data(static_cast<Index>(i), j)];
            ++size;
          }
        Index top = 0;
        for (const auto& [code, count] : freq) top = std::max(top, count);
        cost += size - top;
      }
    best = std::min(best, cost);
    std::size_t pos = 1;
    while (pos < n && ++labels[pos] == k) labels[pos++] = 0;
    if (pos >= n) break;
  }
  return best;
}

/// Probability that a random positive outscores a random negative, ties
/// counting one half.
inline double pairwise_auc(const std::vector<double>& scores, const std::vector<int>& positive) {
  double concordant = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!positive[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (positive[j]) continue;
      pairs += 1.0;
      concordant += scores[i] > scores[j] ? 1.0 : scores[i] == scores[j] ? 0.5 : 0.0;
    }
  }
  return concordant / pairs;
}

}  // namespace tabsev::oracle
