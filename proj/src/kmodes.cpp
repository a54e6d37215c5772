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

#include "tabsev/kmodes.hpp"

#include "tabsev/rng.hpp"

#include <algorithm>
#include <set>

namespace tabsev {

ClusterAssignment assign(const CodeMatrix& data, const ModeSet& modes) {
  if (data.cols() != modes.m())
    throw Error(ErrorKind::kDimensionMismatch, "data has " + std::to_string(data.cols()) + " columns, modes have " +
                                                   std::to_string(modes.m()));
  if (modes.k() == 0) throw Error(ErrorKind::kDimensionMismatch, "no modes");
  ClusterAssignment out;
  out.labels.resize(static_cast<std::size_t>(data.rows()));
  for (Index i = 0; i < data.rows(); ++i) {
    Index best = 0;
    Index best_d = dissimilarity(data.row(i), modes.modes.row(0));
    for (Index c = 1; c < modes.k(); ++c) {
      const Index d = dissimilarity(data.row(i), modes.modes.row(c));
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    out.labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
    out.cost += best_d;
  }
  return out;
}

ModeSet update_modes(const CodeMatrix& data, const Labels& labels, Index k) {
  if (labels.size() != static_cast<std::size_t>(data.rows()))
    throw Error(ErrorKind::kLengthMismatch, "labels do not match rows");
  const int codes = data.size() ? data.maxCoeff() + 1 : 1;
  if (data.size() && data.minCoeff() < 0) throw Error(ErrorKind::kIndexOutOfRange, "negative category code");
  // counts[(cluster * m + column) * codes + code]
  std::vector<Index> counts(static_cast<std::size_t>(k * data.cols() * codes), 0);
  std::vector<Index> sizes(static_cast<std::size_t>(k), 0);
  for (Index i = 0; i < data.rows(); ++i) {
    const int c = labels[static_cast<std::size_t>(i)];
    if (c < 0 || c >= k) throw Error(ErrorKind::kIndexOutOfRange, "label " + std::to_string(c));
    ++sizes[static_cast<std::size_t>(c)];
    for (Index j = 0; j < data.cols(); ++j) ++counts[static_cast<std::size_t>((c * data.cols() + j) * codes + data(i, j))];
  }
  ModeSet out;
  out.modes.resize(k, data.cols());
  for (Index c = 0; c < k; ++c) {
    if (sizes[static_cast<std::size_t>(c)] == 0) throw Error(ErrorKind::kEmptyCluster, "cluster " + std::to_string(c));
    for (Index j = 0; j < data.cols(); ++j) {
      const Index* row = &counts[static_cast<std::size_t>((c * data.cols() + j) * codes)];
      out.modes(c, j) = static_cast<int>(std::max_element(row, row + codes) - row);
    }
  }
  return out;
}

namespace {

// Moves the row farthest from its own mode into each empty cluster and makes
// it that cluster's mode. Only rows from clusters with at least two members
// are eligible, so no cluster empties in the process.
void repair_empty(const CodeMatrix& data, ModeSet& modes, ClusterAssignment& a) {
  const Index k = modes.k();
  std::vector<Index> sizes(static_cast<std::size_t>(k), 0);
  for (int l : a.labels) ++sizes[static_cast<std::size_t>(l)];
  for (Index c = 0; c < k; ++c) {
    if (sizes[static_cast<std::size_t>(c)] > 0) continue;
    Index far = -1, far_d = -1;
    for (Index i = 0; i < data.rows(); ++i) {
      const int own = a.labels[static_cast<std::size_t>(i)];
      if (sizes[static_cast<std::size_t>(own)] < 2) continue;
      const Index d = dissimilarity(data.row(i), modes.modes.row(own));
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    if (far < 0) return;
    const int own = a.labels[static_cast<std::size_t>(far)];
    --sizes[static_cast<std::size_t>(own)];
    ++sizes[static_cast<std::size_t>(c)];
    a.labels[static_cast<std::size_t>(far)] = static_cast<int>(c);
    a.cost -= far_d;
    modes.modes.row(c) = data.row(far);
  }
}

}  // namespace

ClusterAssignment refine(const CodeMatrix& data, ModeSet& modes, int max_iter) {
  if (max_iter < 1) throw Error(ErrorKind::kInvalidSpec, "max_iter must be at least 1");
  ClusterAssignment current = assign(data, modes);
  std::vector<Index> trace{current.cost};
  int iterations = 0;
  bool converged = false;
  while (iterations < max_iter) {
    repair_empty(data, modes, current);
    modes = update_modes(data, current.labels, modes.k());
    ClusterAssignment next = assign(data, modes);
    trace.push_back(next.cost);
    ++iterations;
    const bool same = next.labels == current.labels;
    current = std::move(next);
    if (same) {
      converged = true;
      break;
    }
  }
  current.iterations = iterations;
  current.converged = converged;
  current.cost_trace = std::move(trace);
  return current;
}

ModeSet initial_modes(const CodeMatrix& data, Index k, std::uint64_t seed) {
  if (k < 1) throw Error(ErrorKind::kBadK, "K must be positive");
  Rng rng(seed);
  const auto order = rng.permutation(static_cast<std::size_t>(data.rows()));
  ModeSet out;
  out.modes.resize(k, data.cols());
  std::set<std::vector<int>> chosen;
  Index filled = 0;
  for (std::size_t idx : order) {
    const auto i = static_cast<Index>(idx);
    std::vector<int> row(data.row(i).data(), data.row(i).data() + data.cols());
    if (!chosen.insert(row).second) continue;
    out.modes.row(filled++) = data.row(i);
    if (filled == k) return out;
  }
  throw Error(ErrorKind::kTooFewDistinctRows,
              "K=" + std::to_string(k) + " exceeds " + std::to_string(chosen.size()) + " distinct rows");
}

KModesResult fit(const CodeMatrix& data, Index k, std::uint64_t seed, const KModesOptions& options) {
  if (options.n_init < 1) throw Error(ErrorKind::kInvalidSpec, "n_init must be at least 1");
  KModesResult best;
  for (int r = 0; r < options.n_init; ++r) {
    ModeSet modes = initial_modes(data, k, Rng::mix(seed, static_cast<std::uint64_t>(r)));
    ClusterAssignment a = refine(data, modes, options.max_iter);
    best.restart_costs.push_back(a.cost);
    if (r == 0 || a.cost < best.assignment.cost) {
      best.modes = std::move(modes);
      best.assignment = std::move(a);
      best.best_restart = r;
    }
  }
  return best;
}

CostCurve elbow_curve(const CodeMatrix& data, Index k_min, Index k_max, std::uint64_t seed,
                      const KModesOptions& options) {
  if (k_min < 1 || k_max < k_min) throw Error(ErrorKind::kBadK, "need 1 <= K_min <= K_max");
  CostCurve curve;
  for (Index k = k_min; k <= k_max; ++k) {
    const Index cost = fit(data, k, seed, options).assignment.cost;
    if (!curve.points.empty() && cost > curve.points.back().second)
      curve.warnings.push_back("cost rises from K=" + std::to_string(curve.points.back().first) + " to K=" +
                               std::to_string(k) + "; more restarts may help");
    curve.points.emplace_back(k, cost);
  }
  return curve;
}

std::string cost_curve_csv(const CostCurve& curve) {
  std::string out = "K,cost\n";
  for (const auto& [k, cost] : curve.points) out += std::to_string(k) + "," + std::to_string(cost) + "\n";
  return out;
}

std::vector<int> severity_order(const CodeMatrix& data, const ClusterAssignment& assignment,
                                const std::vector<int>& positive_code_per_column, Index k) {
  if (positive_code_per_column.size() != static_cast<std::size_t>(data.cols()))
    throw Error(ErrorKind::kDimensionMismatch, "one positive code per column required");
  if (assignment.labels.size() != static_cast<std::size_t>(data.rows()))
    throw Error(ErrorKind::kLengthMismatch, "labels do not match rows");
  std::vector<double> total(static_cast<std::size_t>(k), 0.0);
  std::vector<double> size(static_cast<std::size_t>(k), 0.0);
  for (Index i = 0; i < data.rows(); ++i) {
    const auto c = static_cast<std::size_t>(assignment.labels[static_cast<std::size_t>(i)]);
    Index positives = 0;
    for (Index j = 0; j < data.cols(); ++j) positives += data(i, j) == positive_code_per_column[static_cast<std::size_t>(j)];
    total[c] += static_cast<double>(positives);
    size[c] += 1.0;
  }
  std::vector<int> clusters(static_cast<std::size_t>(k));
  for (Index c = 0; c < k; ++c) clusters[static_cast<std::size_t>(c)] = static_cast<int>(c);
  auto mean = [&](int c) { return size[c] > 0 ? total[c] / size[c] : 0.0; };
  std::stable_sort(clusters.begin(), clusters.end(), [&](int a, int b) { return mean(a) < mean(b); });
  std::vector<int> level(static_cast<std::size_t>(k));
  for (std::size_t rank = 0; rank < clusters.size(); ++rank) level[static_cast<std::size_t>(clusters[rank])] = static_cast<int>(rank);
  return level;
}

Labels relabel(const Labels& labels, const std::vector<int>& mapping) {
  Labels out;
  out.reserve(labels.size());
  for (int l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= mapping.size())
      throw Error(ErrorKind::kIndexOutOfRange, "label " + std::to_string(l));
    out.push_back(mapping[static_cast<std::size_t>(l)]);
  }
  return out;
}

}  // namespace tabsev
