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

#include "tabsev/error.hpp"
#include "tabsev/types.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace tabsev {

/// Simple matching distance: the number of positions where the codes differ.
template <typename A, typename B>
Index dissimilarity(const Eigen::MatrixBase<A>& row, const Eigen::MatrixBase<B>& mode) {
  if (row.size() != mode.size())
    throw Error(ErrorKind::kLengthMismatch,
                "lengths " + std::to_string(row.size()) + " and " + std::to_string(mode.size()));
  return (row.derived().array() != mode.derived().array()).count();
}

struct ModeSet {
  /// K x m cluster centres.
  CodeMatrix modes;

  Index k() const { return modes.rows(); }
  Index m() const { return modes.cols(); }
};

struct ClusterAssignment {
  Labels labels;
  Index cost = 0;
  int iterations = 0;
  bool converged = false;
  /// Cost after every assignment pass of the run that produced this result.
  std::vector<Index> cost_trace;
};

struct KModesOptions {
  int n_init = 10;
  int max_iter = 100;
};

struct KModesResult {
  ModeSet modes;
  ClusterAssignment assignment;
  int best_restart = 0;
  std::vector<Index> restart_costs;
};

/// Nearest mode per row, lowest cluster index on ties.
ClusterAssignment assign(const CodeMatrix& data, const ModeSet& modes);

/// Column-wise most frequent code within each cluster, smallest code on ties.
/// Throws kEmptyCluster if a cluster has no rows.
ModeSet update_modes(const CodeMatrix& data, const Labels& labels, Index k);

/// Alternates assign and update from the given modes until the labels stop
/// changing or max_iter update steps have run. A cluster that empties is
/// reseeded with the row farthest from its own mode.
ClusterAssignment refine(const CodeMatrix& data, ModeSet& modes, int max_iter);

/// K distinct rows picked by a seeded shuffle.
ModeSet initial_modes(const CodeMatrix& data, Index k, std::uint64_t seed);

/// Best of n_init restarts by (cost, restart index). Restart r starts from
/// initial_modes(data, k, Rng::mix(seed, r)).
KModesResult fit(const CodeMatrix& data, Index k, std::uint64_t seed, const KModesOptions& options = {});

struct CostCurve {
  std::vector<std::pair<Index, Index>> points;
  std::vector<std::string> warnings;
};

CostCurve elbow_curve(const CodeMatrix& data, Index k_min, Index k_max, std::uint64_t seed,
                      const KModesOptions& options = {});
/// "K,cost" header plus one line per point.
std::string cost_curve_csv(const CostCurve& curve);

/// Maps cluster id to severity level: clusters ranked by the mean number of
/// columns per row equal to that column's positive code (lower index first on
/// equal means). Empty clusters count as zero.
std::vector<int> severity_order(const CodeMatrix& data, const ClusterAssignment& assignment,
                                const std::vector<int>& positive_code_per_column, Index k);
Labels relabel(const Labels& labels, const std::vector<int>& mapping);

}  // namespace tabsev
