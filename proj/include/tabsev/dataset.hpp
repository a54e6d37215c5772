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

#include "json.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace tabsev {

enum class ColumnKind { kCategorical, kNumeric, kTargetSource };
enum class TargetGroup { kMobility, kAdl, kIadl };

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::kCategorical;
  std::optional<TargetGroup> group;

  bool operator==(const ColumnSpec&) const = default;
};

struct FeatureSchema {
  std::vector<ColumnSpec> columns;

  /// Throws kInvalidSchema on duplicate names or misplaced groups.
  void validate() const;
  std::optional<std::size_t> find(const std::string& name) const;
  std::vector<std::string> names(ColumnKind kind) const;
  std::size_t count(ColumnKind kind) const;

  static FeatureSchema from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;

  bool operator==(const FeatureSchema&) const = default;
};

std::string_view to_string(ColumnKind kind);
std::string_view to_string(TargetGroup group);

/// 24 categorical features, age, and the 23 activity questions
/// (10 mobility, 6 ADL, 7 IADL).
FeatureSchema default_schema();

/// A missing cell, a category token, or a number.
using Cell = std::variant<std::monostate, std::string, double>;

inline bool is_missing(const Cell& cell) { return std::holds_alternative<std::monostate>(cell); }

/// Column-major table. Categorical and target_source cells hold tokens,
/// numeric cells hold doubles; any cell may be missing.
class DataTable {
 public:
  DataTable() = default;
  /// Throws kTypeMismatch if a cell does not fit its column kind and
  /// kShapeMismatch if column lengths differ.
  DataTable(FeatureSchema schema, std::vector<std::vector<Cell>> columns);

  const FeatureSchema& schema() const { return schema_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return columns_.size(); }
  const Cell& at(std::size_t row, std::size_t col) const { return columns_[col][row]; }
  const std::vector<Cell>& column(std::size_t col) const { return columns_[col]; }
  const std::vector<Cell>& column(const std::string& name) const;
  /// N x m, true where the cell is missing.
  std::vector<std::vector<bool>> missing_mask() const;
  std::size_t missing_count() const;

  bool operator==(const DataTable&) const = default;

 private:
  FeatureSchema schema_;
  std::vector<std::vector<Cell>> columns_;
  std::size_t rows_ = 0;
};

std::vector<std::string> default_missing_tokens();

/// Header must contain every schema column (any order); extra columns are
/// ignored.
DataTable load_csv(const std::filesystem::path& path, const FeatureSchema& schema,
                   const std::vector<std::string>& missing_tokens = default_missing_tokens());
DataTable parse_table(const std::string& text, const FeatureSchema& schema,
                      const std::vector<std::string>& missing_tokens = default_missing_tokens());
/// Missing cells are written as empty fields, numbers with %.17g.
std::string table_csv(const DataTable& table);

/// Numeric gaps get the observed mean, categorical gaps the most frequent
/// observed token (lexicographically smallest on ties).
DataTable impute(const DataTable& table);

struct ContStat {
  double mean = 0.0;
  double sd = 1.0;
  bool operator==(const ContStat&) const = default;
};

using Vocabulary = std::vector<std::string>;

struct EncodedMatrix {
  std::vector<std::string> cat_names;
  CodeMatrix cat_codes;
  std::vector<Vocabulary> vocabularies;

  std::vector<std::string> cont_names;
  Matrix cont_values;
  std::vector<ContStat> cont_stats;

  std::vector<std::string> target_names;
  CodeMatrix target_codes;
  std::vector<Vocabulary> target_vocabularies;

  Index rows() const { return std::max({cat_codes.rows(), cont_values.rows(), target_codes.rows()}); }
  /// Row subset in the given order; vocabularies and stats are shared.
  EncodedMatrix take(const std::vector<std::size_t>& rows) const;
};

/// Per-column lexicographic vocabularies. Throws kNotImputed if any cell is
/// missing.
EncodedMatrix label_encode(const DataTable& table);
/// Encodes with fixed vocabularies (e.g. from training). Unknown tokens throw
/// kTypeMismatch.
EncodedMatrix encode_with(const DataTable& table, const std::vector<Vocabulary>& vocabularies,
                          const std::vector<Vocabulary>& target_vocabularies);

/// Population mean and standard deviation of each numeric column.
std::vector<ContStat> column_stats(const Matrix& values);
/// (x - mean) / sd per numeric column with sd < 1e-12 replaced by 1. Uses
/// the supplied stats or, if absent, the matrix's own.
EncodedMatrix standardize(const EncodedMatrix& matrix, const std::optional<std::vector<ContStat>>& stats = {});

Matrix one_hot_targets(const Labels& labels, int classes);

struct SplitPlan {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::vector<std::vector<std::size_t>> folds;
  std::uint64_t seed = 0;
};

/// Seeded shuffle; the first floor(n (1 - test_fraction)) indices train.
SplitPlan split(std::size_t n, double test_fraction, std::uint64_t seed);
/// Shuffles the training indices and deals them into K folds whose sizes
/// differ by at most one (the first n mod K folds get the extra index).
SplitPlan kfold(SplitPlan plan, std::size_t k);

std::vector<double> class_marginals(const Labels& labels, int classes = 0);

/// Disability levels a synthetic respondent can fall into; level 0 is none.
struct SynthSpec {
  std::size_t n_rows = 11219;
  std::vector<double> level_proportions{0.8443, 0.1557};
  /// levels x 23 probabilities of answering yes.
  Matrix response_prob;
  /// One entry per categorical feature; missing entries are zero.
  std::vector<double> signal_strength;
  /// Categories per feature; missing entries default to 3.
  std::vector<int> feature_cardinality;
  /// Chance that a feature cell is replaced by a missing token.
  double missing_rate = 0.0;
  std::uint64_t seed = 0;
  FeatureSchema schema = default_schema();

  void validate() const;
};

/// Default response matrix. Level l answers yes with probability 0.85 on the
/// first round(23 l / (levels - 1)) questions (mobility first, then ADL, then
/// IADL) and 0.05 elsewhere, so level 0 rarely reports difficulty and the top
/// level usually does everywhere.
Matrix default_response_prob(std::size_t levels);
/// Spec with the survey class shares for 2, 3 or 4 levels and the first
/// `informative` features carrying `strength` signal.
SynthSpec default_synth_spec(std::size_t levels, std::size_t n_rows, std::uint64_t seed, std::size_t informative = 6,
                             double strength = 0.5);

struct SynthResult {
  DataTable table;
  Labels levels;
};

SynthResult synth_generate(const SynthSpec& spec);

/// Category data with planted modes: each row copies its cluster's mode in
/// each attribute with probability `purity`, otherwise draws uniformly from
/// the remaining categories.
struct PlantedClusters {
  CodeMatrix data;
  Labels truth;
  CodeMatrix modes;
};
PlantedClusters planted_clusters(std::size_t n, std::size_t m, std::size_t k, double purity, int categories,
                                 std::uint64_t seed);

/// Codes CSV (header = column names) plus a JSON sidecar with vocabularies
/// and numeric statistics.
void write_encoded(const EncodedMatrix& matrix, const std::filesystem::path& csv_path,
                   const std::filesystem::path& sidecar_path);
nlohmann::json encoding_json(const EncodedMatrix& matrix);

}  // namespace tabsev
