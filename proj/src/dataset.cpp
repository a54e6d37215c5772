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

#include "tabsev/dataset.hpp"

#include "tabsev/error.hpp"
#include "tabsev/io.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace tabsev {

namespace {

constexpr double kSdFloor = 1e-12;

ColumnKind kind_from_string(const std::string& s) {
  if (s == "categorical") return ColumnKind::kCategorical;
  if (s == "numeric") return ColumnKind::kNumeric;
  if (s == "target_source") return ColumnKind::kTargetSource;
  throw Error(ErrorKind::kInvalidSchema, "unknown column kind '" + s + "'");
}

TargetGroup group_from_string(const std::string& s) {
  if (s == "mobility") return TargetGroup::kMobility;
  if (s == "adl") return TargetGroup::kAdl;
  if (s == "iadl") return TargetGroup::kIadl;
  throw Error(ErrorKind::kInvalidSchema, "unknown target group '" + s + "'");
}

bool is_token_column(ColumnKind kind) { return kind != ColumnKind::kNumeric; }

std::optional<double> parse_number(const std::string& s) {
  double value = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && last[-1] == ' ') --last;
  if (first < last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || first == last) return std::nullopt;
  return value;
}

CodeMatrix encode_columns(const DataTable& table, ColumnKind kind, const std::vector<Vocabulary>& vocabularies) {
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < table.cols(); ++c)
    if (table.schema().columns[c].kind == kind) cols.push_back(c);
  if (vocabularies.size() != cols.size())
    throw Error(ErrorKind::kDimensionMismatch, "expected " + std::to_string(cols.size()) + " vocabularies, got " +
                                                   std::to_string(vocabularies.size()));
  CodeMatrix codes(static_cast<Index>(table.rows()), static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    const Vocabulary& vocab = vocabularies[j];
    const std::string& name = table.schema().columns[cols[j]].name;
    for (std::size_t r = 0; r < table.rows(); ++r) {
      const Cell& cell = table.at(r, cols[j]);
      if (is_missing(cell)) throw Error(ErrorKind::kNotImputed, "missing cell in column '" + name + "'");
      const std::string& token = std::get<std::string>(cell);
      auto it = std::lower_bound(vocab.begin(), vocab.end(), token);
      if (it == vocab.end() || *it != token)
        throw Error(ErrorKind::kTypeMismatch, "category '" + token + "' of column '" + name + "' not in vocabulary");
      codes(static_cast<Index>(r), static_cast<Index>(j)) = static_cast<int>(it - vocab.begin());
    }
  }
  return codes;
}

std::vector<Vocabulary> build_vocabularies(const DataTable& table, ColumnKind kind) {
  std::vector<Vocabulary> out;
  for (std::size_t c = 0; c < table.cols(); ++c) {
    if (table.schema().columns[c].kind != kind) continue;
    std::set<std::string> tokens;
    for (const Cell& cell : table.column(c)) {
      if (is_missing(cell))
        throw Error(ErrorKind::kNotImputed, "missing cell in column '" + table.schema().columns[c].name + "'");
      tokens.insert(std::get<std::string>(cell));
    }
    out.emplace_back(tokens.begin(), tokens.end());
  }
  return out;
}

}  // namespace

std::string_view to_string(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::kCategorical:
      return "categorical";
    case ColumnKind::kNumeric:
      return "numeric";
    case ColumnKind::kTargetSource:
      return "target_source";
  }
  return "unknown";
}

std::string_view to_string(TargetGroup group) {
  switch (group) {
    case TargetGroup::kMobility:
      return "mobility";
    case TargetGroup::kAdl:
      return "adl";
    case TargetGroup::kIadl:
      return "iadl";
  }
  return "unknown";
}

void FeatureSchema::validate() const {
  std::unordered_set<std::string> seen;
  for (const auto& col : columns) {
    if (col.name.empty()) throw Error(ErrorKind::kInvalidSchema, "empty column name");
    if (!seen.insert(col.name).second) throw Error(ErrorKind::kInvalidSchema, "duplicate column '" + col.name + "'");
    const bool target = col.kind == ColumnKind::kTargetSource;
    if (target != col.group.has_value())
      throw Error(ErrorKind::kInvalidSchema, "column '" + col.name + "': only target_source columns carry a group");
  }
}

std::optional<std::size_t> FeatureSchema::find(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].name == name) return i;
  return std::nullopt;
}

std::vector<std::string> FeatureSchema::names(ColumnKind kind) const {
  std::vector<std::string> out;
  for (const auto& col : columns)
    if (col.kind == kind) out.push_back(col.name);
  return out;
}

std::size_t FeatureSchema::count(ColumnKind kind) const {
  return static_cast<std::size_t>(
      std::count_if(columns.begin(), columns.end(), [&](const ColumnSpec& c) { return c.kind == kind; }));
}

FeatureSchema FeatureSchema::from_json(const nlohmann::json& doc) {
  FeatureSchema schema;
  if (!doc.is_object() || !doc.contains("columns") || !doc["columns"].is_array())
    throw Error(ErrorKind::kInvalidSchema, "schema needs a 'columns' array");
  for (const auto& entry : doc["columns"]) {
    if (!entry.is_object() || !entry.contains("name") || !entry.contains("kind"))
      throw Error(ErrorKind::kInvalidSchema, "each column needs 'name' and 'kind'");
    ColumnSpec col;
    col.name = entry["name"].get<std::string>();
    col.kind = kind_from_string(entry["kind"].get<std::string>());
    if (entry.contains("group") && !entry["group"].is_null()) col.group = group_from_string(entry["group"]);
    schema.columns.push_back(std::move(col));
  }
  schema.validate();
  return schema;
}

nlohmann::json FeatureSchema::to_json() const {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& col : columns) {
    nlohmann::json entry{{"name", col.name}, {"kind", std::string(to_string(col.kind))}};
    if (col.group) entry["group"] = std::string(to_string(*col.group));
    cols.push_back(std::move(entry));
  }
  return {{"columns", cols}};
}

FeatureSchema default_schema() {
  static const char* const kFeatures[] = {
      "sex",          "marital_status", "employment_status", "education",          "ever_smoked",
      "still_smoking", "alcohol",       "vigorous_activity", "moderate_activity",  "mild_activity",
      "urinary_incontinence", "high_blood_pressure", "hearing", "eyesight",        "close_sight",
      "parkinsons",   "psychiatric",    "dementia",          "chest_pain",         "public_transport",
      "diabetes",     "arthritis",      "lung_disease",      "self_rated_health"};
  static const char* const kMobility[] = {
      "walking_100_yards",          "sitting_two_hours",        "getting_up_from_chair",
      "climbing_several_flights",   "climbing_one_flight",      "stooping_kneeling_crouching",
      "reaching_above_shoulder",    "pulling_pushing_large_objects", "lifting_carrying_10_pounds",
      "picking_up_coin"};
  static const char* const kAdl[] = {"dressing", "walking_across_room", "bathing",
                                     "eating",   "getting_in_out_of_bed", "using_toilet"};
  static const char* const kIadl[] = {"using_map",       "preparing_hot_meal", "shopping_groceries",
                                      "telephone_calls", "taking_medications", "house_garden_work",
                                      "managing_money"};
  FeatureSchema schema;
  for (const char* name : kFeatures) schema.columns.push_back({name, ColumnKind::kCategorical, std::nullopt});
  schema.columns.push_back({"age", ColumnKind::kNumeric, std::nullopt});
  for (const char* name : kMobility) schema.columns.push_back({name, ColumnKind::kTargetSource, TargetGroup::kMobility});
  for (const char* name : kAdl) schema.columns.push_back({name, ColumnKind::kTargetSource, TargetGroup::kAdl});
  for (const char* name : kIadl) schema.columns.push_back({name, ColumnKind::kTargetSource, TargetGroup::kIadl});
  return schema;
}

DataTable::DataTable(FeatureSchema schema, std::vector<std::vector<Cell>> columns)
    : schema_(std::move(schema)), columns_(std::move(columns)) {
  schema_.validate();
  if (columns_.size() != schema_.columns.size())
    throw Error(ErrorKind::kShapeMismatch, "schema has " + std::to_string(schema_.columns.size()) + " columns, got " +
                                               std::to_string(columns_.size()));
  rows_ = columns_.empty() ? 0 : columns_.front().size();
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    const ColumnSpec& spec = schema_.columns[c];
    if (columns_[c].size() != rows_) throw Error(ErrorKind::kShapeMismatch, "ragged column '" + spec.name + "'");
    const bool tokens = is_token_column(spec.kind);
    for (const Cell& cell : columns_[c]) {
      if (is_missing(cell)) continue;
      if (tokens != std::holds_alternative<std::string>(cell))
        throw Error(ErrorKind::kTypeMismatch, "cell does not match kind of column '" + spec.name + "'");
    }
  }
}

const std::vector<Cell>& DataTable::column(const std::string& name) const {
  auto idx = schema_.find(name);
  if (!idx) throw Error(ErrorKind::kMissingColumn, "no column '" + name + "'");
  return columns_[*idx];
}

std::vector<std::vector<bool>> DataTable::missing_mask() const {
  std::vector<std::vector<bool>> mask(rows_, std::vector<bool>(columns_.size(), false));
  for (std::size_t c = 0; c < columns_.size(); ++c)
    for (std::size_t r = 0; r < rows_; ++r) mask[r][c] = is_missing(columns_[c][r]);
  return mask;
}

std::size_t DataTable::missing_count() const {
  std::size_t n = 0;
  for (const auto& col : columns_)
    for (const Cell& cell : col) n += is_missing(cell);
  return n;
}

std::vector<std::string> default_missing_tokens() { return {"", "refusal", "dont_know", "not_applicable"}; }

DataTable parse_table(const std::string& text, const FeatureSchema& schema,
                      const std::vector<std::string>& missing_tokens) {
  schema.validate();
  const auto records = parse_csv(text);
  if (records.empty()) throw Error(ErrorKind::kMissingColumn, "CSV has no header row");
  const auto& header = records.front();
  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < header.size(); ++i)
    if (!position.emplace(header[i], i).second)
      throw Error(ErrorKind::kDuplicateHeader, "header repeats '" + header[i] + "'");
  std::vector<std::size_t> source;
  for (const auto& col : schema.columns) {
    auto it = position.find(col.name);
    if (it == position.end()) throw Error(ErrorKind::kMissingColumn, "header lacks '" + col.name + "'");
    source.push_back(it->second);
  }
  const std::unordered_set<std::string> missing(missing_tokens.begin(), missing_tokens.end());
  std::vector<std::vector<Cell>> columns(schema.columns.size());
  for (auto& col : columns) col.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& record = records[r];
    if (record.size() != header.size())
      throw Error(ErrorKind::kTypeMismatch, "row " + std::to_string(r) + " has " + std::to_string(record.size()) +
                                                " fields, header has " + std::to_string(header.size()));
    for (std::size_t c = 0; c < schema.columns.size(); ++c) {
      const std::string& field = record[source[c]];
      if (missing.count(field)) {
        columns[c].emplace_back(std::monostate{});
      } else if (schema.columns[c].kind == ColumnKind::kNumeric) {
        auto value = parse_number(field);
        if (!value)
          throw Error(ErrorKind::kTypeMismatch,
                      "row " + std::to_string(r) + ", column '" + schema.columns[c].name + "': '" + field + "'");
        columns[c].emplace_back(*value);
      } else {
        columns[c].emplace_back(field);
      }
    }
  }
  return DataTable(schema, std::move(columns));
}

DataTable load_csv(const std::filesystem::path& path, const FeatureSchema& schema,
                   const std::vector<std::string>& missing_tokens) {
  return parse_table(read_file(path), schema, missing_tokens);
}

std::string table_csv(const DataTable& table) {
  std::vector<std::string> fields;
  for (const auto& col : table.schema().columns) fields.push_back(col.name);
  std::string out = csv_line(fields);
  for (std::size_t r = 0; r < table.rows(); ++r) {
    for (std::size_t c = 0; c < table.cols(); ++c) {
      const Cell& cell = table.at(r, c);
      if (is_missing(cell))
        fields[c].clear();
      else if (auto* s = std::get_if<std::string>(&cell))
        fields[c] = *s;
      else
        fields[c] = format_double(std::get<double>(cell));
    }
    out += csv_line(fields);
  }
  return out;
}

DataTable impute(const DataTable& table) {
  std::vector<std::vector<Cell>> columns;
  for (std::size_t c = 0; c < table.cols(); ++c) {
    std::vector<Cell> col = table.column(c);
    const ColumnSpec& spec = table.schema().columns[c];
    Cell fill;
    if (spec.kind == ColumnKind::kNumeric) {
      double total = 0.0;
      std::size_t observed = 0;
      for (const Cell& cell : col)
        if (!is_missing(cell)) {
          total += std::get<double>(cell);
          ++observed;
        }
      if (observed == 0 && !col.empty()) throw Error(ErrorKind::kAllMissingColumn, "column '" + spec.name + "'");
      if (observed) fill = total / static_cast<double>(observed);
    } else {
      // std::map iterates tokens in lexicographic order, so the first maximum wins ties
      std::map<std::string, std::size_t> freq;
      for (const Cell& cell : col)
        if (!is_missing(cell)) ++freq[std::get<std::string>(cell)];
      if (freq.empty() && !col.empty()) throw Error(ErrorKind::kAllMissingColumn, "column '" + spec.name + "'");
      std::size_t best = 0;
      for (const auto& [token, n] : freq)
        if (n > best) {
          best = n;
          fill = token;
        }
    }
    for (Cell& cell : col)
      if (is_missing(cell)) cell = fill;
    columns.push_back(std::move(col));
  }
  return DataTable(table.schema(), std::move(columns));
}

EncodedMatrix EncodedMatrix::take(const std::vector<std::size_t>& rows) const {
  EncodedMatrix out;
  out.cat_names = cat_names;
  out.vocabularies = vocabularies;
  out.cont_names = cont_names;
  out.cont_stats = cont_stats;
  out.target_names = target_names;
  out.target_vocabularies = target_vocabularies;
  const Index n = static_cast<Index>(rows.size());
  out.cat_codes.resize(n, cat_codes.cols());
  out.cont_values.resize(n, cont_values.cols());
  out.target_codes.resize(n, target_codes.cols());
  for (Index i = 0; i < n; ++i) {
    const Index r = static_cast<Index>(rows[static_cast<std::size_t>(i)]);
    if (r >= this->rows()) throw Error(ErrorKind::kIndexOutOfRange, "row " + std::to_string(r));
    if (cat_codes.cols()) out.cat_codes.row(i) = cat_codes.row(r);
    if (cont_values.cols()) out.cont_values.row(i) = cont_values.row(r);
    if (target_codes.cols()) out.target_codes.row(i) = target_codes.row(r);
  }
  return out;
}

std::vector<ContStat> column_stats(const Matrix& values) {
  std::vector<ContStat> stats;
  for (Index c = 0; c < values.cols(); ++c) {
    ContStat s;
    if (values.rows() > 0) {
      s.mean = values.col(c).mean();
      s.sd = std::sqrt((values.col(c).array() - s.mean).square().mean());
    }
    stats.push_back(s);
  }
  return stats;
}

EncodedMatrix encode_with(const DataTable& table, const std::vector<Vocabulary>& vocabularies,
                          const std::vector<Vocabulary>& target_vocabularies) {
  EncodedMatrix out;
  const FeatureSchema& schema = table.schema();
  out.cat_names = schema.names(ColumnKind::kCategorical);
  out.cont_names = schema.names(ColumnKind::kNumeric);
  out.target_names = schema.names(ColumnKind::kTargetSource);
  out.vocabularies = vocabularies;
  out.target_vocabularies = target_vocabularies;
  out.cat_codes = encode_columns(table, ColumnKind::kCategorical, vocabularies);
  out.target_codes = encode_columns(table, ColumnKind::kTargetSource, target_vocabularies);
  out.cont_values.resize(static_cast<Index>(table.rows()), static_cast<Index>(out.cont_names.size()));
  Index j = 0;
  for (std::size_t c = 0; c < table.cols(); ++c) {
    if (schema.columns[c].kind != ColumnKind::kNumeric) continue;
    for (std::size_t r = 0; r < table.rows(); ++r) {
      const Cell& cell = table.at(r, c);
      if (is_missing(cell))
        throw Error(ErrorKind::kNotImputed, "missing cell in column '" + schema.columns[c].name + "'");
      out.cont_values(static_cast<Index>(r), j) = std::get<double>(cell);
    }
    ++j;
  }
  out.cont_stats = column_stats(out.cont_values);
  return out;
}

EncodedMatrix label_encode(const DataTable& table) {
  return encode_with(table, build_vocabularies(table, ColumnKind::kCategorical),
                     build_vocabularies(table, ColumnKind::kTargetSource));
}

EncodedMatrix standardize(const EncodedMatrix& matrix, const std::optional<std::vector<ContStat>>& stats) {
  const std::vector<ContStat> use = stats ? *stats : column_stats(matrix.cont_values);
  if (use.size() != static_cast<std::size_t>(matrix.cont_values.cols()))
    throw Error(ErrorKind::kStatsDimensionMismatch, std::to_string(use.size()) + " stats for " +
                                                        std::to_string(matrix.cont_values.cols()) + " numeric columns");
  EncodedMatrix out = matrix;
  out.cont_stats = use;
  for (Index c = 0; c < out.cont_values.cols(); ++c) {
    const ContStat& s = use[static_cast<std::size_t>(c)];
    const double sd = s.sd < kSdFloor ? 1.0 : s.sd;
    out.cont_values.col(c) = (out.cont_values.col(c).array() - s.mean) / sd;
  }
  return out;
}

Matrix one_hot_targets(const Labels& labels, int classes) {
  Matrix out = Matrix::Zero(static_cast<Index>(labels.size()), classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= classes)
      throw Error(ErrorKind::kLabelOutOfRange,
                  "label " + std::to_string(labels[i]) + " outside [0, " + std::to_string(classes) + ")");
    out(static_cast<Index>(i), labels[i]) = 1.0;
  }
  return out;
}

SplitPlan split(std::size_t n, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw Error(ErrorKind::kEmptySplit, "test fraction must lie strictly between 0 and 1");
  // the small offset keeps exact products such as 10 * 0.8 from flooring to 7
  const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * (1.0 - test_fraction) + 1e-9));
  if (n_train == 0 || n_train >= n)
    throw Error(ErrorKind::kEmptySplit, "n=" + std::to_string(n) + " leaves an empty side");
  Rng rng(seed);
  const auto perm = rng.permutation(n);
  SplitPlan plan;
  plan.seed = seed;
  plan.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  plan.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  return plan;
}

SplitPlan kfold(SplitPlan plan, std::size_t k) {
  const std::size_t n = plan.train.size();
  if (k < 2 || k > n) throw Error(ErrorKind::kBadK, "K=" + std::to_string(k) + " for " + std::to_string(n) + " rows");
  Rng rng = Rng::derive(plan.seed, 1);
  std::vector<std::size_t> order = plan.train;
  rng.shuffle(order);
  plan.folds.assign(k, {});
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    plan.folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                         order.begin() + static_cast<std::ptrdiff_t>(pos + size));
    pos += size;
  }
  return plan;
}

std::vector<double> class_marginals(const Labels& labels, int classes) {
  if (labels.empty()) throw Error(ErrorKind::kEmptyInput, "no labels");
  int c = classes;
  for (int y : labels) {
    if (y < 0 || (classes > 0 && y >= classes))
      throw Error(ErrorKind::kLabelOutOfRange, "label " + std::to_string(y));
    c = std::max(c, y + 1);
  }
  std::vector<std::size_t> counts(static_cast<std::size_t>(c), 0);
  for (int y : labels) ++counts[static_cast<std::size_t>(y)];
  std::vector<double> out;
  for (std::size_t n : counts) out.push_back(static_cast<double>(n) / static_cast<double>(labels.size()));
  return out;
}

void SynthSpec::validate() const {
  schema.validate();
  if (n_rows == 0) throw Error(ErrorKind::kInvalidSpec, "n_rows must be positive");
  if (level_proportions.size() < 2) throw Error(ErrorKind::kInvalidSpec, "need at least two levels");
  double total = 0.0;
  for (double p : level_proportions) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::kInvalidSpec, "level proportion outside [0,1]");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw Error(ErrorKind::kInvalidSpec, "level proportions must sum to 1");
  const auto targets = schema.count(ColumnKind::kTargetSource);
  if (response_prob.rows() != static_cast<Index>(level_proportions.size()) ||
      response_prob.cols() != static_cast<Index>(targets))
    throw Error(ErrorKind::kInvalidSpec, "response_prob must be levels x target columns");
  if (!(response_prob.array() >= 0.0).all() || !(response_prob.array() <= 1.0).all())
    throw Error(ErrorKind::kInvalidSpec, "response probability outside [0,1]");
  const auto features = schema.count(ColumnKind::kCategorical);
  if (signal_strength.size() > features || feature_cardinality.size() > features)
    throw Error(ErrorKind::kInvalidSpec, "more feature settings than categorical columns");
  for (double s : signal_strength)
    if (!(s >= 0.0 && s <= 1.0)) throw Error(ErrorKind::kInvalidSpec, "signal strength outside [0,1]");
  for (int v : feature_cardinality)
    if (v < 1 || v > 26) throw Error(ErrorKind::kInvalidSpec, "feature cardinality must lie in [1, 26]");
  if (!(missing_rate >= 0.0 && missing_rate < 1.0)) throw Error(ErrorKind::kInvalidSpec, "missing_rate outside [0,1)");
}

Matrix default_response_prob(std::size_t levels) {
  if (levels < 2) throw Error(ErrorKind::kInvalidSpec, "need at least two levels");
  Matrix p = Matrix::Constant(static_cast<Index>(levels), 23, 0.05);
  for (std::size_t l = 1; l < levels; ++l) {
    const auto reach = static_cast<Index>(std::lround(23.0 * static_cast<double>(l) / static_cast<double>(levels - 1)));
    p.row(static_cast<Index>(l)).head(reach).setConstant(0.85);
  }
  return p;
}

SynthSpec default_synth_spec(std::size_t levels, std::size_t n_rows, std::uint64_t seed, std::size_t informative,
                             double strength) {
  SynthSpec spec;
  switch (levels) {
    case 2:
      spec.level_proportions = {0.8443, 0.1557};
      break;
    case 3:
      spec.level_proportions = {0.1793, 0.6823, 0.1384};
      break;
    case 4:
      spec.level_proportions = {0.0317, 0.6823, 0.1384, 0.1476};
      break;
    default:
      throw Error(ErrorKind::kInvalidSpec, "default spec covers 2, 3 or 4 levels");
  }
  spec.n_rows = n_rows;
  spec.seed = seed;
  spec.response_prob = default_response_prob(levels);
  const std::size_t features = spec.schema.count(ColumnKind::kCategorical);
  spec.signal_strength.assign(features, 0.0);
  for (std::size_t j = 0; j < std::min(informative, features); ++j) spec.signal_strength[j] = strength;
  spec.feature_cardinality = {2, 4, 7, 3};
  spec.feature_cardinality.resize(features, 3);
  return spec;
}

SynthResult synth_generate(const SynthSpec& spec) {
  spec.validate();
  const FeatureSchema& schema = spec.schema;
  const std::size_t n = spec.n_rows;

  std::vector<std::vector<Cell>> columns(schema.columns.size());
  for (auto& col : columns) col.reserve(n);
  SynthResult result;
  result.levels.reserve(n);
  Rng rng(spec.seed);
  for (std::size_t r = 0; r < n; ++r) {
    const int level = static_cast<int>(rng.categorical(spec.level_proportions));
    result.levels.push_back(level);
    std::size_t feature = 0, target = 0;
    for (std::size_t c = 0; c < schema.columns.size(); ++c) {
      switch (schema.columns[c].kind) {
        case ColumnKind::kTargetSource: {
          const bool yes = rng.bernoulli(spec.response_prob(level, static_cast<Index>(target++)));
          columns[c].emplace_back(std::string(yes ? "yes" : "no"));
          break;
        }
        case ColumnKind::kCategorical: {
          const double s = feature < spec.signal_strength.size() ? spec.signal_strength[feature] : 0.0;
          const int v = feature < spec.feature_cardinality.size() ? spec.feature_cardinality[feature] : 3;
          ++feature;
          const int informative = level % v;
          const int code = rng.uniform() < s ? informative : static_cast<int>(rng.below(static_cast<std::uint64_t>(v)));
          if (spec.missing_rate > 0.0 && rng.uniform() < spec.missing_rate)
            columns[c].emplace_back(std::monostate{});
          else
            columns[c].emplace_back(std::string(1, static_cast<char>('a' + code)));
          break;
        }
        case ColumnKind::kNumeric: {
          // ages 50..89 shifted up by two years per level
          const double age = std::floor(rng.uniform(50.0, 90.0)) + 2.0 * level;
          columns[c].emplace_back(age);
          break;
        }
      }
    }
  }
  result.table = DataTable(schema, std::move(columns));
  return result;
}

PlantedClusters planted_clusters(std::size_t n, std::size_t m, std::size_t k, double purity, int categories,
                                 std::uint64_t seed) {
  if (n == 0 || m == 0 || k == 0 || categories < 2 || !(purity >= 0.0 && purity <= 1.0))
    throw Error(ErrorKind::kInvalidSpec, "planted clusters need positive sizes, >= 2 categories, purity in [0,1]");
  Rng rng(seed);
  PlantedClusters out;
  out.modes.resize(static_cast<Index>(k), static_cast<Index>(m));
  for (Index i = 0; i < out.modes.size(); ++i)
    out.modes.data()[i] = static_cast<int>(rng.below(static_cast<std::uint64_t>(categories)));
  out.data.resize(static_cast<Index>(n), static_cast<Index>(m));
  out.truth.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    const int cluster = static_cast<int>(rng.below(k));
    out.truth[r] = cluster;
    for (std::size_t j = 0; j < m; ++j) {
      const int mode = out.modes(cluster, static_cast<Index>(j));
      int value = mode;
      if (rng.uniform() >= purity) {
        value = static_cast<int>(rng.below(static_cast<std::uint64_t>(categories - 1)));
        if (value >= mode) ++value;
      }
      out.data(static_cast<Index>(r), static_cast<Index>(j)) = value;
    }
  }
  return out;
}

nlohmann::json encoding_json(const EncodedMatrix& matrix) {
  nlohmann::json doc;
  doc["categorical"] = nlohmann::json::array();
  for (std::size_t j = 0; j < matrix.cat_names.size(); ++j)
    doc["categorical"].push_back({{"name", matrix.cat_names[j]}, {"vocabulary", matrix.vocabularies[j]}});
  doc["numeric"] = nlohmann::json::array();
  for (std::size_t j = 0; j < matrix.cont_names.size(); ++j)
    doc["numeric"].push_back(
        {{"name", matrix.cont_names[j]}, {"mean", matrix.cont_stats[j].mean}, {"sd", matrix.cont_stats[j].sd}});
  doc["target_source"] = nlohmann::json::array();
  for (std::size_t j = 0; j < matrix.target_names.size(); ++j)
    doc["target_source"].push_back({{"name", matrix.target_names[j]}, {"vocabulary", matrix.target_vocabularies[j]}});
  return doc;
}

void write_encoded(const EncodedMatrix& matrix, const std::filesystem::path& csv_path,
                   const std::filesystem::path& sidecar_path) {
  std::vector<std::string> fields = matrix.cat_names;
  fields.insert(fields.end(), matrix.cont_names.begin(), matrix.cont_names.end());
  fields.insert(fields.end(), matrix.target_names.begin(), matrix.target_names.end());
  std::string out = csv_line(fields);
  for (Index r = 0; r < matrix.rows(); ++r) {
    fields.clear();
    for (Index j = 0; j < matrix.cat_codes.cols(); ++j) fields.push_back(std::to_string(matrix.cat_codes(r, j)));
    for (Index j = 0; j < matrix.cont_values.cols(); ++j) fields.push_back(format_double(matrix.cont_values(r, j)));
    for (Index j = 0; j < matrix.target_codes.cols(); ++j) fields.push_back(std::to_string(matrix.target_codes(r, j)));
    out += csv_line(fields);
  }
  write_file_atomic(csv_path, out);
  write_file_atomic(sidecar_path, encoding_json(matrix).dump(2) + "\n");
}

}  // namespace tabsev
