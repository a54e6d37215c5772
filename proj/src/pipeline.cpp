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

#include "tabsev/pipeline.hpp"

#include "tabsev/error.hpp"
#include "tabsev/io.hpp"
#include "tabsev/kmodes.hpp"
#include "tabsev/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

namespace tabsev {

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_input(CommandOutput& out, const std::filesystem::path& path) {
  std::string text = read_file(path);
  out.inputs.emplace_back(path.string(), content_digest(text));
  return text;
}

FeatureSchema load_schema(CommandOutput& out, const std::filesystem::path& path) {
  if (path.empty()) return default_schema();
  try {
    FeatureSchema s = FeatureSchema::from_json(nlohmann::json::parse(read_input(out, path)));
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidSchema, path.string() + ": " + e.what());
  }
}

DataTable take_rows(const DataTable& table, const std::vector<std::size_t>& rows) {
  std::vector<std::vector<Cell>> cols(table.cols());
  for (std::size_t c = 0; c < table.cols(); ++c) {
    cols[c].reserve(rows.size());
    for (std::size_t r : rows) cols[c].push_back(table.at(r, c));
  }
  return DataTable(table.schema(), std::move(cols));
}

DataTable feature_columns(const DataTable& table) {
  FeatureSchema schema;
  std::vector<std::vector<Cell>> cols;
  for (std::size_t c = 0; c < table.cols(); ++c) {
    if (table.schema().columns[c].kind == ColumnKind::kTargetSource) continue;
    schema.columns.push_back(table.schema().columns[c]);
    cols.push_back(table.column(c));
  }
  return DataTable(std::move(schema), std::move(cols));
}

InputSchema input_schema(const EncodedMatrix& m) {
  InputSchema s;
  s.cat_names = m.cat_names;
  for (const Vocabulary& v : m.vocabularies) s.vocab_sizes.push_back(static_cast<Index>(v.size()));
  s.cont_names = m.cont_names;
  return s;
}

std::string matrix_csv(const std::vector<std::string>& header, const Matrix& m) {
  std::string out = csv_line(header);
  std::vector<std::string> fields(static_cast<std::size_t>(m.cols()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) fields[static_cast<std::size_t>(j)] = format_double(m(i, j));
    out += csv_line(fields);
  }
  return out;
}

std::string roc_csv(const RocCurve& curve) {
  std::string out = csv_line({"fpr", "tpr", "threshold"});
  for (std::size_t i = 0; i < curve.fpr.size(); ++i)
    out += csv_line({format_double(curve.fpr[i]), format_double(curve.tpr[i]), format_double(curve.thresholds[i])});
  return out;
}

Labels labels_for(CommandOutput& out, const std::filesystem::path& path, std::size_t rows) {
  out.inputs.emplace_back(path.string(), content_digest(read_file(path)));
  Labels y = read_labels(path);
  if (y.size() != rows)
    throw Error(ErrorKind::kLengthMismatch,
                std::to_string(y.size()) + " labels for " + std::to_string(rows) + " input rows");
  return y;
}

}  // namespace

void CommandOutput::add(std::string name, std::string content) {
  files.push_back({std::move(name), std::move(content)});
}

const std::string& CommandOutput::file(std::string_view name) const {
  for (const OutputFile& f : files)
    if (f.name == name) return f.content;
  throw Error(ErrorKind::kIo, "no output named " + std::string(name));
}

nlohmann::json RunManifest::to_json() const {
  nlohmann::json in = nlohmann::json::array();
  for (const auto& [path, digest] : inputs) in.push_back({{"path", path}, {"digest", digest}});
  nlohmann::json outs = nlohmann::json::array();
  for (const auto& [path, digest] : outputs) outs.push_back({{"path", path}, {"digest", digest}});
  return {{"command", command}, {"config", config},          {"seed", seed},
          {"inputs", in},       {"outputs", outs},           {"wall_seconds", wall_seconds}};
}

std::string content_digest(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return hex64(h);
}

RunManifest write_outputs(const std::filesystem::path& out_dir, const std::string& command, std::uint64_t seed,
                          const CommandOutput& output, double wall_seconds) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create " + out_dir.string() + ": " + ec.message());
  RunManifest manifest;
  manifest.command = command;
  manifest.config = output.config;
  manifest.seed = seed;
  manifest.inputs = output.inputs;
  manifest.wall_seconds = wall_seconds;
  for (const OutputFile& f : output.files) {
    const std::filesystem::path path = out_dir / f.name;
    write_file_atomic(path, f.content);
    manifest.outputs.emplace_back(path.string(), content_digest(f.content));
  }
  write_file_atomic(out_dir / "manifest.json", manifest.to_json().dump(2) + "\n");
  return manifest;
}

Labels read_labels(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  Labels y;
  if (path.extension() == ".json") {
    try {
      const nlohmann::json doc = nlohmann::json::parse(text);
      for (const auto& v : doc.at("labels")) y.push_back(v.get<int>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::kTypeMismatch, path.string() + ": " + e.what());
    }
    return y;
  }
  const auto rows = parse_csv(text);
  if (rows.empty()) throw Error(ErrorKind::kEmptyInput, path.string() + " has no header");
  const auto& header = rows.front();
  const auto named = std::find(header.begin(), header.end(), "label");
  const std::size_t col = named == header.end() ? 0 : static_cast<std::size_t>(named - header.begin());
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const std::string& field = rows[r].at(col);
    std::size_t used = 0;
    int value = 0;
    try {
      value = std::stoi(field, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != field.size())
      throw Error(ErrorKind::kTypeMismatch, path.string() + " row " + std::to_string(r) + ": '" + field + "'");
    y.push_back(value);
  }
  return y;
}

std::string labels_csv(const Labels& labels) {
  std::string out = "label\n";
  for (int l : labels) out += std::to_string(l) + "\n";
  return out;
}

PreparedData prepare_features(const DataTable& table, const std::vector<std::size_t>& fit_rows) {
  PreparedData out;
  const DataTable features = impute(feature_columns(table));
  out.features = features.schema();
  const EncodedMatrix encoded = label_encode(features);
  std::optional<std::vector<ContStat>> stats;
  if (!fit_rows.empty()) stats = column_stats(encoded.take(fit_rows).cont_values);
  out.encoded = standardize(encoded, stats);
  out.batch.cat = out.encoded.cat_codes;
  out.batch.cont = out.encoded.cont_values;
  out.schema = input_schema(out.encoded);
  return out;
}

nlohmann::json preprocessing_json(const PreparedData& data) {
  nlohmann::json stats = nlohmann::json::array();
  for (const ContStat& s : data.encoded.cont_stats) stats.push_back({{"mean", s.mean}, {"sd", s.sd}});
  return {{"features", data.features.to_json()}, {"vocabularies", data.encoded.vocabularies}, {"cont_stats", stats}};
}

Batch encode_features(const DataTable& table, const nlohmann::json& preprocessing) {
  try {
    const auto vocabularies = preprocessing.at("vocabularies").get<std::vector<Vocabulary>>();
    std::vector<ContStat> stats;
    for (const auto& s : preprocessing.at("cont_stats"))
      stats.push_back({s.at("mean").get<double>(), s.at("sd").get<double>()});
    const EncodedMatrix encoded = standardize(encode_with(impute(feature_columns(table)), vocabularies, {}), stats);
    return {encoded.cat_codes, encoded.cont_values};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfigMismatch, std::string("checkpoint preprocessing: ") + e.what());
  }
}

CommandOutput run_synth(const SynthOptions& options) {
  if (options.n < 10) throw Error(ErrorKind::kInvalidSpec, "n must be at least 10");
  SynthSpec spec = default_synth_spec(options.levels, options.n, options.seed, options.informative, options.strength);
  spec.missing_rate = options.missing_rate;
  const SynthResult synth = synth_generate(spec);

  CommandOutput out;
  out.config = {{"n", options.n},
                {"levels", options.levels},
                {"seed", options.seed},
                {"informative", options.informative},
                {"strength", options.strength},
                {"missing_rate", options.missing_rate}};
  out.add("dataset.csv", table_csv(synth.table));
  out.add("schema.json", spec.schema.to_json().dump(2) + "\n");
  const std::vector<double> shares = class_marginals(synth.levels, static_cast<int>(options.levels));
  const nlohmann::json truth{{"levels", options.levels},
                             {"proportions", spec.level_proportions},
                             {"observed_shares", shares},
                             {"informative_features", options.informative},
                             {"labels", synth.levels}};
  out.add("ground_truth.json", truth.dump() + "\n");
  return out;
}

CommandOutput run_cluster(const ClusterOptions& options) {
  if (!options.k && !options.k_range) throw Error(ErrorKind::kBadK, "give k or a k range");
  CommandOutput out;
  const FeatureSchema schema = load_schema(out, options.schema);
  const DataTable table = parse_table(read_input(out, options.input), schema);
  if (schema.count(ColumnKind::kTargetSource) == 0)
    throw Error(ErrorKind::kInvalidSchema, "schema has no target-question columns to cluster");
  const EncodedMatrix encoded = label_encode(impute(table));
  const CodeMatrix& data = encoded.target_codes;
  const KModesOptions km{options.n_init, 100};

  out.config = {{"input", options.input.string()},
                {"schema", options.schema.string()},
                {"seed", options.seed},
                {"n_init", options.n_init},
                {"positive", options.positive}};
  if (options.k_range) {
    const auto [lo, hi] = *options.k_range;
    out.config["k_range"] = {lo, hi};
    const CostCurve curve = elbow_curve(data, lo, hi, options.seed, km);
    out.add("cost_curve.csv", cost_curve_csv(curve));
    if (!curve.warnings.empty()) out.config["warnings"] = curve.warnings;
  }
  if (options.k) {
    out.config["k"] = *options.k;
    const KModesResult fit = tabsev::fit(data, *options.k, options.seed, km);
    std::vector<int> positive;
    for (const Vocabulary& v : encoded.target_vocabularies) {
      const auto it = std::find(v.begin(), v.end(), options.positive);
      positive.push_back(it == v.end() ? -1 : static_cast<int>(it - v.begin()));
    }
    const std::vector<int> order = severity_order(data, fit.assignment, positive, *options.k);
    out.add("labels.csv", labels_csv(relabel(fit.assignment.labels, order)));
    nlohmann::json modes = nlohmann::json::array();
    for (Index c = 0; c < fit.modes.k(); ++c) {
      nlohmann::json row = nlohmann::json::object();
      for (Index j = 0; j < fit.modes.m(); ++j) {
        const std::size_t col = static_cast<std::size_t>(j);
        row[encoded.target_names[col]] = encoded.target_vocabularies[col][static_cast<std::size_t>(fit.modes.modes(c, j))];
      }
      modes.push_back({{"level", order[static_cast<std::size_t>(c)]}, {"mode", row}});
    }
    std::sort(modes.begin(), modes.end(),
              [](const nlohmann::json& a, const nlohmann::json& b) { return a.at("level") < b.at("level"); });
    out.add("modes.json", nlohmann::json{{"cost", fit.assignment.cost}, {"iterations", fit.assignment.iterations},
                                         {"converged", fit.assignment.converged}, {"modes", modes}}
                              .dump(2) +
                              "\n");
  }
  return out;
}

CommandOutput run_train(const TrainOptions& options) {
  CommandOutput out;
  const FeatureSchema schema = load_schema(out, options.schema);
  const DataTable table = parse_table(read_input(out, options.input), schema);
  const Labels y = labels_for(out, options.labels, table.rows());
  if (y.empty()) throw Error(ErrorKind::kEmptyData, "no rows to train on");

  const int classes = options.levels > 0 ? options.levels : *std::max_element(y.begin(), y.end()) + 1;
  for (int label : y)
    if (label < 0 || label >= classes)
      throw Error(ErrorKind::kLabelOutOfRange,
                  "label " + std::to_string(label) + " outside [0, " + std::to_string(classes) + ")");
  if (classes < 2) throw Error(ErrorKind::kLabelOutOfRange, "need at least two classes");

  const SplitPlan plan = split(table.rows(), options.test_fraction, options.seed);
  const PreparedData prepared = prepare_features(table, plan.train);
  Dataset all{prepared.batch, y, classes};
  const Dataset train_data = all.take(plan.train);

  ModelConfig model_config = config_from_json(
      [&] {
        nlohmann::json doc = config_to_json(default_config(options.model, classes));
        for (const auto& [key, value] : options.model_overrides.items()) doc[key] = value;
        return doc;
      }(),
      classes);
  TrainConfig tc;
  tc.epochs = options.epochs;
  tc.batch_size = options.batch_size;
  if (options.learning_rate) tc.learning_rate = *options.learning_rate;
  tc.seed = Rng::mix(options.seed, 3);
  const std::uint64_t model_seed = Rng::mix(options.seed, 2);

  const FitResult result = fit(model_config, prepared.schema, train_data, options.folds, tc, model_seed);

  out.config = {{"input", options.input.string()},
                {"labels", options.labels.string()},
                {"schema", options.schema.string()},
                {"model", std::string(to_string(options.model))},
                {"levels", classes},
                {"folds", options.folds},
                {"seed", options.seed},
                {"test_fraction", options.test_fraction},
                {"model_config", config_to_json(model_config)},
                {"train_config", tc.to_json()}};
  const nlohmann::json extra{{"preprocessing", preprocessing_json(prepared)}, {"classes", classes}};
  out.add("model.json", checkpoint_text(*result.model, &result.history, extra));
  out.add("history.csv", result.history.csv());
  for (std::size_t k = 0; k < result.cv.folds.size(); ++k)
    out.add("fold_" + std::to_string(k + 1) + "_history.csv", result.cv.folds[k].csv());
  nlohmann::json cv{{"folds", options.folds},
                    {"selected_epochs", result.cv.selected_epochs},
                    {"mean_val_loss", result.cv.mean_val_loss}};
  out.add("cv.json", cv.dump(2) + "\n");

  const DataTable imputed = impute(table);
  out.add("test.csv", table_csv(take_rows(imputed, plan.test)));
  Labels test_y;
  for (std::size_t r : plan.test) test_y.push_back(y[r]);
  out.add("test_labels.csv", labels_csv(test_y));
  return out;
}

CommandOutput run_evaluate(const EvaluateOptions& options) {
  CommandOutput out;
  const LoadedModel loaded = parse_model_checkpoint(read_input(out, options.checkpoint));
  if (!loaded.extra.contains("preprocessing"))
    throw Error(ErrorKind::kConfigMismatch, "checkpoint carries no preprocessing settings");
  const nlohmann::json& pre = loaded.extra.at("preprocessing");
  const FeatureSchema features = FeatureSchema::from_json(pre.at("features"));
  const DataTable table = parse_table(read_input(out, options.input), features);
  Model& model = *loaded.model;
  const int classes = model.output_dim() == 1 ? 2 : static_cast<int>(model.output_dim());
  const Dataset data{encode_features(table, pre), labels_for(out, options.labels, table.rows()), classes};

  const EvalReport report = evaluate(model, data);
  out.config = {{"checkpoint", options.checkpoint.string()},
                {"input", options.input.string()},
                {"labels", options.labels.string()},
                {"model", std::string(to_string(model.kind()))}};
  nlohmann::json metrics = report.to_json("test");
  metrics["model"] = std::string(to_string(model.kind()));
  metrics["rows"] = data.rows();
  out.add("metrics.json", metrics.dump(2) + "\n");

  const Matrix p = model.predict(data.x);
  if (p.cols() == 1) {
    const std::vector<double> scores(p.data(), p.data() + p.rows());
    out.add("roc.csv", roc_csv(roc_points(scores, data.y)));
  } else {
    for (Index c = 0; c < p.cols(); ++c) {
      std::vector<double> scores(static_cast<std::size_t>(p.rows()));
      Labels positive(data.y.size());
      for (std::size_t i = 0; i < data.y.size(); ++i) {
        scores[i] = p(static_cast<Index>(i), c);
        positive[i] = data.y[i] == c;
      }
      const bool both = std::count(positive.begin(), positive.end(), 1) > 0 &&
                        std::count(positive.begin(), positive.end(), 0) > 0;
      if (both) out.add("roc_class_" + std::to_string(c) + ".csv", roc_csv(roc_points(scores, positive)));
    }
  }
  return out;
}

CommandOutput run_explain(const ExplainOptions& options) {
  CommandOutput out;
  const LoadedModel loaded = parse_model_checkpoint(read_input(out, options.checkpoint));
  auto* tabnet = dynamic_cast<TabNet*>(loaded.model.get());
  if (!tabnet)
    throw Error(ErrorKind::kConfigMismatch,
                "explain needs a tabnet checkpoint, got " + std::string(to_string(loaded.model->kind())));
  if (options.rows < 1) throw Error(ErrorKind::kEmptyData, "rows must be positive");
  if (!loaded.extra.contains("preprocessing"))
    throw Error(ErrorKind::kConfigMismatch, "checkpoint carries no preprocessing settings");
  const nlohmann::json& pre = loaded.extra.at("preprocessing");
  const DataTable table = parse_table(read_input(out, options.input), FeatureSchema::from_json(pre.at("features")));
  const Batch full = encode_features(table, pre);
  std::vector<std::size_t> rows(static_cast<std::size_t>(std::min(options.rows, full.rows())));
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  if (rows.empty()) throw Error(ErrorKind::kEmptyData, "input has no rows");

  const TabNetState state = tabnet->explain(full.take(rows));
  const std::vector<Index> widths = tabnet->feature_widths();
  const std::vector<std::string> names = tabnet->feature_names();
  for (std::size_t s = 0; s < state.masks.size(); ++s)
    out.add("mask_step_" + std::to_string(s + 1) + ".csv", matrix_csv(names, group_columns(state.masks[s], widths)));
  const Matrix aggregate = group_columns(aggregate_mask(state), widths);
  out.add("mask_aggregate.csv", matrix_csv(names, aggregate));
  std::string importance = csv_line({"feature", "mean_mass"});
  const Eigen::RowVectorXd mean = aggregate.colwise().mean();
  for (std::size_t j = 0; j < names.size(); ++j)
    importance += csv_line({names[j], format_double(mean(static_cast<Index>(j)))});
  out.add("importance.csv", importance);
  out.config = {{"checkpoint", options.checkpoint.string()},
                {"input", options.input.string()},
                {"rows", static_cast<Index>(rows.size())},
                {"steps", state.masks.size()}};
  return out;
}

}  // namespace tabsev
