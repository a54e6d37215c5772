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

#include "tabsev/error.hpp"
#include "tabsev/io.hpp"
#include "tabsev/pipeline.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

/// Reads --config files as a flat JSON object whose keys are long flag names
/// of the chosen subcommand without the dashes, e.g. {"epochs": 20}.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(const CLI::App* root) : root_(root) {}

  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
    nlohmann::json doc = nlohmann::json::object();
    for (const CLI::Option* opt : app->get_options({})) {
      if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
      const std::string& name = opt->get_lnames().front();
      if (opt->count() > 0)
        doc[name] = opt->as<std::string>();
      else if (default_also && !opt->get_default_str().empty())
        doc[name] = opt->get_default_str();
    }
    return doc.dump(2) + "\n";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    nlohmann::json doc;
    try {
      input >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw CLI::ConversionError("config", std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw CLI::ConversionError("config", "expected a JSON object");
    std::vector<std::string> parents;
    for (const CLI::App* sub : root_->get_subcommands()) parents = {sub->get_name()};
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : doc.items()) {
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_boolean())
        item.inputs = {value.get<bool>() ? "true" : "false"};
      else if (value.is_string())
        item.inputs = {value.get<std::string>()};
      else if (value.is_array())
        for (const auto& v : value) item.inputs.push_back(v.is_string() ? v.get<std::string>() : v.dump());
      else
        item.inputs = {value.dump()};
      items.push_back(std::move(item));
    }
    return items;
  }

 private:
  const CLI::App* root_;
};

CLI::Option* add_seed(CLI::App* sub, std::uint64_t& seed) {
  return sub->add_option("--seed", seed, "Random seed (default from TABSEV_SEED, else 0)")
      ->envname("TABSEV_SEED")
      ->capture_default_str();
}

std::optional<std::pair<tabsev::Index, tabsev::Index>> parse_range(const std::string& text) {
  long lo = 0;
  long hi = 0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%ld..%ld%c", &lo, &hi, &tail) != 2 || lo < 1 || hi < lo) return std::nullopt;
  return std::make_pair(static_cast<tabsev::Index>(lo), static_cast<tabsev::Index>(hi));
}

int usage_error(const CLI::App& sub, const std::string& message) {
  std::cerr << "error: " << message << "\n\n" << sub.help();
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Disability-severity pipeline for tabular survey data: synthetic data, K-modes severity levels, "
               "Wide&Deep / TabTransformer / TabNet classifiers, evaluation and TabNet mask explanations."};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "JSON object of flag values for the subcommand; command-line flags win");
  app.config_formatter(std::make_shared<JsonConfig>(&app));
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.footer(
      "Every command writes its outputs plus manifest.json into --out. Outputs are written only after the command "
      "succeeds.\nExit codes: 0 success, 2 usage error, 3 data error (unreadable or inconsistent input, wrong "
      "checkpoint), 4 numeric failure (non-finite loss or input).");

  std::string out_dir = "out";

  tabsev::SynthOptions synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a seeded synthetic survey dataset with ground truth");
  synth_cmd->add_option("--n", synth.n, "Rows")->check(CLI::Range(std::size_t{10}, std::size_t{100000000}))
      ->capture_default_str();
  synth_cmd->add_option("--levels", synth.levels, "Severity levels")->check(CLI::IsMember({2, 3, 4}))
      ->capture_default_str();
  add_seed(synth_cmd, synth.seed);
  synth_cmd->add_option("--informative", synth.informative, "Features that carry signal about the level")
      ->capture_default_str();
  synth_cmd->add_option("--strength", synth.strength, "Signal strength of informative features")
      ->check(CLI::Range(0.0, 1.0))->capture_default_str();
  synth_cmd->add_option("--missing-rate", synth.missing_rate, "Share of feature cells left missing")
      ->check(CLI::Range(0.0, 1.0))->capture_default_str();
  synth_cmd->add_option("--out", out_dir, "Output directory")->capture_default_str();

  tabsev::ClusterOptions cluster;
  std::optional<tabsev::Index> cluster_k;
  std::string k_range;
  CLI::App* cluster_cmd = app.add_subcommand("cluster", "Severity levels by K-modes over the target questions");
  cluster_cmd->add_option("--input", cluster.input, "Dataset CSV")->required()->check(CLI::ExistingFile);
  cluster_cmd->add_option("--schema", cluster.schema, "Schema JSON")->required()->check(CLI::ExistingFile);
  cluster_cmd->add_option("--k", cluster_k, "Number of levels")->check(CLI::PositiveNumber);
  cluster_cmd->add_option("--k-range", k_range, "Cost curve over K, e.g. 1..8")
      ->check([](const std::string& s) { return parse_range(s) ? "" : "expected LO..HI"; });
  cluster_cmd->add_option("--n-init", cluster.n_init, "Restarts per K")->check(CLI::PositiveNumber)
      ->capture_default_str();
  cluster_cmd->add_option("--positive", cluster.positive, "Answer token that marks a difficulty")
      ->capture_default_str();
  add_seed(cluster_cmd, cluster.seed);
  cluster_cmd->add_option("--out", out_dir, "Output directory")->capture_default_str();

  tabsev::TrainOptions train;
  std::string model_name = "widedeep";
  std::string model_config_path;
  std::optional<double> learning_rate;
  CLI::App* train_cmd = app.add_subcommand("train", "80/20 split, K-fold epoch selection and a final fit");
  train_cmd->add_option("--input", train.input, "Dataset CSV")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--labels", train.labels, "Labels CSV or ground-truth JSON")->required()
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--schema", train.schema, "Schema JSON (default: built-in)")->check(CLI::ExistingFile);
  train_cmd->add_option("--model", model_name, "Model")
      ->check(CLI::IsMember({"widedeep", "tabtransformer", "tabnet"}))->capture_default_str();
  train_cmd->add_option("--levels", train.levels, "Classes (0: largest label + 1)")->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  train_cmd->add_option("--epochs", train.epochs, "Maximum epochs")->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--batch-size", train.batch_size, "Mini-batch rows")->check(CLI::PositiveNumber)
      ->capture_default_str();
  train_cmd->add_option("--folds", train.folds, "Cross-validation folds")->check(CLI::Range(2, 100))
      ->capture_default_str();
  train_cmd->add_option("--test-fraction", train.test_fraction, "Held-out share")
      ->check(CLI::Range(0.01, 0.99))->capture_default_str();
  train_cmd->add_option("--learning-rate", learning_rate, "RMSprop learning rate (default 1e-3)")
      ->check(CLI::PositiveNumber);
  train_cmd->add_option("--model-config", model_config_path, "JSON overrides of the model config")
      ->check(CLI::ExistingFile);
  add_seed(train_cmd, train.seed);
  train_cmd->add_option("--out", out_dir, "Output directory")->capture_default_str();

  tabsev::EvaluateOptions evaluate;
  CLI::App* evaluate_cmd = app.add_subcommand("evaluate", "Metrics JSON and ROC points for a checkpoint");
  evaluate_cmd->add_option("--checkpoint", evaluate.checkpoint, "model.json from train")->required()
      ->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--input", evaluate.input, "Dataset CSV")->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--labels", evaluate.labels, "Labels CSV or ground-truth JSON")->required()
      ->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--out", out_dir, "Output directory")->capture_default_str();

  tabsev::ExplainOptions explain;
  CLI::App* explain_cmd = app.add_subcommand("explain", "Per-step and aggregate TabNet feature masks");
  explain_cmd->add_option("--checkpoint", explain.checkpoint, "TabNet model.json from train")->required()
      ->check(CLI::ExistingFile);
  explain_cmd->add_option("--input", explain.input, "Dataset CSV")->required()->check(CLI::ExistingFile);
  explain_cmd->add_option("--rows", explain.rows, "Leading rows to explain")->check(CLI::PositiveNumber)
      ->capture_default_str();
  explain_cmd->add_option("--out", out_dir, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    const CLI::App* failing = &app;
    for (const CLI::App* sub : app.get_subcommands()) failing = sub;
    return usage_error(*failing, e.what());
  }

  const CLI::App* chosen = app.get_subcommands().front();
  const std::string command = chosen->get_name();
  std::uint64_t seed = 0;
  std::function<tabsev::CommandOutput()> run;
  if (command == "synth") {
    seed = synth.seed;
    run = [&] { return tabsev::run_synth(synth); };
  } else if (command == "cluster") {
    if (!cluster_k && k_range.empty()) return usage_error(*chosen, "give --k or --k-range");
    cluster.k = cluster_k;
    if (!k_range.empty()) cluster.k_range = parse_range(k_range);
    seed = cluster.seed;
    run = [&] { return tabsev::run_cluster(cluster); };
  } else if (command == "train") {
    train.model = tabsev::model_kind_from_string(model_name);
    train.learning_rate = learning_rate;
    seed = train.seed;
    run = [&] {
      if (!model_config_path.empty()) {
        try {
          train.model_overrides = nlohmann::json::parse(tabsev::read_file(model_config_path));
        } catch (const nlohmann::json::exception& e) {
          throw tabsev::Error(tabsev::ErrorKind::kConfigMismatch, model_config_path + ": " + e.what());
        }
      }
      return tabsev::run_train(train);
    };
  } else if (command == "evaluate") {
    run = [&] { return tabsev::run_evaluate(evaluate); };
  } else {
    run = [&] { return tabsev::run_explain(explain); };
  }

  try {
    const auto start = std::chrono::steady_clock::now();
    const tabsev::CommandOutput output = run();
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const tabsev::RunManifest manifest = tabsev::write_outputs(out_dir, command, seed, output, seconds);
    for (const auto& [path, digest] : manifest.outputs) std::cout << path << "  " << digest << "\n";
    return 0;
  } catch (const tabsev::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    const bool numeric =
        e.kind() == tabsev::ErrorKind::kNonFiniteLoss || e.kind() == tabsev::ErrorKind::kNonFiniteInput;
    return numeric ? kExitNumeric : kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
}
