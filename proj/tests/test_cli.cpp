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

#include "doctest.h"

#include "support/oracles.hpp"
#include "tabsev/dataset.hpp"
#include "tabsev/error.hpp"
#include "tabsev/io.hpp"
#include "tabsev/pipeline.hpp"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <set>

using namespace tabsev;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "tabsev_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

/// Writes a command's outputs and returns the directory.
fs::path emit(const CommandOutput& out, const fs::path& dir) {
  write_outputs(dir, "test", 0, out, 0.0);
  return dir;
}

struct Run {
  int code = -1;
  std::string output;
};

Run run_cli(const std::string& args, const std::string& env = "") {
  const fs::path log = fs::temp_directory_path() / "tabsev_cli_test" / "last_run.txt";
  fs::create_directories(log.parent_path());
  const std::string cmd = env + " '" + std::string(TABSEV_CLI_PATH) + "' " + args + " > '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_file(log)};
}

std::vector<std::vector<double>> numeric_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  const auto cells = parse_csv(text);
  for (std::size_t r = 1; r < cells.size(); ++r) {
    rows.emplace_back();
    for (const auto& c : cells[r]) rows.back().push_back(std::stod(c));
  }
  return rows;
}

/// A synthetic dataset on disk with its schema and ground truth.
struct SmallProject {
  fs::path dir;
  fs::path data;
  fs::path schema;
  fs::path truth;
};

SmallProject small_project(const std::string& name, std::size_t levels = 2, std::size_t n = 400) {
  SmallProject p;
  p.dir = scratch(name);
  SynthOptions o;
  o.n = n;
  o.levels = levels;
  o.seed = 4;
  emit(run_synth(o), p.dir / "synth");
  p.data = p.dir / "synth" / "dataset.csv";
  p.schema = p.dir / "synth" / "schema.json";
  p.truth = p.dir / "synth" / "ground_truth.json";
  return p;
}

TrainOptions quick_train(const SmallProject& p, ModelKind kind = ModelKind::kWideDeep) {
  TrainOptions t;
  t.input = p.data;
  t.labels = p.truth;
  t.schema = p.schema;
  t.model = kind;
  t.epochs = 4;
  t.folds = 2;
  t.batch_size = 64;
  t.seed = 8;
  return t;
}

}  // namespace

TEST_CASE("synth is deterministic and respects the level count") {
  SynthOptions o;
  o.n = 300;
  o.levels = 4;
  o.seed = 12;
  const CommandOutput a = run_synth(o);
  const CommandOutput b = run_synth(o);
  REQUIRE(a.files.size() == b.files.size());
  for (std::size_t i = 0; i < a.files.size(); ++i) CHECK(a.files[i].content == b.files[i].content);

  const auto truth = nlohmann::json::parse(a.file("ground_truth.json"));
  std::set<int> seen;
  for (const auto& v : truth.at("labels")) seen.insert(v.get<int>());
  CHECK(seen == std::set<int>{0, 1, 2, 3});

  o.n = 9;
  CHECK_THROWS_AS(run_synth(o), Error);
}

TEST_CASE("synth at full size puts 15.57% in the disabled level") {
  SynthOptions o;
  o.n = 11219;
  o.levels = 2;
  o.seed = 1;
  const auto truth = nlohmann::json::parse(run_synth(o).file("ground_truth.json"));
  double disabled = 0.0;
  for (const auto& v : truth.at("labels")) disabled += v.get<int>() == 1;
  CHECK(std::abs(disabled / 11219.0 - 0.1557) <= 0.01);
}

TEST_CASE("cluster emits a cost curve and recovers planted levels") {
  const SmallProject p = small_project("cluster", 2, 1000);
  ClusterOptions c;
  c.input = p.data;
  c.schema = p.schema;
  c.k_range = std::make_pair(Index{1}, Index{8});
  c.k = 2;
  c.seed = 3;
  const CommandOutput out = run_cluster(c);
  const auto curve = parse_csv(out.file("cost_curve.csv"));
  CHECK(curve.size() == 9);
  CHECK(curve.front() == std::vector<std::string>{"K", "cost"});

  const Labels found = read_labels(emit(out, p.dir / "cluster") / "labels.csv");
  const Labels truth = read_labels(p.truth);
  CHECK(oracle::adjusted_rand_pairs(found, truth) >= 0.9);
  // severity ordering: level 1 is the group reporting more difficulties
  std::size_t agree = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) agree += found[i] == truth[i];
  CHECK(agree > truth.size() / 2);

  ClusterOptions none = c;
  none.k.reset();
  none.k_range.reset();
  CHECK_THROWS_AS(run_cluster(none), Error);
}

TEST_CASE("train writes fold histories and is reproducible") {
  const SmallProject p = small_project("train");
  TrainOptions t = quick_train(p);
  t.folds = 5;
  const CommandOutput a = run_train(t);
  for (int k = 1; k <= 5; ++k) CHECK_NOTHROW(a.file("fold_" + std::to_string(k) + "_history.csv"));
  CHECK_THROWS(a.file("fold_6_history.csv"));
  const CommandOutput b = run_train(t);
  CHECK(content_digest(a.file("model.json")) == content_digest(b.file("model.json")));

  const auto test_rows = parse_csv(a.file("test.csv")).size() - 1;
  CHECK(test_rows == 80);
  CHECK(parse_csv(a.file("test_labels.csv")).size() - 1 == test_rows);

  // labels that do not line up with the rows
  const fs::path short_labels = p.dir / "short.csv";
  write_file_atomic(short_labels, "label\n0\n1\n");
  t.labels = short_labels;
  CHECK_THROWS_AS(run_train(t), Error);
}

TEST_CASE("evaluate reports micro and macro scores and ROC endpoints") {
  const SmallProject p = small_project("evaluate", 3, 600);
  const fs::path trained = emit(run_train(quick_train(p)), p.dir / "train");
  EvaluateOptions e;
  e.checkpoint = trained / "model.json";
  e.input = trained / "test.csv";
  e.labels = trained / "test_labels.csv";
  const CommandOutput a = run_evaluate(e);
  const auto metrics = nlohmann::json::parse(a.file("metrics.json"));
  CHECK(metrics.contains("test_f1_micro"));
  CHECK(metrics.contains("test_f1_macro"));
  CHECK(metrics.at("rows") == 120);

  bool any_roc = false;
  for (const OutputFile& f : a.files) {
    if (f.name.rfind("roc_class_", 0) != 0) continue;
    any_roc = true;
    const auto rows = numeric_csv(f.content);
    CHECK(rows.front()[0] == 0.0);
    CHECK(rows.front()[1] == 0.0);
    CHECK(rows.back()[0] == 1.0);
    CHECK(rows.back()[1] == 1.0);
  }
  CHECK(any_roc);
  CHECK(run_evaluate(e).file("metrics.json") == a.file("metrics.json"));
}

TEST_CASE("explain writes one mask per step plus a normalised aggregate") {
  const SmallProject p = small_project("explain");
  const fs::path trained = emit(run_train(quick_train(p, ModelKind::kTabNet)), p.dir / "tabnet");
  ExplainOptions x;
  x.checkpoint = trained / "model.json";
  x.input = trained / "test.csv";
  x.rows = 100;
  const CommandOutput out = run_explain(x);

  int steps = 0;
  for (const OutputFile& f : out.files) steps += f.name.rfind("mask_step_", 0) == 0;
  CHECK(steps == 7);

  const auto aggregate = numeric_csv(out.file("mask_aggregate.csv"));
  CHECK(aggregate.size() == 80);  // only 80 test rows exist
  CHECK(parse_csv(out.file("mask_aggregate.csv")).front().size() == 25);
  for (const auto& row : aggregate) {
    double total = 0.0;
    for (double v : row) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0 + 1e-12);
      total += v;
    }
    CHECK(std::abs(total - 1.0) <= 1e-6);
  }
  for (int s = 1; s <= 7; ++s)
    for (const auto& row : numeric_csv(out.file("mask_step_" + std::to_string(s) + ".csv"))) {
      double total = 0.0;
      for (double v : row) total += v;
      CHECK(std::abs(total - 1.0) <= 1e-6);
    }

  const fs::path wide = emit(run_train(quick_train(p)), p.dir / "wide");
  x.checkpoint = wide / "model.json";
  try {
    run_explain(x);
    FAIL("explain accepted a non-TabNet checkpoint");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kConfigMismatch);
  }
}

TEST_CASE("manifest lists existing outputs with their digests") {
  const SmallProject p = small_project("manifest");
  const auto manifest = nlohmann::json::parse(read_file(p.dir / "synth" / "manifest.json"));
  CHECK(manifest.at("outputs").size() == 3);
  for (const auto& o : manifest.at("outputs")) {
    const fs::path path = o.at("path").get<std::string>();
    REQUIRE(fs::exists(path));
    CHECK(content_digest(read_file(path)) == o.at("digest").get<std::string>());
  }
}

TEST_CASE("pipeline metrics are byte-identical across runs") {
  auto pipeline = [](const std::string& name) {
    const fs::path dir = scratch(name);
    SynthOptions s;
    s.n = 500;
    s.seed = 21;
    emit(run_synth(s), dir / "synth");
    ClusterOptions c;
    c.input = dir / "synth" / "dataset.csv";
    c.schema = dir / "synth" / "schema.json";
    c.k = 2;
    c.seed = 21;
    emit(run_cluster(c), dir / "cluster");
    TrainOptions t;
    t.input = c.input;
    t.schema = c.schema;
    t.labels = dir / "cluster" / "labels.csv";
    t.epochs = 5;
    t.folds = 2;
    t.seed = 21;
    emit(run_train(t), dir / "train");
    EvaluateOptions e;
    e.checkpoint = dir / "train" / "model.json";
    e.input = dir / "train" / "test.csv";
    e.labels = dir / "train" / "test_labels.csv";
    return run_evaluate(e).file("metrics.json");
  };
  CHECK(pipeline("determinism_a") == pipeline("determinism_b"));
}

TEST_CASE("command line exit codes") {
  const SmallProject p = small_project("exit_codes");
  const std::string out = (p.dir / "out").string();

  Run missing_schema = run_cli("cluster --input '" + p.data.string() + "' --k 2 --out '" + out + "'");
  CHECK(missing_schema.code == 2);
  CHECK(missing_schema.output.find("Usage") != std::string::npos);

  CHECK(run_cli("train --input '" + p.data.string() + "' --labels '" + p.truth.string() +
                "' --model forest --out '" + out + "'")
            .code == 2);
  CHECK(run_cli("synth --levels 5 --out '" + out + "'").code == 2);
  CHECK(run_cli("synth --n 9 --out '" + out + "'").code == 2);
  CHECK(run_cli("").code == 2);
  CHECK(run_cli("--help").code == 0);

  // labels that do not match the rows: data error, nothing written
  const fs::path short_labels = p.dir / "short.csv";
  write_file_atomic(short_labels, "label\n0\n1\n");
  const fs::path failed = p.dir / "failed";
  CHECK(run_cli("train --input '" + p.data.string() + "' --labels '" + short_labels.string() + "' --out '" +
                failed.string() + "'")
            .code == 3);
  CHECK_FALSE(fs::exists(failed));

  // a non-finite numeric input is a numeric failure
  const fs::path trained = emit(run_train(quick_train(p)), p.dir / "train");
  auto rows = parse_csv(read_file(trained / "test.csv"));
  const auto age = std::find(rows[0].begin(), rows[0].end(), "age") - rows[0].begin();
  rows[1][static_cast<std::size_t>(age)] = "nan";
  std::string text;
  for (const auto& r : rows) text += csv_line(r);
  write_file_atomic(p.dir / "nan.csv", text);
  CHECK(run_cli("evaluate --checkpoint '" + (trained / "model.json").string() + "' --input '" +
                (p.dir / "nan.csv").string() + "' --labels '" + (trained / "test_labels.csv").string() +
                "' --out '" + (p.dir / "nan_out").string() + "'")
            .code == 4);
  CHECK_FALSE(fs::exists(p.dir / "nan_out"));

  CHECK(run_cli("explain --checkpoint '" + (trained / "model.json").string() + "' --input '" +
                (trained / "test.csv").string() + "' --out '" + out + "'")
            .code == 3);
}

TEST_CASE("seed comes from the flag, then the config file, then TABSEV_SEED") {
  const fs::path dir = scratch("seed_sources");
  auto seed_of = [&](const std::string& args, const std::string& env) {
    static int run = 0;
    const fs::path out = dir / ("run" + std::to_string(++run));
    REQUIRE(run_cli("synth --n 20 " + args + " --out '" + out.string() + "'", env).code == 0);
    return nlohmann::json::parse(read_file(out / "manifest.json")).at("seed").get<int>();
  };
  write_file_atomic(dir / "config.json", "{\"seed\": 31, \"n\": 20}");
  const std::string config = "--config '" + (dir / "config.json").string() + "'";
  CHECK(seed_of("", "env -u TABSEV_SEED") == 0);
  CHECK(seed_of("", "TABSEV_SEED=17") == 17);
  CHECK(seed_of(config, "TABSEV_SEED=17") == 31);
  CHECK(seed_of(config + " --seed 5", "TABSEV_SEED=17") == 5);

  write_file_atomic(dir / "typo.json", "{\"seeds\": 3}");
  CHECK(run_cli("synth --config '" + (dir / "typo.json").string() + "' --out '" + (dir / "typo").string() + "'")
            .code == 2);
}

TEST_CASE("informative columns dominate the TabNet aggregate mask" * doctest::may_fail()) {
  // Three planted informative features out of 25. Known shortfall: trained
  // masks spread 40-55% of their mass over uninformative columns.
  const fs::path dir = scratch("mask_mass");
  SynthOptions s;
  s.n = 2000;
  s.seed = 7;
  s.informative = 3;
  emit(run_synth(s), dir / "synth");
  TrainOptions t;
  t.input = dir / "synth" / "dataset.csv";
  t.labels = dir / "synth" / "ground_truth.json";
  t.schema = dir / "synth" / "schema.json";
  t.model = ModelKind::kTabNet;
  t.epochs = 40;
  t.folds = 2;
  t.seed = 7;
  t.learning_rate = 0.02;
  t.model_overrides = {{"bn_momentum", 0.95}};
  const fs::path trained = emit(run_train(t), dir / "train");
  ExplainOptions x;
  x.checkpoint = trained / "model.json";
  x.input = trained / "test.csv";
  const auto importance = parse_csv(run_explain(x).file("importance.csv"));
  double informative = 0.0;
  for (std::size_t r = 1; r <= 3; ++r) informative += std::stod(importance[r][1]);
  MESSAGE("informative aggregate mass " << informative);
  CHECK(informative >= 0.6);
}
