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

#include "support/model_harness.hpp"
#include "tabsev/error.hpp"
#include "tabsev/models.hpp"
#include "tabsev/ops.hpp"

#include <cmath>
#include <numeric>

using namespace tabsev;
using harness::random_batch;
using harness::tiny_schema;

namespace {

ErrorKind kind_thrown(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::kIo;
}

Matrix logits_of(Model& m, const Batch& b) {
  Tape tape;
  return m.logits(tape, b, {}).value();
}

const ModelKind kAllKinds[] = {ModelKind::kWideDeep, ModelKind::kTabTransformer, ModelKind::kTabNet};

}  // namespace

TEST_CASE("configs") {
  CHECK(model_kind_from_string("tabnet") == ModelKind::kTabNet);
  CHECK(kind_thrown([] { model_kind_from_string("gbdt"); }) == ErrorKind::kConfigMismatch);

  const auto tt3 = std::get<TabTransformerConfig>(default_config(ModelKind::kTabTransformer, 3));
  CHECK(tt3.blocks == 6);
  CHECK(tt3.heads == 8);
  CHECK(tt3.output_dim == 3);
  const auto tt4 = std::get<TabTransformerConfig>(default_config(ModelKind::kTabTransformer, 4));
  CHECK(tt4.blocks == 4);
  CHECK(tt4.heads == 4);
  CHECK(output_dim_of(default_config(ModelKind::kWideDeep, 2)) == 1);

  for (ModelKind k : kAllKinds) {
    const ModelConfig c = harness::tiny_config(k, 3);
    const ModelConfig back = config_from_json(config_to_json(c), 3);
    CHECK(config_to_json(back) == config_to_json(c));
  }
  const ModelConfig partial = config_from_json(nlohmann::json::parse(R"({"kind":"tabnet","n_steps":3})"), 2);
  CHECK(std::get<TabNetConfig>(partial).n_steps == 3);
  CHECK(std::get<TabNetConfig>(partial).gamma_relax == 1.3);

  const InputSchema s = tiny_schema(3, 2);
  CHECK(InputSchema::from_json(s.to_json()) == s);
}

TEST_CASE("build errors") {
  const InputSchema s = tiny_schema(3, 1);
  TabTransformerConfig tt;
  tt.emb_dim = 33;
  tt.heads = 4;
  CHECK(kind_thrown([&] { build_model(tt, s, 1); }) == ErrorKind::kHeadDivisibility);

  TabNetConfig tn;
  tn.gamma_relax = 0.9;
  CHECK(kind_thrown([&] { build_model(tn, s, 1); }) == ErrorKind::kConfigMismatch);
  tn = TabNetConfig{};
  tn.n_steps = 0;
  CHECK(kind_thrown([&] { build_model(tn, s, 1); }) == ErrorKind::kConfigMismatch);

  InputSchema broken = s;
  broken.vocab_sizes.pop_back();
  CHECK(kind_thrown([&] { build_model(WideDeepConfig{}, broken, 1); }) == ErrorKind::kConfigMismatch);

  auto model = build_model(harness::tiny_config(ModelKind::kWideDeep, 1), s, 1);
  Rng rng(1);
  Batch b = random_batch(s, 4, rng);
  Batch wrong = b;
  wrong.cont.resize(4, 2);
  wrong.cont.setZero();
  CHECK(kind_thrown([&] { model->predict(wrong); }) == ErrorKind::kConfigMismatch);
  Batch out_of_vocab = b;
  out_of_vocab.cat(0, 0) = 3;
  CHECK(kind_thrown([&] { model->predict(out_of_vocab); }) == ErrorKind::kConfigMismatch);
  Batch nan = b;
  nan.cont(1, 0) = std::nan("");
  CHECK(kind_thrown([&] { model->predict(nan); }) == ErrorKind::kNonFiniteInput);
}

TEST_CASE("parameter allocation") {
  InputSchema s;
  Index expected = 0;
  for (Index j = 0; j < 24; ++j) {
    s.cat_names.push_back("f" + std::to_string(j));
    s.vocab_sizes.push_back(2 + j % 5);
    expected += (2 + j % 5) * 32;
  }
  s.cont_names = {"age"};
  auto wd = build_model(WideDeepConfig{}, s, 7);
  Index embedding = 0;
  for (const Parameter& p : wd->params())
    if (p.name.find("embedding") != std::string::npos) embedding += p.value.size();
  CHECK(embedding == expected);

  for (ModelKind k : kAllKinds) {
    auto a = build_model(default_config(k, 2), s, 11);
    auto b = build_model(default_config(k, 2), s, 11);
    auto c = build_model(default_config(k, 2), s, 12);
    CHECK(a->params() == b->params());
    CHECK_FALSE(a->params() == c->params());
  }
}

TEST_CASE("outputs are probabilities and inference is pure") {
  const InputSchema s = tiny_schema(5, 2);
  Rng rng(3);
  const Batch b = random_batch(s, 40, rng);
  for (ModelKind k : kAllKinds) {
    for (int classes : {2, 3, 4}) {
      auto model = build_model(default_config(k, classes), s, 5);
      const Matrix p = model->predict(b);
      CHECK(p.rows() == 40);
      CHECK(p.cols() == (classes == 2 ? 1 : classes));
      if (classes == 2) {
        CHECK(p.minCoeff() > 0.0);
        CHECK(p.maxCoeff() < 1.0);
      } else {
        CHECK((p.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-9);
        CHECK(p.minCoeff() >= 0.0);
      }
      const Matrix again = model->predict(b);
      CHECK(p == again);
      // a single row gives the same answer as inside a batch
      const Matrix alone = model->predict(b.take({7}));
      CHECK((alone.row(0) - p.row(7)).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("wide and deep") {
  const InputSchema s = tiny_schema(4, 2);
  Rng rng(9);
  const Batch b = random_batch(s, 12, rng);
  WideDeep model(WideDeepConfig{}, s, 3);

  SUBCASE("all weights zero gives one half") {
    for (Parameter& p : model.params()) p.value.setZero();
    const Matrix p = model.predict(b);
    CHECK((p.array() == 0.5).all());
  }
  SUBCASE("zeroed deep head leaves a logistic regression") {
    model.params().value("deep/head/kernel").setZero();
    model.params().value("deep/head/bias").setZero();
    Matrix x(12, 6);
    x.leftCols(4) = b.cat.cast<double>();
    x.rightCols(2) = b.cont;
    const Matrix& w = model.params().value("wide/kernel");
    const Matrix& c = model.params().value("wide/bias");
    Matrix expected(12, 1);
    for (Index i = 0; i < 12; ++i) {
      double z = c(0, 0);
      for (Index j = 0; j < 6; ++j) z += x(i, j) * w(j, 0);
      expected(i, 0) = z;
    }
    CHECK((logits_of(model, b) - expected).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("one-hot wide input") {
    WideDeepConfig c;
    c.wide_one_hot = true;
    WideDeep oh(c, s, 3);
    const Index width = std::accumulate(s.vocab_sizes.begin(), s.vocab_sizes.end(), Index{0}) + 2;
    CHECK(oh.params().value("wide/kernel").rows() == width);
    oh.params().value("deep/head/kernel").setZero();
    oh.params().value("deep/head/bias").setZero();
    const Matrix& w = oh.params().value("wide/kernel");
    const Matrix z = logits_of(oh, b);
    for (Index i = 0; i < 12; ++i) {
      double expected = oh.params().value("wide/bias")(0, 0);
      Index offset = 0;
      for (Index j = 0; j < 4; ++j) {
        expected += w(offset + b.cat(i, j), 0);
        offset += s.vocab_sizes[static_cast<std::size_t>(j)];
      }
      expected += b.cont(i, 0) * w(offset, 0) + b.cont(i, 1) * w(offset + 1, 0);
      CHECK(std::abs(z(i, 0) - expected) <= 1e-12);
    }
  }
}

TEST_CASE("tabtransformer") {
  const InputSchema s = tiny_schema(4, 2);
  Rng rng(13);
  const Batch b = random_batch(s, 10, rng);

  SUBCASE("no blocks reduces to an MLP over embeddings") {
    TabTransformerConfig c;
    c.blocks = 0;
    TabTransformer model(c, s, 21);
    ParamStore& store = model.params();
    Tape tape;
    std::vector<Var> parts;
    for (Index j = 0; j < 4; ++j) {
      std::vector<int> codes;
      for (Index i = 0; i < 10; ++i) codes.push_back(b.cat(i, j));
      parts.push_back(embedding_lookup(tape.parameter(store, "embedding_" + std::to_string(j) + "/table"), codes));
    }
    parts.push_back(layer_norm(tape.constant(b.cont), tape.parameter(store, "cont_norm/gamma"),
                               tape.parameter(store, "cont_norm/beta")));
    Var h = concat(parts, 1);
    for (int l = 0; l < 4; ++l) {
      const std::string n = "mlp_" + std::to_string(l);
      h = relu(add(matmul(h, tape.parameter(store, n + "/kernel")), tape.parameter(store, n + "/bias")));
    }
    h = add(matmul(h, tape.parameter(store, "head/kernel")), tape.parameter(store, "head/bias"));
    CHECK((logits_of(model, b) - h.value()).cwiseAbs().maxCoeff() <= 1e-12);
  }

  SUBCASE("permuting categorical columns with their parameters") {
    TabTransformerConfig c = std::get<TabTransformerConfig>(default_config(ModelKind::kTabTransformer, 3));
    TabTransformer a(c, s, 22);
    const std::vector<Index> perm{2, 0, 3, 1};  // column j of b is column perm[j] of a
    InputSchema ps = s;
    Batch pb = b;
    for (Index j = 0; j < 4; ++j) {
      ps.cat_names[static_cast<std::size_t>(j)] = s.cat_names[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])];
      ps.vocab_sizes[static_cast<std::size_t>(j)] = s.vocab_sizes[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])];
      pb.cat.col(j) = b.cat.col(perm[static_cast<std::size_t>(j)]);
    }
    TabTransformer p(c, ps, 99);
    for (Parameter& q : p.params()) {
      if (q.name.rfind("embedding_", 0) == 0) {
        const Index j = std::stoi(q.name.substr(10));
        q.value = a.params().value("embedding_" + std::to_string(perm[static_cast<std::size_t>(j)]) + "/table");
      } else if (q.name == "mlp_0/kernel") {
        const Matrix& w = a.params().value(q.name);
        for (Index j = 0; j < 4; ++j) q.value.middleRows(j * 32, 32) = w.middleRows(perm[static_cast<std::size_t>(j)] * 32, 32);
        q.value.bottomRows(2) = w.bottomRows(2);
      } else {
        q.value = a.params().value(q.name);
      }
    }
    CHECK((a.predict(b) - p.predict(pb)).cwiseAbs().maxCoeff() <= 1e-9);
  }

  SUBCASE("rows do not interact") {
    TabTransformer model(TabTransformerConfig{}, s, 4);
    Batch shuffled = b;
    const auto order = Rng(5).permutation(10);
    shuffled = b.take(order);
    const Matrix base = model.predict(b);
    const Matrix moved = model.predict(shuffled);
    for (Index i = 0; i < 10; ++i)
      CHECK((moved.row(i) - base.row(static_cast<Index>(order[static_cast<std::size_t>(i)]))).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("tabnet masks") {
  const InputSchema s = tiny_schema(6, 1);
  Rng rng(17);
  const Batch b = random_batch(s, 64, rng);

  SUBCASE("simplex masks, telescoping priors, aggregate rows") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      TabNetConfig c;
      c.gamma_relax = 1.0 + 0.1 * static_cast<double>(seed % 4);
      TabNet net(c, s, seed);
      const TabNetState st = net.explain(b);
      REQUIRE(st.masks.size() == 7);
      REQUIRE(st.priors.size() == 8);
      CHECK((st.priors[0].array() == 1.0).all());
      Matrix product = Matrix::Ones(64, net.input_width());
      for (std::size_t i = 0; i < st.masks.size(); ++i) {
        CHECK((st.masks[i].rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-6);
        CHECK(st.masks[i].minCoeff() >= 0.0);
        product = product.cwiseProduct((c.gamma_relax - st.masks[i].array()).matrix());
        CHECK((st.priors[i + 1] - product).cwiseAbs().maxCoeff() <= 1e-9);
      }
      CHECK(st.eta.minCoeff() >= 0.0);
      const Matrix agg = aggregate_mask(st);
      CHECK((agg.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-6);
      const Matrix grouped = group_columns(agg, net.feature_widths());
      CHECK(grouped.cols() == 7);
      CHECK((grouped.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-6);
    }
  }

  SUBCASE("identical rows") {
    Batch same = b.take(std::vector<std::size_t>(8, 3));
    TabNet net(TabNetConfig{}, s, 2);
    const TabNetState st = net.explain(same);
    const Matrix z = logits_of(net, same);
    for (Index i = 1; i < 8; ++i) {
      CHECK(z.row(i) == z.row(0));
      for (const Matrix& m : st.masks) CHECK(m.row(i) == m.row(0));
    }
  }

  SUBCASE("one step aggregate equals the step mask") {
    TabNetConfig c;
    c.n_steps = 1;
    TabNet net(c, s, 6);
    const TabNetState st = net.explain(b);
    const Matrix agg = aggregate_mask(st);
    for (Index i = 0; i < 64; ++i) {
      if (st.eta(i, 0) > 0.0)
        CHECK((agg.row(i) - st.masks[0].row(i)).cwiseAbs().maxCoeff() <= 1e-12);
      else
        CHECK((agg.row(i).array() == 1.0 / static_cast<double>(net.input_width())).all());
    }
  }

  SUBCASE("equal step weights give the mean mask") {
    TabNet net(TabNetConfig{}, s, 8);
    TabNetState st = net.explain(b);
    st.eta.setConstant(0.37);
    Matrix mean = Matrix::Zero(64, net.input_width());
    for (const Matrix& m : st.masks) mean += m;
    mean /= 7.0;
    for (Index i = 0; i < 64; ++i) mean.row(i) /= mean.row(i).sum();
    CHECK((aggregate_mask(st) - mean).cwiseAbs().maxCoeff() <= 1e-12);
  }

  SUBCASE("gamma one: feature use across steps") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      TabNetConfig c;
      c.gamma_relax = 1.0;
      TabNet net(c, s, 40 + seed);
      const TabNetState st = net.explain(b);
      Matrix total = Matrix::Zero(64, net.input_width());
      for (const Matrix& m : st.masks) total += m;
      CHECK(total.maxCoeff() <= 1.0 + 1e-6);
    }
  }
}

TEST_CASE("tabnet: a fully used feature under gamma one") {
  const InputSchema s = tiny_schema(3, 1);
  Rng rng(23);
  const Batch b = random_batch(s, 16, rng);
  TabNetConfig c;
  c.gamma_relax = 1.0;
  c.n_steps = 4;
  c.emb_dim = 2;
  TabNet net(c, s, 31);
  // push every step-1 logit far below the one for the numeric column
  const Index d = net.input_width() - 1;
  net.params().value("step_1/attention_fc/kernel").setZero();
  Matrix& beta = net.params().value("step_1/attention_bn/beta");
  beta.setConstant(-50.0);
  beta(0, d) = 50.0;

  SUBCASE("later steps reuse it exactly when the other logits lack unit mass") {
    const TabNetState st = net.explain(b);
    CHECK((st.masks[0].col(d).array() == 1.0).all());
    int unused = 0, reused = 0;
    for (std::size_t i = 1; i < st.masks.size(); ++i) {
      // rebuild the attention logits of step i + 1 from the stored state
      const std::string n = "step_" + std::to_string(i + 1) + "/attention_";
      const ParamStore& ps = net.params();
      Matrix h = st.attention[i] * ps.value(n + "fc/kernel");
      for (Index j = 0; j < h.cols(); ++j)
        h.col(j) = ((h.col(j).array() - ps.value(n + "bn/moving_mean")(0, j)) /
                        std::sqrt(ps.value(n + "bn/moving_var")(0, j) + 1e-5) * ps.value(n + "bn/gamma")(0, j) +
                    ps.value(n + "bn/beta")(0, j))
                       .matrix();
      const Matrix z = st.priors[i].cwiseProduct(h);
      for (Index r = 0; r < 16; ++r) {
        CHECK(st.priors[i](r, d) == 0.0);
        const double positive = z.row(r).cwiseMax(0.0).sum();
        if (positive >= 1.0) {
          CHECK(st.masks[i](r, d) == 0.0);
          ++unused;
        } else {
          CHECK(st.masks[i](r, d) > 0.0);
          ++reused;
        }
      }
    }
    MESSAGE("rows leaving the feature unused: " << unused << ", reusing it: " << reused);
  }
  SUBCASE("a step whose other logits are all non-positive reuses it") {
    // the prior zeroes the used entry's logit, but sparsemax still gives a
    // zero logit mass when the remaining positive parts sum to less than one
    net.params().value("step_2/attention_fc/kernel").setZero();
    net.params().value("step_2/attention_bn/beta").setConstant(-2.0);
    const TabNetState st = net.explain(b);
    CHECK((st.masks[1].col(d).array() == 1.0).all());
    Matrix total = Matrix::Zero(16, net.input_width());
    for (const Matrix& m : st.masks) total += m;
    CHECK(total.col(d).minCoeff() >= 2.0);
  }
}

TEST_CASE("sparsemax gives a zero logit mass exactly below unit positive mass") {
  Rng rng(29);
  for (int trial = 0; trial < 500; ++trial) {
    const Index n = 2 + static_cast<Index>(rng.below(8));
    Matrix z(1, n);
    double positive = 0.0;
    z(0, 0) = 0.0;
    for (Index j = 1; j < n; ++j) {
      z(0, j) = 1.5 * rng.normal();
      positive += std::max(z(0, j), 0.0);
    }
    Tape tape;
    const double mass = sparsemax(tape.constant(z), 1).value()(0, 0);
    if (positive < 1.0 - 1e-9) CHECK(mass > 0.0);
    if (positive > 1.0 + 1e-9) CHECK(mass == 0.0);
  }
}

TEST_CASE("tabnet occlusion") {
  // A feature whose mask stays zero at every step still reaches the step-0
  // splitter, which reads the whole input. Cutting it out of the shared first
  // layer removes every remaining path.
  const InputSchema s = tiny_schema(6, 1);
  const Index f = 2;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    TabNetConfig c;
    c.n_steps = 3;
    c.emb_dim = 2;
    TabNet net(c, s, seed);
    for (Index st = 1; st <= 3; ++st) {
      Matrix& beta = net.params().value("step_" + std::to_string(st) + "/attention_bn/beta");
      beta.setConstant(1.0);
      beta.middleCols(2 * f, 2).setConstant(-100.0);
    }
    Rng rng(100 + seed);
    const Batch b = random_batch(s, 64, rng);
    Batch permuted = b;
    const auto order = rng.permutation(64);
    for (Index i = 0; i < 64; ++i) permuted.cat(i, f) = b.cat(static_cast<Index>(order[static_cast<std::size_t>(i)]), f);

    const Matrix grouped = group_columns(aggregate_mask(net.explain(b)), net.feature_widths());
    REQUIRE(grouped.col(f).sum() == 0.0);
    const double leak = (net.predict(permuted) - net.predict(b)).cwiseAbs().maxCoeff();
    MESSAGE("seed " << seed << ": splitter leak " << leak);

    net.params().value("shared_0/kernel").middleRows(2 * f, 2).setZero();
    CHECK((net.predict(permuted) - net.predict(b)).cwiseAbs().maxCoeff() <= 1e-6);
  }
}

TEST_CASE("full-model gradients") {
  const InputSchema s = tiny_schema(3, 1);
  for (ModelKind k : kAllKinds) {
    for (Index out : {1, 3}) {
      for (std::uint64_t seed = 0; seed < 3; ++seed) {
        auto model = build_model(harness::tiny_config(k, out), s, seed);
        Rng rng(1000 + seed);
        harness::jitter(*model, rng);
        const Batch b = random_batch(s, 6, rng);
        const Matrix y = harness::random_targets(6, out, rng);
        const double err = harness::model_gradient_check(*model, b, y, Mode::kTrain);
        INFO(to_string(k), " out ", out, " seed ", seed);
        CHECK(err <= 1e-4);
      }
    }
  }
}

TEST_CASE("train mode updates batch-norm statistics only") {
  const InputSchema s = tiny_schema(3, 1);
  TabNet net(std::get<TabNetConfig>(harness::tiny_config(ModelKind::kTabNet, 1)), s, 3);
  Rng rng(4);
  const Batch b = random_batch(s, 10, rng);
  const ParamStore before = net.params();
  Tape tape;
  net.forward(tape, b, {Mode::kTrain, nullptr});
  for (const Parameter& p : net.params()) {
    if (p.trainable)
      CHECK(p.value == before.get(p.name).value);
    else if (p.name.find("moving_mean") != std::string::npos)
      CHECK_FALSE(p.value == before.get(p.name).value);
  }
}

TEST_CASE("dropout needs a stream in train mode") {
  const InputSchema s = tiny_schema(3, 1);
  WideDeepConfig c;
  c.dropout = 0.2;
  WideDeep model(c, s, 1);
  Rng rng(2);
  const Batch b = random_batch(s, 5, rng);
  Tape tape;
  CHECK(kind_thrown([&] { model.forward(tape, b, {Mode::kTrain, nullptr}); }) == ErrorKind::kConfigMismatch);
  Rng stream(3);
  Tape t2;
  CHECK(model.forward(t2, b, {Mode::kTrain, &stream}).rows() == 5);
}
