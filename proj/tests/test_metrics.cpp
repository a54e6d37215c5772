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
#include "tabsev/error.hpp"
#include "tabsev/metrics.hpp"
#include "tabsev/rng.hpp"

#include <cmath>

using namespace tabsev;

namespace {

ConfusionMatrix binary_counts(std::int64_t tp, std::int64_t tn, std::int64_t fp, std::int64_t fn) {
  ConfusionMatrix m;
  m.counts.resize(2, 2);
  m.counts << tn, fp, fn, tp;
  return m;
}

ConfusionMatrix random_confusion(Rng& rng, int c, int n) {
  Labels t, p;
  for (int i = 0; i < n; ++i) {
    t.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(c))));
    p.push_back(rng.bernoulli(0.6) ? t.back() : static_cast<int>(rng.below(static_cast<std::uint64_t>(c))));
  }
  return confusion(t, p, c);
}

}  // namespace

TEST_CASE("confusion") {
  ConfusionMatrix perfect = confusion({0, 1, 2, 1}, {0, 1, 2, 1}, 3);
  CHECK(perfect.counts.isDiagonal());
  CHECK(perfect.total() == 4);

  ConfusionMatrix m = confusion({1, 1, 0, 0}, {1, 0, 0, 0}, 2);
  CHECK(m.counts(1, 1) == 1);  // TP
  CHECK(m.counts(1, 0) == 1);  // FN
  CHECK(m.counts(0, 0) == 2);  // TN
  CHECK(m.counts(0, 1) == 0);  // FP
  CHECK_THROWS_AS(confusion({2}, {0}, 2), Error);
}

TEST_CASE("scores") {
  Scores a = scores(binary_counts(3, 5, 1, 1));
  CHECK(a.accuracy == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(a.per_class[1].precision == 0.75);
  CHECK(a.per_class[1].recall == 0.75);
  CHECK(a.per_class[1].f1 == 0.75);
  CHECK(a.per_class[1].specificity == doctest::Approx(5.0 / 6.0).epsilon(1e-15));

  Scores b = scores(binary_counts(2, 0, 1, 3));
  CHECK(b.per_class[1].precision == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(b.per_class[1].recall == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(b.per_class[1].f1 == doctest::Approx(0.5).epsilon(1e-15));

  ConfusionMatrix all0 = confusion({0, 0, 0}, {0, 0, 0}, 2);
  Scores c = scores(all0);
  CHECK(c.accuracy == 1.0);
  CHECK(c.per_class[0].f1 == 1.0);
  CHECK(c.per_class[1].precision == 0.0);
  CHECK(c.per_class[1].precision_undefined);
  CHECK(c.per_class[1].recall_undefined);

  SUBCASE("micro scores equal accuracy") {
    Rng rng(1);
    for (int trial = 0; trial < 100; ++trial) {
      const Scores s = scores(random_confusion(rng, 2 + static_cast<int>(rng.below(5)), 1 + static_cast<int>(rng.below(200))));
      CHECK(s.precision_micro == s.accuracy);
      CHECK(s.recall_micro == s.accuracy);
      CHECK(s.f1_micro == s.accuracy);
    }
  }
  SUBCASE("one-vs-rest recomputation and macro bounds") {
    Rng rng(2);
    for (int trial = 0; trial < 100; ++trial) {
      const int k = 2 + static_cast<int>(rng.below(4));
      const ConfusionMatrix m = random_confusion(rng, k, 50 + static_cast<int>(rng.below(100)));
      const Scores s = scores(m);
      double lo = 1.0, hi = 0.0;
      for (int cls = 0; cls < k; ++cls) {
        // rebuild the 2x2 table for this class by scanning every cell
        std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
        for (int r = 0; r < k; ++r)
          for (int c2 = 0; c2 < k; ++c2) {
            const auto n = m.counts(r, c2);
            if (r == cls && c2 == cls) tp += n;
            else if (c2 == cls) fp += n;
            else if (r == cls) fn += n;
            else tn += n;
          }
        const ClassScores& cs = s.per_class[static_cast<std::size_t>(cls)];
        if (tp + fp) CHECK(cs.precision == static_cast<double>(tp) / static_cast<double>(tp + fp));
        if (tp + fn) CHECK(cs.recall == static_cast<double>(tp) / static_cast<double>(tp + fn));
        if (tn + fp) CHECK(cs.specificity == static_cast<double>(tn) / static_cast<double>(tn + fp));
        if (tp) CHECK(cs.f1 == doctest::Approx(2.0 * tp / static_cast<double>(2 * tp + fp + fn)).epsilon(1e-14));
        lo = std::min(lo, cs.f1);
        hi = std::max(hi, cs.f1);
      }
      CHECK(s.f1_macro >= lo - 1e-15);
      CHECK(s.f1_macro <= hi + 1e-15);
    }
  }
}

TEST_CASE("roc and auc") {
  std::vector<double> s{0.9, 0.1, 0.8, 0.2};
  std::vector<int> y{1, 0, 0, 1};
  RocCurve curve = roc_points(s, y);
  // thresholds 0.9, 0.8, 0.2, 0.1 after the +inf sentinel
  CHECK(curve.fpr == std::vector<double>{0.0, 0.0, 0.5, 0.5, 1.0});
  CHECK(curve.tpr == std::vector<double>{0.0, 0.5, 0.5, 1.0, 1.0});
  CHECK(std::isinf(curve.thresholds[0]));
  CHECK(auc(curve) == 0.75);

  RocCurve perfect = roc_points(std::vector<double>{0.9, 0.8, 0.2, 0.1}, std::vector<int>{1, 1, 0, 0});
  bool through_corner = false;
  for (std::size_t i = 0; i < perfect.fpr.size(); ++i) through_corner |= perfect.fpr[i] == 0.0 && perfect.tpr[i] == 1.0;
  CHECK(through_corner);
  CHECK(auc(perfect) == 1.0);

  RocCurve flat = roc_points(std::vector<double>{0.3, 0.3, 0.3}, std::vector<int>{1, 0, 1});
  CHECK(flat.fpr.size() == 2);
  CHECK(auc(flat) == 0.5);

  CHECK_THROWS_AS(roc_points(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), Error);

  SUBCASE("area equals pairwise concordance with ties") {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
      const int n = 2 + static_cast<int>(rng.below(80));
      std::vector<double> scores;
      std::vector<int> labels;
      for (int i = 0; i < n; ++i) {
        scores.push_back(static_cast<double>(rng.below(6)) / 5.0);  // coarse grid forces ties
        labels.push_back(rng.bernoulli(0.4));
      }
      labels[0] = 1;
      labels[1] = 0;
      const double got = auc(roc_points(scores, labels));
      CHECK(std::abs(got - oracle::pairwise_auc(scores, labels)) <= 1e-9);

      const RocCurve c = roc_points(scores, labels);
      CHECK(c.fpr.front() == 0.0);
      CHECK(c.tpr.back() == 1.0);
      for (std::size_t i = 1; i < c.fpr.size(); ++i) {
        CHECK(c.fpr[i] >= c.fpr[i - 1]);
        CHECK(c.tpr[i] >= c.tpr[i - 1]);
      }
      std::vector<double> exp_scores, affine;
      for (double v : scores) {
        exp_scores.push_back(std::exp(v));
        affine.push_back(3.0 * v - 7.0);
      }
      CHECK(std::abs(auc(roc_points(exp_scores, labels)) - got) <= 1e-12);
      CHECK(std::abs(auc(roc_points(affine, labels)) - got) <= 1e-12);
    }
  }
}

TEST_CASE("multiclass_auc") {
  Rng rng(4);
  Matrix p2(40, 2);
  Labels y2;
  std::vector<double> col1;
  std::vector<int> pos;
  for (Index i = 0; i < 40; ++i) {
    const double v = rng.uniform();
    p2(i, 0) = 1.0 - v;
    p2(i, 1) = v;
    y2.push_back(rng.bernoulli(0.5));
    col1.push_back(v);
    pos.push_back(y2.back());
  }
  y2[0] = 0;
  y2[1] = 1;
  pos[0] = 0;
  pos[1] = 1;
  CHECK(std::abs(multiclass_auc(p2, y2).per_class[1] - auc(roc_points(col1, pos))) <= 1e-12);

  Matrix onehot = Matrix::Zero(6, 3);
  Labels y3{0, 1, 2, 0, 1, 2};
  for (Index i = 0; i < 6; ++i) onehot(i, y3[static_cast<std::size_t>(i)]) = 1.0;
  const MulticlassAuc perfect = multiclass_auc(onehot, y3);
  for (double a : perfect.per_class) CHECK(a == 1.0);

  Matrix noise(10000, 4);
  Labels yn;
  for (Index i = 0; i < noise.rows(); ++i) {
    for (Index k = 0; k < 4; ++k) noise(i, k) = rng.uniform();
    noise.row(i) /= noise.row(i).sum();
    yn.push_back(static_cast<int>(rng.below(4)));
  }
  CHECK(std::abs(multiclass_auc(noise, yn).macro - 0.5) <= 0.02);

  const MulticlassAuc absent = multiclass_auc(onehot, Labels{0, 1, 0, 0, 1, 1});
  CHECK_FALSE(absent.defined[2]);
  CHECK(absent.macro == doctest::Approx(0.5 * (absent.per_class[0] + absent.per_class[1])));
}

TEST_CASE("adjusted rand index") {
  CHECK(adjusted_rand_index({0, 0, 1, 1}, {1, 1, 0, 0}) == 1.0);
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    Labels a, b;
    const int n = 5 + static_cast<int>(rng.below(60));
    for (int i = 0; i < n; ++i) {
      a.push_back(static_cast<int>(rng.below(4)));
      b.push_back(rng.bernoulli(0.7) ? a.back() : static_cast<int>(rng.below(3)));
    }
    CHECK(std::abs(adjusted_rand_index(a, b) - oracle::adjusted_rand_pairs(a, b)) <= 1e-12);
  }
}

TEST_CASE("evaluation report") {
  Matrix p(4, 1);
  p << 0.9, 0.1, 0.8, 0.2;
  const EvalReport r = evaluate_predictions(p, {1, 0, 0, 1}, 0.4);
  CHECK(r.auc == 0.75);
  const auto j = r.to_json("test");
  CHECK(j["test_accuracy"] == 0.5);
  CHECK(j["test_auc"] == 0.75);
  CHECK(j["test_loss"] == 0.4);
  CHECK(j.contains("test_recall_class_1"));
  CHECK(j.contains("test_precision_macro"));
  CHECK(j.contains("test_f1_micro"));
  CHECK(j.contains("test_specificity_class_0"));
  CHECK(j["test_confusion_matrix"] == nlohmann::json::parse("[[1,1],[1,1]]"));

  Matrix q(3, 3);
  q << 0.4, 0.4, 0.2, 0.1, 0.1, 0.8, 0.3, 0.6, 0.1;
  CHECK(predict_labels(q) == Labels{0, 2, 1});
}
