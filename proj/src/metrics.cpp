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

#include "tabsev/metrics.hpp"

#include "tabsev/error.hpp"
#include "tabsev/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace tabsev {

namespace {

double ratio(std::int64_t num, std::int64_t den, bool& undefined) {
  undefined = den == 0;
  return undefined ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double p, double r, bool& undefined) {
  undefined = p + r == 0.0;
  return undefined ? 0.0 : 2.0 * p * r / (p + r);
}

double choose2(double n) { return 0.5 * n * (n - 1.0); }

}  // namespace

ConfusionMatrix confusion(const Labels& y_true, const Labels& y_pred, int classes) {
  if (y_true.size() != y_pred.size()) throw Error(ErrorKind::kLengthMismatch, "label vectors differ in length");
  if (classes < 1) throw Error(ErrorKind::kLabelOutOfRange, "need at least one class");
  ConfusionMatrix m;
  m.counts = MatrixX<std::int64_t>::Zero(classes, classes);
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const int t = y_true[i], p = y_pred[i];
    if (t < 0 || t >= classes || p < 0 || p >= classes)
      throw Error(ErrorKind::kLabelOutOfRange, "label outside [0, " + std::to_string(classes) + ")");
    ++m.counts(t, p);
  }
  return m;
}

Scores scores(const ConfusionMatrix& matrix) {
  const int c = matrix.classes();
  const std::int64_t total = matrix.total();
  Scores s;
  bool unused = false;
  s.accuracy = ratio(matrix.counts.diagonal().sum(), total, unused);
  std::int64_t tp_all = 0, fp_all = 0, fn_all = 0;
  for (int k = 0; k < c; ++k) {
    const std::int64_t tp = matrix.counts(k, k);
    const std::int64_t fn = matrix.counts.row(k).sum() - tp;
    const std::int64_t fp = matrix.counts.col(k).sum() - tp;
    const std::int64_t tn = total - tp - fn - fp;
    ClassScores cs;
    cs.precision = ratio(tp, tp + fp, cs.precision_undefined);
    cs.recall = ratio(tp, tp + fn, cs.recall_undefined);
    cs.specificity = ratio(tn, tn + fp, cs.specificity_undefined);
    cs.f1 = harmonic(cs.precision, cs.recall, cs.f1_undefined);
    s.precision_macro += cs.precision / c;
    s.recall_macro += cs.recall / c;
    s.f1_macro += cs.f1 / c;
    s.per_class.push_back(cs);
    tp_all += tp;
    fp_all += fp;
    fn_all += fn;
  }
  s.precision_micro = ratio(tp_all, tp_all + fp_all, unused);
  s.recall_micro = ratio(tp_all, tp_all + fn_all, unused);
  // pooled-count form; with one label per row it is 2T / 2N, bitwise the accuracy
  s.f1_micro = ratio(2 * tp_all, 2 * tp_all + fp_all + fn_all, unused);
  return s;
}

RocCurve roc_points(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw Error(ErrorKind::kLengthMismatch, "scores and labels differ in length");
  std::int64_t positives = 0, negatives = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!std::isfinite(scores[i])) throw Error(ErrorKind::kNonFiniteInput, "non-finite score");
    (labels[i] ? positives : negatives) += 1;
  }
  if (positives == 0 || negatives == 0) throw Error(ErrorKind::kOneClassOnly, "ROC needs both classes");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  RocCurve curve;
  curve.fpr.push_back(0.0);
  curve.tpr.push_back(0.0);
  curve.thresholds.push_back(std::numeric_limits<double>::infinity());
  std::int64_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double cut = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == cut; ++i) (labels[order[i]] ? tp : fp) += 1;
    curve.fpr.push_back(static_cast<double>(fp) / static_cast<double>(negatives));
    curve.tpr.push_back(static_cast<double>(tp) / static_cast<double>(positives));
    curve.thresholds.push_back(cut);
  }
  return curve;
}

double auc(const RocCurve& curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.fpr.size(); ++i)
    area += (curve.fpr[i] - curve.fpr[i - 1]) * (curve.tpr[i] + curve.tpr[i - 1]) * 0.5;
  return area;
}

MulticlassAuc multiclass_auc(const Matrix& probabilities, const Labels& labels) {
  const Index c = probabilities.cols();
  if (c < 2) throw Error(ErrorKind::kDimensionMismatch, "multiclass AUC needs at least two columns");
  if (static_cast<std::size_t>(probabilities.rows()) != labels.size())
    throw Error(ErrorKind::kLengthMismatch, "probabilities and labels differ in length");
  MulticlassAuc out;
  std::vector<double> column(labels.size());
  std::vector<int> positive(labels.size());
  int defined = 0;
  for (Index k = 0; k < c; ++k) {
    bool has_pos = false, has_neg = false;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      column[i] = probabilities(static_cast<Index>(i), k);
      positive[i] = labels[i] == k;
      (positive[i] ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) {
      out.per_class.push_back(0.0);
      out.defined.push_back(false);
      continue;
    }
    out.per_class.push_back(auc(roc_points(column, positive)));
    out.defined.push_back(true);
    out.macro += out.per_class.back();
    ++defined;
  }
  if (defined == 0) throw Error(ErrorKind::kClassAbsent, "no class has both positives and negatives");
  out.macro /= defined;
  return out;
}

Labels predict_labels(const Matrix& probabilities) {
  Labels out(static_cast<std::size_t>(probabilities.rows()));
  if (probabilities.cols() == 1) {
    for (Index i = 0; i < probabilities.rows(); ++i) out[static_cast<std::size_t>(i)] = probabilities(i, 0) > 0.5;
    return out;
  }
  return kernels::argmax_rows(probabilities);
}

double adjusted_rand_index(const Labels& a, const Labels& b) {
  if (a.size() != b.size()) throw Error(ErrorKind::kLengthMismatch, "partitions differ in length");
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  double index = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [key, n] : joint) index += choose2(n);
  for (const auto& [key, n] : rows) sum_a += choose2(n);
  for (const auto& [key, n] : cols) sum_b += choose2(n);
  const double total = choose2(static_cast<double>(a.size()));
  const double expected = total > 0 ? sum_a * sum_b / total : 0.0;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

EvalReport evaluate_predictions(const Matrix& probabilities, const Labels& labels, double loss) {
  if (static_cast<std::size_t>(probabilities.rows()) != labels.size())
    throw Error(ErrorKind::kLengthMismatch, "probabilities and labels differ in length");
  EvalReport r;
  r.classes = probabilities.cols() == 1 ? 2 : static_cast<int>(probabilities.cols());
  r.loss = loss;
  r.confusion = confusion(labels, predict_labels(probabilities), r.classes);
  r.scores = scores(r.confusion);
  Matrix per_class = probabilities;
  if (probabilities.cols() == 1) {
    per_class.resize(probabilities.rows(), 2);
    per_class.col(0) = 1.0 - probabilities.col(0).array();
    per_class.col(1) = probabilities.col(0);
  }
  r.class_auc = multiclass_auc(per_class, labels);
  if (probabilities.cols() == 1) {
    if (!r.class_auc.defined[1]) throw Error(ErrorKind::kOneClassOnly, "binary AUC needs both classes");
    r.auc = r.class_auc.per_class[1];
  } else {
    r.auc = r.class_auc.macro;
  }
  return r;
}

nlohmann::json EvalReport::to_json(const std::string& prefix) const {
  nlohmann::json j;
  const std::string p = prefix + "_";
  j[p + "accuracy"] = scores.accuracy;
  j[p + "loss"] = loss;
  j[p + "auc"] = auc;
  nlohmann::json degenerate = nlohmann::json::array();
  for (int k = 0; k < classes; ++k) {
    const ClassScores& cs = scores.per_class[static_cast<std::size_t>(k)];
    const std::string suffix = "_class_" + std::to_string(k);
    j[p + "precision" + suffix] = cs.precision;
    j[p + "recall" + suffix] = cs.recall;
    j[p + "specificity" + suffix] = cs.specificity;
    j[p + "f1" + suffix] = cs.f1;
    if (class_auc.defined[static_cast<std::size_t>(k)]) j[p + "auc" + suffix] = class_auc.per_class[static_cast<std::size_t>(k)];
    if (cs.precision_undefined) degenerate.push_back("precision" + suffix);
    if (cs.recall_undefined) degenerate.push_back("recall" + suffix);
    if (cs.specificity_undefined) degenerate.push_back("specificity" + suffix);
    if (cs.f1_undefined) degenerate.push_back("f1" + suffix);
    if (!class_auc.defined[static_cast<std::size_t>(k)]) degenerate.push_back("auc" + suffix);
  }
  if (classes == 2) {
    // positive-class figures for binary tasks
    j[p + "precision"] = scores.per_class[1].precision;
    j[p + "recall"] = scores.per_class[1].recall;
    j[p + "f1"] = scores.per_class[1].f1;
  }
  j[p + "precision_macro"] = scores.precision_macro;
  j[p + "recall_macro"] = scores.recall_macro;
  j[p + "f1_macro"] = scores.f1_macro;
  j[p + "precision_micro"] = scores.precision_micro;
  j[p + "recall_micro"] = scores.recall_micro;
  j[p + "f1_micro"] = scores.f1_micro;
  nlohmann::json cm = nlohmann::json::array();
  for (Index r = 0; r < confusion.counts.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Index c = 0; c < confusion.counts.cols(); ++c) row.push_back(confusion.counts(r, c));
    cm.push_back(row);
  }
  j[p + "confusion_matrix"] = cm;
  j[p + "degenerate"] = degenerate;
  return j;
}

}  // namespace tabsev
