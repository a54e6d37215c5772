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

#include "tabsev/types.hpp"

#include "json.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tabsev {

struct ConfusionMatrix {
  /// rows = actual class, columns = predicted class.
  MatrixX<std::int64_t> counts;

  int classes() const { return static_cast<int>(counts.rows()); }
  std::int64_t total() const { return counts.sum(); }
};

ConfusionMatrix confusion(const Labels& y_true, const Labels& y_pred, int classes);

/// One-vs-rest scores. A metric whose denominator is zero is reported as 0
/// and its flag is set.
struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double specificity = 0.0;
  double f1 = 0.0;
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool specificity_undefined = false;
  bool f1_undefined = false;
};

struct Scores {
  double accuracy = 0.0;
  std::vector<ClassScores> per_class;
  double precision_macro = 0.0;
  double recall_macro = 0.0;
  double f1_macro = 0.0;
  double precision_micro = 0.0;
  double recall_micro = 0.0;
  double f1_micro = 0.0;
};

Scores scores(const ConfusionMatrix& matrix);

struct RocCurve {
  std::vector<double> fpr;
  std::vector<double> tpr;
  /// thresholds[i] is the score cut that yields point i; the first is +inf.
  std::vector<double> thresholds;
};

/// Points for every distinct score, highest first, with equal scores grouped
/// into one step. Labels are 0/1. Throws kOneClassOnly without both classes.
RocCurve roc_points(std::span<const double> scores, std::span<const int> labels);
/// Trapezoidal area under the curve.
double auc(const RocCurve& curve);

struct MulticlassAuc {
  std::vector<double> per_class;
  /// false where the class has no positives or no negatives; such classes
  /// report 0 and are left out of the macro mean.
  std::vector<bool> defined;
  double macro = 0.0;
};

/// One-vs-rest AUC of each probability column.
MulticlassAuc multiclass_auc(const Matrix& probabilities, const Labels& labels);

/// One output column: p > 0.5 predicts 1. Otherwise argmax with the lowest
/// index winning exact ties.
Labels predict_labels(const Matrix& probabilities);

/// Chance-corrected agreement of two partitions of the same rows.
double adjusted_rand_index(const Labels& a, const Labels& b);

struct EvalReport {
  int classes = 0;
  double loss = 0.0;
  double auc = 0.0;
  Scores scores;
  MulticlassAuc class_auc;
  ConfusionMatrix confusion;

  /// Flat object keyed "<prefix>_<metric>", e.g. test_recall_class_1 and
  /// test_f1_macro, plus "<prefix>_confusion_matrix" and a list of metrics
  /// whose denominators were zero.
  nlohmann::json to_json(const std::string& prefix) const;
};

/// probabilities is N x 1 (binary, P(y = 1)) or N x c. For the binary case
/// `auc` is the ROC area of that column; otherwise the macro one-vs-rest AUC.
EvalReport evaluate_predictions(const Matrix& probabilities, const Labels& labels, double loss);

}  // namespace tabsev
