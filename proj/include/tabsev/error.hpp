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

#include <stdexcept>
#include <string>
#include <string_view>

namespace tabsev {

enum class ErrorKind {
  // dataset
  kMissingColumn,
  kTypeMismatch,
  kDuplicateHeader,
  kAllMissingColumn,
  kNotImputed,
  kStatsDimensionMismatch,
  kLabelOutOfRange,
  kEmptySplit,
  kBadK,
  kEmptyInput,
  kInvalidSpec,
  kInvalidSchema,
  kIo,
  // kmodes
  kLengthMismatch,
  kDimensionMismatch,
  kEmptyCluster,
  kTooFewDistinctRows,
  // tensor core
  kShapeMismatch,
  kIndexOutOfRange,
  kNonFiniteInput,
  kHeadDivisibility,
  kNotNormalized,
  kNonScalarLoss,
  // models / trainer
  kConfigMismatch,
  kEmptyData,
  kNonFiniteLoss,
  // metrics
  kOneClassOnly,
  kClassAbsent,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a machine-readable kind so the
/// command-line front end can map it onto a stable exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace tabsev
