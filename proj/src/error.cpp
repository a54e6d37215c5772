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

namespace tabsev {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kMissingColumn: return "MissingColumn";
    case ErrorKind::kTypeMismatch: return "TypeMismatch";
    case ErrorKind::kDuplicateHeader: return "DuplicateHeader";
    case ErrorKind::kAllMissingColumn: return "AllMissingColumn";
    case ErrorKind::kNotImputed: return "NotImputed";
    case ErrorKind::kStatsDimensionMismatch: return "StatsDimensionMismatch";
    case ErrorKind::kLabelOutOfRange: return "LabelOutOfRange";
    case ErrorKind::kEmptySplit: return "EmptySplit";
    case ErrorKind::kBadK: return "BadK";
    case ErrorKind::kEmptyInput: return "EmptyInput";
    case ErrorKind::kInvalidSpec: return "InvalidSpec";
    case ErrorKind::kInvalidSchema: return "InvalidSchema";
    case ErrorKind::kIo: return "Io";
    case ErrorKind::kLengthMismatch: return "LengthMismatch";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kEmptyCluster: return "EmptyCluster";
    case ErrorKind::kTooFewDistinctRows: return "TooFewDistinctRows";
    case ErrorKind::kShapeMismatch: return "ShapeMismatch";
    case ErrorKind::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::kNonFiniteInput: return "NonFiniteInput";
    case ErrorKind::kHeadDivisibility: return "HeadDivisibility";
    case ErrorKind::kNotNormalized: return "NotNormalized";
    case ErrorKind::kNonScalarLoss: return "NonScalarLoss";
    case ErrorKind::kConfigMismatch: return "ConfigMismatch";
    case ErrorKind::kEmptyData: return "EmptyData";
    case ErrorKind::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::kOneClassOnly: return "OneClassOnly";
    case ErrorKind::kClassAbsent: return "ClassAbsent";
  }
  return "Unknown";
}

}  // namespace tabsev
