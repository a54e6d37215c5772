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

#include "tabsev/params.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace tabsev {

/// Writes to a sibling temporary file and renames it into place, so readers
/// never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

/// RFC 4180 style: comma separated, double-quoted fields may contain commas,
/// newlines and doubled quotes.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);
std::string csv_escape(const std::string& field);
std::string csv_line(const std::vector<std::string>& fields);

/// printf %.17g, which round-trips every double exactly.
std::string format_double(double value);

inline constexpr int kCheckpointFormatVersion = 1;

/// {format_version, config_echo, tensors: [{name, shape, values}]} with values
/// row-major at 17 significant digits.
std::string checkpoint_json(const ParamStore& params, const nlohmann::json& config_echo);

struct CheckpointTensor {
  std::string name;
  Index rows = 0;
  Index cols = 0;
  Matrix value;
};

struct Checkpoint {
  int format_version = kCheckpointFormatVersion;
  nlohmann::json config_echo;
  std::vector<CheckpointTensor> tensors;
};

Checkpoint parse_checkpoint(const std::string& text);
/// Copies every checkpoint tensor into the store; names and shapes must match.
void restore_params(const Checkpoint& checkpoint, ParamStore& params);

}  // namespace tabsev
