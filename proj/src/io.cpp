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

#include "tabsev/io.hpp"

#include "tabsev/error.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace tabsev {

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::kIo, "cannot write " + tmp.string());
    out << content;
    if (!out) throw Error(ErrorKind::kIo, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool row_has_content = false;
  std::size_t i = 0;
  // skip a UTF-8 byte order mark
  if (text.size() >= 3 && text.compare(0, 3, "\xEF\xBB\xBF") == 0) i = 3;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        row_has_content = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        row_has_content = true;
        break;
      case '\r':
        break;
      case '\n':
        if (row_has_content || !field.empty()) {
          row.push_back(std::move(field));
          rows.push_back(std::move(row));
        }
        field.clear();
        row.clear();
        row_has_content = false;
        break;
      default:
        field += c;
        row_has_content = true;
    }
  }
  if (in_quotes) throw Error(ErrorKind::kTypeMismatch, "unterminated quoted CSV field");
  if (row_has_content || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string csv_line(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_escape(fields[i]);
  }
  out += '\n';
  return out;
}

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string checkpoint_json(const ParamStore& params, const nlohmann::json& config_echo) {
  // values are formatted by hand: the JSON library prints shortest round-trip
  // decimals, while the file format pins 17 significant digits
  std::string out = "{\n  \"format_version\": " + std::to_string(kCheckpointFormatVersion) +
                    ",\n  \"config_echo\": " + config_echo.dump() + ",\n  \"tensors\": [";
  bool first = true;
  for (const auto& p : params) {
    out += first ? "\n" : ",\n";
    first = false;
    out += "    {\"name\": " + nlohmann::json(p.name).dump() + ", \"shape\": [" + std::to_string(p.value.rows()) +
           ", " + std::to_string(p.value.cols()) + "], \"values\": [";
    for (Index i = 0; i < p.value.size(); ++i) {
      if (i) out += ", ";
      out += format_double(p.value.data()[i]);
    }
    out += "]}";
  }
  out += "\n  ]\n}\n";
  return out;
}

Checkpoint parse_checkpoint(const std::string& text) {
  Checkpoint ck;
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kConfigMismatch, std::string("checkpoint is not valid JSON: ") + e.what());
  }
  if (!doc.contains("format_version") || !doc.contains("tensors") || !doc.contains("config_echo")) {
    throw Error(ErrorKind::kConfigMismatch, "checkpoint lacks format_version/config_echo/tensors");
  }
  ck.format_version = doc.at("format_version").get<int>();
  if (ck.format_version != kCheckpointFormatVersion) {
    throw Error(ErrorKind::kConfigMismatch, "unsupported checkpoint format " + std::to_string(ck.format_version));
  }
  ck.config_echo = doc.at("config_echo");
  for (const auto& t : doc.at("tensors")) {
    CheckpointTensor tensor;
    tensor.name = t.at("name").get<std::string>();
    const auto shape = t.at("shape").get<std::vector<Index>>();
    if (shape.size() != 2) throw Error(ErrorKind::kConfigMismatch, "tensor '" + tensor.name + "' is not rank 2");
    tensor.rows = shape[0];
    tensor.cols = shape[1];
    const auto values = t.at("values").get<std::vector<double>>();
    if (static_cast<Index>(values.size()) != tensor.rows * tensor.cols) {
      throw Error(ErrorKind::kConfigMismatch, "tensor '" + tensor.name + "' value count does not match shape");
    }
    tensor.value = Eigen::Map<const Matrix>(values.data(), tensor.rows, tensor.cols);
    ck.tensors.push_back(std::move(tensor));
  }
  return ck;
}

void restore_params(const Checkpoint& checkpoint, ParamStore& params) {
  if (checkpoint.tensors.size() != params.size()) {
    throw Error(ErrorKind::kConfigMismatch, "checkpoint holds " + std::to_string(checkpoint.tensors.size()) +
                                                " tensors, model expects " + std::to_string(params.size()));
  }
  for (const auto& t : checkpoint.tensors) {
    if (!params.contains(t.name)) throw Error(ErrorKind::kConfigMismatch, "unexpected tensor '" + t.name + "'");
    Parameter& p = params.get(t.name);
    if (p.value.rows() != t.rows || p.value.cols() != t.cols) {
      throw Error(ErrorKind::kConfigMismatch, "shape mismatch for '" + t.name + "'");
    }
    p.value = t.value;
  }
}

}  // namespace tabsev
