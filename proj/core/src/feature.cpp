/*
 * Copyright 2026 The OTS Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "ots/feature.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>

#include "ots/error.hpp"
#include "ots/text_io.hpp"
#include "binary_io.hpp"

namespace ots {
namespace {

constexpr std::string_view kFvecMagic = "FVEC1\n";

void check_finite(std::span<const double> values, std::string_view what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      fail(ErrorKind::kInvalidArgument,
           std::string(what) + ": non-finite component");
    }
  }
}

FeatureMatrix parse_tsv(std::string_view contents) {
  std::optional<FeatureMatrix> matrix;
  std::size_t line_no = 0;
  std::size_t start = 0;
  std::vector<double> row;
  while (start < contents.size()) {
    std::size_t end = contents.find('\n', start);
    if (end == std::string_view::npos) end = contents.size();
    std::string_view line = contents.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto fields = text::split(line, '\t');
    const std::string ctx = "line " + std::to_string(line_no);
    if (fields.size() < 2 || fields[0].empty()) {
      fail(ErrorKind::kMalformedFile, ctx + ": expected id and values");
    }
    row.clear();
    for (std::size_t i = 1; i < fields.size(); ++i) {
      row.push_back(text::parse_double(fields[i], ctx));
    }
    if (!matrix) matrix.emplace(row.size());
    if (row.size() != matrix->dim()) {
      fail(ErrorKind::kMalformedFile, ctx + ": ragged row");
    }
    try {
      matrix->append(std::string(fields[0]), row);
    } catch (const Error& e) {
      fail(ErrorKind::kMalformedFile, ctx + ": " + e.what());
    }
  }
  if (!matrix) fail(ErrorKind::kMalformedFile, "empty feature file");
  return std::move(*matrix);
}

FeatureMatrix parse_binary(std::string_view contents) {
  if (contents.substr(0, kFvecMagic.size()) != kFvecMagic) {
    fail(ErrorKind::kMalformedFile, "bad FVEC1 magic");
  }
  binary::Reader in(contents, "FVEC1");
  in.bytes(kFvecMagic.size());
  const std::uint32_t n = in.u32();
  const std::uint32_t d = in.u32();
  if (n == 0) fail(ErrorKind::kMalformedFile, "empty matrix (n = 0)");
  if (d == 0) fail(ErrorKind::kMalformedFile, "zero dimension");
  if ((contents.size() - in.position()) / sizeof(float) / d < n) {
    fail(ErrorKind::kMalformedFile, "truncated payload");
  }
  std::vector<double> values(std::size_t{n} * d);
  for (double& v : values) v = static_cast<double>(in.f32());
  std::size_t pos = in.position();
  FeatureMatrix matrix(d);
  for (std::uint32_t r = 0; r < n; ++r) {
    const std::size_t end = contents.find('\n', pos);
    if (end == std::string_view::npos) {
      fail(ErrorKind::kMalformedFile, "truncated id block");
    }
    try {
      matrix.append(std::string(contents.substr(pos, end - pos)),
                    std::span<const double>(values).subspan(std::size_t{r} * d, d));
    } catch (const Error& e) {
      fail(ErrorKind::kMalformedFile, std::string("row ") +
                                          std::to_string(r) + ": " + e.what());
    }
    pos = end + 1;
  }
  if (pos != contents.size()) fail(ErrorKind::kMalformedFile, "trailing bytes");
  return matrix;
}

}  // namespace

FeatureVector::FeatureVector(std::vector<double> values)
    : values_(std::move(values)) {
  if (values_.empty()) fail(ErrorKind::kInvalidArgument, "empty feature vector");
  check_finite(values_, "feature vector");
}

FeatureVector::FeatureVector(std::span<const double> values)
    : FeatureVector(std::vector<double>(values.begin(), values.end())) {}

FeatureMatrix::FeatureMatrix(std::size_t dim) : dim_(dim) {
  if (dim == 0) fail(ErrorKind::kInvalidArgument, "feature dimension must be >= 1");
}

void FeatureMatrix::append(std::string id, std::span<const double> row) {
  if (id.empty()) fail(ErrorKind::kInvalidArgument, "empty id");
  if (id.find_first_of("\t\n\r") != std::string::npos) {
    fail(ErrorKind::kInvalidArgument, "id contains tab or newline: " + id);
  }
  if (row.size() != dim_) {
    fail(ErrorKind::kDimMismatch, "row '" + id + "' has dim " +
                                      std::to_string(row.size()) +
                                      ", expected " + std::to_string(dim_));
  }
  check_finite(row, id);
  if (index_.contains(id)) fail(ErrorKind::kInvalidArgument, "duplicate id " + id);
  index_.emplace(id, ids_.size());
  ids_.push_back(std::move(id));
  values_.insert(values_.end(), row.begin(), row.end());
}

std::span<const double> FeatureMatrix::row(std::size_t i) const {
  return std::span<const double>(values_).subspan(i * dim_, dim_);
}

FeatureVector FeatureMatrix::row_vector(std::size_t i) const {
  return FeatureVector(row(i));
}

std::optional<std::size_t> FeatureMatrix::find(std::string_view id) const {
  const auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<FeatureFormat> parse_feature_format(std::string_view name) {
  if (name == "tsv") return FeatureFormat::kTsv;
  if (name == "binary" || name == "fvec") return FeatureFormat::kBinary;
  return std::nullopt;
}

FeatureMatrix parse_features(std::string_view contents, FeatureFormat format) {
  return format == FeatureFormat::kTsv ? parse_tsv(contents)
                                       : parse_binary(contents);
}

std::string serialize_features(const FeatureMatrix& matrix,
                               FeatureFormat format) {
  if (matrix.empty()) fail(ErrorKind::kEmptyInput, "refusing to write an empty matrix");
  std::string out;
  if (format == FeatureFormat::kTsv) {
    for (std::size_t i = 0; i < matrix.size(); ++i) {
      out += matrix.id(i);
      for (double v : matrix.row(i)) {
        out += '\t';
        out += text::format_double(v);
      }
      out += '\n';
    }
    return out;
  }
  out.append(kFvecMagic);
  binary::put_u32(out, static_cast<std::uint32_t>(matrix.size()));
  binary::put_u32(out, static_cast<std::uint32_t>(matrix.dim()));
  for (double v : matrix.data()) {
    const auto f = static_cast<float>(v);
    if (!std::isfinite(f)) {
      fail(ErrorKind::kInvalidArgument, "value outside float32 range");
    }
    binary::put_f32(out, f);
  }
  for (const auto& id : matrix.ids()) {
    out += id;
    out += '\n';
  }
  return out;
}

FeatureMatrix load_features(const std::filesystem::path& path,
                            FeatureFormat format) {
  return parse_features(text::read_file(path), format);
}

void save_features(const FeatureMatrix& matrix,
                   const std::filesystem::path& path, FeatureFormat format) {
  text::write_file_atomic(path, serialize_features(matrix, format));
}

LabelMap load_labels(const std::filesystem::path& path) {
  LabelMap labels;
  std::size_t line_no = 0;
  for (const auto& line : text::read_lines(path)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = text::split(line, '\t');
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
      fail(ErrorKind::kMalformedFile,
           path.string() + " line " + std::to_string(line_no) +
               ": expected id<TAB>label");
    }
    auto& set = labels[std::string(fields[0])];
    const std::string label(fields[1]);
    if (std::find(set.begin(), set.end(), label) == set.end()) {
      set.push_back(label);
    }
  }
  if (labels.empty()) fail(ErrorKind::kMalformedFile, "empty label file " + path.string());
  return labels;
}

void save_labels(const LabelMap& labels, const std::filesystem::path& path) {
  std::string out;
  for (const auto& [id, set] : labels) {
    for (const auto& label : set) out += id + '\t' + label + '\n';
  }
  text::write_file_atomic(path, out);
}

std::string representation_id(std::string_view base_id, std::size_t index) {
  return std::string(base_id) + '#' + std::to_string(index);
}

std::pair<std::string, std::optional<std::size_t>> split_representation_id(
    std::string_view id) {
  const std::size_t hash = id.rfind('#');
  if (hash == std::string_view::npos || hash == 0 || hash + 1 == id.size()) {
    return {std::string(id), std::nullopt};
  }
  const std::string_view suffix = id.substr(hash + 1);
  std::size_t index = 0;
  for (char c : suffix) {
    if (c < '0' || c > '9') return {std::string(id), std::nullopt};
    index = index * 10 + static_cast<std::size_t>(c - '0');
  }
  return {std::string(id.substr(0, hash)), index};
}

}  // namespace ots
