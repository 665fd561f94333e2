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

#ifndef OTS_FEATURE_HPP_
#define OTS_FEATURE_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ots {

// A dense descriptor. Always non-empty with finite components.
class FeatureVector {
 public:
  explicit FeatureVector(std::vector<double> values);
  explicit FeatureVector(std::span<const double> values);

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  operator std::span<const double>() const noexcept { return values_; }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;

 private:
  std::vector<double> values_;
};

// Row-major matrix of descriptors keyed by unique string ids.
class FeatureMatrix {
 public:
  explicit FeatureMatrix(std::size_t dim);

  // Validates id uniqueness, dimension and finiteness.
  void append(std::string id, std::span<const double> row);

  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }
  std::size_t dim() const noexcept { return dim_; }

  const std::string& id(std::size_t i) const { return ids_[i]; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  std::span<const double> row(std::size_t i) const;
  FeatureVector row_vector(std::size_t i) const;
  std::optional<std::size_t> find(std::string_view id) const;
  std::span<const double> data() const noexcept { return values_; }

  friend bool operator==(const FeatureMatrix& a, const FeatureMatrix& b) {
    return a.dim_ == b.dim_ && a.ids_ == b.ids_ && a.values_ == b.values_;
  }

 private:
  std::size_t dim_;
  std::vector<std::string> ids_;
  std::vector<double> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class FeatureFormat { kTsv, kBinary };

std::optional<FeatureFormat> parse_feature_format(std::string_view name);

// TSV: `id<TAB>v1<TAB>v2...` per row, no header.
// Binary (FVEC1): "FVEC1\n", u32 n, u32 d (little-endian), n*d float32
// row-major, then n newline-terminated ids.
// Binary stores float32, so values are rounded on save; a matrix loaded
// from binary round-trips exactly.
FeatureMatrix load_features(const std::filesystem::path& path,
                            FeatureFormat format);
void save_features(const FeatureMatrix& matrix,
                   const std::filesystem::path& path, FeatureFormat format);

// In-memory forms of the formats above, reused by other containers.
FeatureMatrix parse_features(std::string_view contents, FeatureFormat format);
std::string serialize_features(const FeatureMatrix& matrix,
                               FeatureFormat format);

// id -> set of labels. Single-label data has exactly one label per id;
// multi-label data repeats the id on several lines.
using LabelMap = std::map<std::string, std::vector<std::string>>;

LabelMap load_labels(const std::filesystem::path& path);
void save_labels(const LabelMap& labels, const std::filesystem::path& path);

// Representation ids for augmented or per-patch features: `<id>#<index>`.
std::string representation_id(std::string_view base_id, std::size_t index);
// Inverse of representation_id; ids without a '#<digits>' suffix map to
// themselves with no index.
std::pair<std::string, std::optional<std::size_t>> split_representation_id(
    std::string_view id);

}  // namespace ots

#endif  // OTS_FEATURE_HPP_
