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

#ifndef OTS_RETRIEVAL_HPP_
#define OTS_RETRIEVAL_HPP_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ots/extractor.hpp"
#include "ots/geometry.hpp"
#include "ots/preprocess.hpp"

namespace ots {

struct SpatialSearchConfig {
  int h_r = 4;
  int h_q = 3;
  PipelineConfig pipeline;
  // Extract every patch from the smallest square containing it.
  bool square_mode = true;

  friend bool operator==(const SpatialSearchConfig&, const SpatialSearchConfig&) = default;
};

// i*i equal, overlapping patches covering the image. Side per axis is
// round(2L / (i + 1)); offsets are evenly spaced over [0, L - side].
std::vector<Rect> patch_grid(int width, int height, int level);

// Levels 1..levels concatenated; sum of i^2 rects.
std::vector<Rect> multi_level_patches(int width, int height, int levels);

// Processed patch vectors stored as float32, row-major.
class PatchSet {
 public:
  PatchSet() = default;
  PatchSet(std::size_t dim, std::vector<float> values);

  std::size_t size() const noexcept { return dim_ == 0 ? 0 : values_.size() / dim_; }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const float> row(std::size_t i) const {
    return std::span<const float>(values_).subspan(i * dim_, dim_);
  }
  const std::vector<float>& values() const noexcept { return values_; }

  friend bool operator==(const PatchSet&, const PatchSet&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<float> values_;
};

struct IndexEntry {
  std::string id;
  ImageSize size;
  std::vector<Rect> patches;  // grid rects, levels 1..h_r
  PatchSet vectors;

  friend bool operator==(const IndexEntry&, const IndexEntry&) = default;
};

struct RetrievalIndex {
  SpatialSearchConfig config;
  std::string extractor_binding;
  PcaWhitenModel model;
  std::vector<IndexEntry> entries;

  friend bool operator==(const RetrievalIndex&, const RetrievalIndex&) = default;
};

struct IndexBuild {
  RetrievalIndex index;
  std::vector<std::string> warnings;
};

// Extracts levels 1..h_r for every reference, fits the processing chain on
// the pooled patches and stores the processed vectors.
IndexBuild build_index(std::span<const ImageRef> references,
                       const SpatialSearchConfig& cfg, Extractor& extractor);

double l2_distance(std::span<const float> a, std::span<const float> b);

// Minimum distance from a query patch to any patch of the entry.
double patch_to_ref_distance(std::span<const float> query_patch, const IndexEntry& entry);

// Mean over query patches of patch_to_ref_distance.
double query_distance(const PatchSet& query_patches, const IndexEntry& entry);

// Query patches at levels 1..h_q through the index's fitted chain.
PatchSet process_query(const RetrievalIndex& index, const ImageRef& query,
                       Extractor& extractor, int h_q);

struct Match {
  std::string id;
  double distance = 0.0;

  friend bool operator==(const Match&, const Match&) = default;
};

// Ascending distance; ties broken by reference id.
using RankedResult = std::vector<Match>;

RankedResult rank(const RetrievalIndex& index, const PatchSet& query_patches,
                  std::size_t top_k);
RankedResult search(const RetrievalIndex& index, const ImageRef& query,
                    Extractor& extractor, int h_q, std::size_t top_k);

// OTIDX1 binary container.
std::string serialize_index(const RetrievalIndex& index);
RetrievalIndex parse_index(std::string_view contents);
void save_index(const RetrievalIndex& index, const std::filesystem::path& path);
RetrievalIndex load_index(const std::filesystem::path& path);

}  // namespace ots

#endif  // OTS_RETRIEVAL_HPP_
