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

#ifndef OTS_EXTRACTOR_HPP_
#define OTS_EXTRACTOR_HPP_

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ots/feature.hpp"
#include "ots/geometry.hpp"
#include "ots/image.hpp"

namespace ots {

// An image as seen by an extractor. `pixels` may be null, in which case
// pixel-based extractors load `path` as PGM on demand.
struct ImageRef {
  std::string id;
  std::filesystem::path path;
  ImageSize size;
  std::shared_ptr<const PixelGrid> pixels;

  static ImageRef from_pixels(std::string id, PixelGrid grid);
  // Reads only the PGM header when `size` is not supplied.
  static ImageRef from_file(std::string id, std::filesystem::path path);
};

// `key` identifies the representation: the protocol id for external
// extractors and the lookup id for file-backed ones.
struct ExtractionRequest {
  std::string key;
  const ImageRef* image = nullptr;
  TransformPlan plan;
};

class Extractor {
 public:
  virtual ~Extractor() = default;

  // One vector per request, in request order, all of the same dim.
  virtual std::vector<FeatureVector> extract_batch(
      std::span<const ExtractionRequest> requests) = 0;

  // Binding string accepted by make_extractor.
  virtual std::string binding() const = 0;

  FeatureVector extract_one(const ExtractionRequest& request);
};

// Looks up stored vectors by representation id.
class FileBackedExtractor final : public Extractor {
 public:
  FileBackedExtractor(FeatureMatrix store, std::string source = {});

  std::vector<FeatureVector> extract_batch(
      std::span<const ExtractionRequest> requests) override;
  std::string binding() const override;

  const FeatureMatrix& store() const noexcept { return store_; }

 private:
  FeatureMatrix store_;
  std::string source_;
};

// g x g grid of mean cell intensities over the transformed region.
// Rotation uses nearest-neighbour sampling with edge replication.
class ToyPixelExtractor final : public Extractor {
 public:
  explicit ToyPixelExtractor(int grid_cells);

  std::vector<FeatureVector> extract_batch(
      std::span<const ExtractionRequest> requests) override;
  std::string binding() const override;

  int grid_cells() const noexcept { return grid_cells_; }
  FeatureVector compute(const PixelGrid& image, const TransformPlan& plan) const;

 private:
  int grid_cells_;
};

// Runs `/bin/sh -c command` once per batch and speaks the line protocol:
// request `id<TAB>image_path<TAB>region`, reply `id<TAB>v1,v2,...`.
class ExternalProcessExtractor final : public Extractor {
 public:
  explicit ExternalProcessExtractor(std::string command);

  std::vector<FeatureVector> extract_batch(
      std::span<const ExtractionRequest> requests) override;
  std::string binding() const override;

 private:
  std::string command_;
};

// Binding strings: "toy:<g>", "file:<features path>", "external:<command>".
std::unique_ptr<Extractor> make_extractor(std::string_view binding);

// Loads TSV or FVEC1, sniffing the magic bytes.
FeatureMatrix load_features_any(const std::filesystem::path& path);

// Extracts `region` of `image`. With square_mode the region is first
// widened to the smallest square containing it.
FeatureVector extract(Extractor& extractor, const ImageRef& image,
                      const Rect& region, bool square_mode);

struct ProtocolRequest {
  std::string id;
  std::filesystem::path image_path;
  Rect region;
};

// One protocol session; rows come back in request order.
FeatureMatrix external_protocol_roundtrip(
    const std::string& command, std::span<const ProtocolRequest> requests);

}  // namespace ots

#endif  // OTS_EXTRACTOR_HPP_
