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

#include "ots/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "binary_io.hpp"
#include "ots/error.hpp"
#include "ots/text_io.hpp"

namespace ots {
namespace {

constexpr std::string_view kIndexMagic = "OTIDX1\n";

std::vector<ExtractionRequest> patch_requests(const ImageRef& image, int levels,
                                              bool square_mode) {
  std::vector<ExtractionRequest> requests;
  const auto rects = multi_level_patches(image.size.width, image.size.height, levels);
  requests.reserve(rects.size());
  for (std::size_t p = 0; p < rects.size(); ++p) {
    const Rect r = square_mode ? smallest_square_containing(rects[p], image.size) : rects[p];
    requests.push_back({representation_id(image.id, p), &image, region_plan(r)});
  }
  return requests;
}

void append_processed(const PcaWhitenModel& model, const PipelineConfig& cfg,
                      std::span<const double> raw, std::vector<float>& out) {
  const FeatureVector v = retrieval_pipeline_apply(model, cfg, raw);
  for (double x : v.values()) out.push_back(static_cast<float>(x));
}

}  // namespace

std::vector<Rect> patch_grid(int width, int height, int level) {
  if (level < 1) fail(ErrorKind::kInvalidArgument, "patch level must be >= 1");
  if (width < 1 || height < 1) fail(ErrorKind::kDegenerateImage, "empty image");
  auto side_of = [level](int length) {
    return static_cast<int>(std::lround(2.0 * length / (level + 1)));
  };
  const int sw = side_of(width);
  const int sh = side_of(height);
  if (sw == 0 || sh == 0) {
    fail(ErrorKind::kDegenerateImage, "patch side rounds to zero at level " +
                                          std::to_string(level));
  }
  auto offset = [level](int length, int side, int j) {
    if (level == 1) return 0;
    return static_cast<int>(std::lround(static_cast<double>(j) * (length - side) / (level - 1)));
  };
  std::vector<Rect> rects;
  rects.reserve(static_cast<std::size_t>(level) * level);
  for (int row = 0; row < level; ++row) {
    for (int col = 0; col < level; ++col) {
      rects.push_back({offset(width, sw, col), offset(height, sh, row), sw, sh});
    }
  }
  return rects;
}

std::vector<Rect> multi_level_patches(int width, int height, int levels) {
  if (levels < 1) fail(ErrorKind::kInvalidArgument, "need at least one level");
  std::vector<Rect> all;
  for (int i = 1; i <= levels; ++i) {
    const auto level = patch_grid(width, height, i);
    all.insert(all.end(), level.begin(), level.end());
  }
  return all;
}

PatchSet::PatchSet(std::size_t dim, std::vector<float> values)
    : dim_(dim), values_(std::move(values)) {
  if (dim == 0 || values_.size() % dim != 0) {
    fail(ErrorKind::kInvalidArgument, "patch values do not tile the dimension");
  }
}

IndexBuild build_index(std::span<const ImageRef> references,
                       const SpatialSearchConfig& cfg, Extractor& extractor) {
  if (references.size() < 2) fail(ErrorKind::kInvalidArgument, "index needs >= 2 references");
  if (cfg.h_r < 1 || cfg.h_q < 1) fail(ErrorKind::kInvalidArgument, "levels must be >= 1");
  std::set<std::string> seen;
  for (const auto& r : references) {
    if (!seen.insert(r.id).second) fail(ErrorKind::kInvalidArgument, "duplicate reference id " + r.id);
  }

  std::vector<ExtractionRequest> requests;
  std::vector<std::size_t> owner;
  for (std::size_t i = 0; i < references.size(); ++i) {
    auto reqs = patch_requests(references[i], cfg.h_r, cfg.square_mode);
    owner.insert(owner.end(), reqs.size(), i);
    requests.insert(requests.end(), reqs.begin(), reqs.end());
  }
  const auto raw = extractor.extract_batch(requests);
  FeatureMatrix pooled(raw.front().dim());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i].dim() != pooled.dim()) {
      fail(ErrorKind::kExtractorFailure, "extractor returned mixed dimensions");
    }
    pooled.append(requests[i].key, raw[i].values());
  }

  IndexBuild out;
  PcaFit fit = retrieval_pipeline_fit(pooled, cfg.pipeline);
  if (fit.warning) out.warnings.push_back(*fit.warning);
  RetrievalIndex& index = out.index;
  index.config = cfg;
  index.extractor_binding = extractor.binding();
  index.model = std::move(fit.model);

  std::vector<std::vector<float>> per_ref(references.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    append_processed(index.model, cfg.pipeline, pooled.row(i), per_ref[owner[i]]);
  }
  for (std::size_t i = 0; i < references.size(); ++i) {
    const ImageRef& ref = references[i];
    index.entries.push_back(
        {ref.id, ref.size, multi_level_patches(ref.size.width, ref.size.height, cfg.h_r),
         PatchSet(index.model.k, std::move(per_ref[i]))});
  }
  return out;
}

double l2_distance(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) fail(ErrorKind::kDimMismatch, "distance between different dims");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += d * d;
  }
  return std::sqrt(sum);
}

double patch_to_ref_distance(std::span<const float> query_patch, const IndexEntry& entry) {
  if (entry.vectors.size() == 0) fail(ErrorKind::kEmptyInput, "entry has no patches");
  if (query_patch.size() != entry.vectors.dim()) {
    fail(ErrorKind::kDimMismatch, "query patch dim " + std::to_string(query_patch.size()) +
                                      " != index dim " + std::to_string(entry.vectors.dim()));
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < entry.vectors.size(); ++p) {
    best = std::min(best, l2_distance(query_patch, entry.vectors.row(p)));
  }
  return best;
}

double query_distance(const PatchSet& query_patches, const IndexEntry& entry) {
  if (query_patches.size() == 0) fail(ErrorKind::kEmptyInput, "no query patches");
  double sum = 0.0;
  for (std::size_t q = 0; q < query_patches.size(); ++q) {
    sum += patch_to_ref_distance(query_patches.row(q), entry);
  }
  return sum / static_cast<double>(query_patches.size());
}

PatchSet process_query(const RetrievalIndex& index, const ImageRef& query,
                       Extractor& extractor, int h_q) {
  if (h_q < 1) fail(ErrorKind::kInvalidArgument, "h_q must be >= 1");
  const auto requests = patch_requests(query, h_q, index.config.square_mode);
  const auto raw = extractor.extract_batch(requests);
  std::vector<float> values;
  values.reserve(raw.size() * index.model.k);
  for (const auto& v : raw) append_processed(index.model, index.config.pipeline, v.values(), values);
  return PatchSet(index.model.k, std::move(values));
}

RankedResult rank(const RetrievalIndex& index, const PatchSet& query_patches,
                  std::size_t top_k) {
  if (top_k < 1) fail(ErrorKind::kInvalidArgument, "top_k must be >= 1");
  RankedResult all;
  all.reserve(index.entries.size());
  for (const auto& entry : index.entries) {
    all.push_back({entry.id, query_distance(query_patches, entry)});
  }
  std::sort(all.begin(), all.end(), [](const Match& a, const Match& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.id < b.id;
  });
  if (all.size() > top_k) all.resize(top_k);
  return all;
}

RankedResult search(const RetrievalIndex& index, const ImageRef& query,
                    Extractor& extractor, int h_q, std::size_t top_k) {
  return rank(index, process_query(index, query, extractor, h_q), top_k);
}

std::string serialize_index(const RetrievalIndex& index) {
  using namespace binary;
  std::string out(kIndexMagic);
  const auto& cfg = index.config;
  put_u32(out, static_cast<std::uint32_t>(cfg.h_r));
  put_u32(out, static_cast<std::uint32_t>(cfg.h_q));
  put_u32(out, static_cast<std::uint32_t>(cfg.pipeline.pca_dim));
  put_f64(out, cfg.pipeline.power);
  put_f64(out, cfg.pipeline.epsilon);
  out.push_back(cfg.square_mode ? '\1' : '\0');
  put_string(out, index.extractor_binding);

  const auto& m = index.model;
  put_u32(out, static_cast<std::uint32_t>(m.k));
  put_u32(out, static_cast<std::uint32_t>(m.d_in));
  put_f64(out, m.epsilon);
  for (double v : m.mean) put_f64(out, v);
  for (double v : m.components) put_f64(out, v);
  for (double v : m.eigenvalues) put_f64(out, v);

  put_u32(out, static_cast<std::uint32_t>(index.entries.size()));
  for (const auto& e : index.entries) {
    put_string(out, e.id);
    put_u32(out, static_cast<std::uint32_t>(e.size.width));
    put_u32(out, static_cast<std::uint32_t>(e.size.height));
    put_u32(out, static_cast<std::uint32_t>(e.patches.size()));
    for (const Rect& r : e.patches) {
      put_u32(out, static_cast<std::uint32_t>(r.x));
      put_u32(out, static_cast<std::uint32_t>(r.y));
      put_u32(out, static_cast<std::uint32_t>(r.w));
      put_u32(out, static_cast<std::uint32_t>(r.h));
    }
    // FVEC1 inner layout: n, d, then n*d float32.
    put_u32(out, static_cast<std::uint32_t>(e.vectors.size()));
    put_u32(out, static_cast<std::uint32_t>(e.vectors.dim()));
    for (float v : e.vectors.values()) put_f32(out, v);
  }
  return out;
}

RetrievalIndex parse_index(std::string_view contents) {
  if (!contents.starts_with(kIndexMagic)) fail(ErrorKind::kMalformedFile, "bad OTIDX1 magic");
  binary::Reader in(contents, "OTIDX1");
  in.bytes(kIndexMagic.size());
  RetrievalIndex index;
  auto& cfg = index.config;
  cfg.h_r = static_cast<int>(in.u32());
  cfg.h_q = static_cast<int>(in.u32());
  cfg.pipeline.pca_dim = in.u32();
  cfg.pipeline.power = in.f64();
  cfg.pipeline.epsilon = in.f64();
  const std::uint8_t square = in.u8();
  if (square > 1) fail(ErrorKind::kMalformedFile, "OTIDX1: bad square flag");
  cfg.square_mode = square == 1;
  if (cfg.h_r < 1 || cfg.h_q < 1 || cfg.h_r > 4096 || cfg.h_q > 4096) {
    fail(ErrorKind::kMalformedFile, "OTIDX1: bad levels");
  }
  index.extractor_binding = in.string();

  auto& m = index.model;
  m.k = in.u32();
  m.d_in = in.u32();
  m.epsilon = in.f64();
  if (m.k == 0 || m.d_in == 0 || m.k > m.d_in ||
      (contents.size() - in.position()) / 8 / m.d_in < m.k + 1) {
    fail(ErrorKind::kMalformedFile, "OTIDX1: bad model sizes");
  }
  m.mean.resize(m.d_in);
  for (double& v : m.mean) v = in.f64();
  m.components.resize(m.k * m.d_in);
  for (double& v : m.components) v = in.f64();
  m.eigenvalues.resize(m.k);
  for (double& v : m.eigenvalues) v = in.f64();
  validate_pca_model(m);

  const std::size_t h = static_cast<std::size_t>(cfg.h_r);
  const std::size_t expected_patches = h * (h + 1) * (2 * h + 1) / 6;
  const std::uint32_t n = in.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    IndexEntry e;
    e.id = in.string();
    e.size.width = static_cast<int>(in.u32());
    e.size.height = static_cast<int>(in.u32());
    const std::uint32_t patches = in.u32();
    if (patches != expected_patches) fail(ErrorKind::kMalformedFile, "OTIDX1: wrong patch count");
    for (std::uint32_t p = 0; p < patches; ++p) {
      Rect r;
      r.x = static_cast<int>(in.u32());
      r.y = static_cast<int>(in.u32());
      r.w = static_cast<int>(in.u32());
      r.h = static_cast<int>(in.u32());
      e.patches.push_back(r);
    }
    const std::uint32_t rows = in.u32();
    const std::uint32_t dim = in.u32();
    if (rows != patches || dim != m.k) fail(ErrorKind::kMalformedFile, "OTIDX1: vector block mismatch");
    std::vector<float> values(std::size_t{rows} * dim);
    for (float& v : values) {
      v = in.f32();
      if (!std::isfinite(v)) fail(ErrorKind::kMalformedFile, "OTIDX1: non-finite vector");
    }
    e.vectors = PatchSet(dim, std::move(values));
    index.entries.push_back(std::move(e));
  }
  if (!in.at_end()) fail(ErrorKind::kMalformedFile, "OTIDX1: trailing bytes");
  return index;
}

void save_index(const RetrievalIndex& index, const std::filesystem::path& path) {
  text::write_file_atomic(path, serialize_index(index));
}

RetrievalIndex load_index(const std::filesystem::path& path) {
  return parse_index(text::read_file(path));
}

}  // namespace ots
