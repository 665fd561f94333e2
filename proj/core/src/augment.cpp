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

#include "ots/augment.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "ots/error.hpp"
#include "ots/preprocess.hpp"

namespace ots {
namespace {

void check_size(int width, int height) {
  if (width < 1 || height < 1) {
    fail(ErrorKind::kDegenerateImage, "image size must be positive");
  }
}

std::vector<TransformPlan> with_mirrors(std::vector<TransformPlan> plans) {
  const std::size_t n = plans.size();
  for (std::size_t i = 0; i < n; ++i) {
    TransformPlan m = plans[i];
    m.mirrored = true;
    plans.push_back(m);
  }
  return plans;
}

}  // namespace

std::string_view to_string(Pooling p) { return p == Pooling::kSum ? "sum" : "max"; }

std::optional<Pooling> parse_pooling(std::string_view name) {
  if (name == "sum") return Pooling::kSum;
  if (name == "max") return Pooling::kMax;
  return std::nullopt;
}

double normalize_degrees(double degrees) {
  double d = std::fmod(degrees, 360.0);
  if (d <= -180.0) d += 360.0;
  if (d > 180.0) d -= 360.0;
  return d;
}

std::array<Rect, 5> crop_rects(int width, int height, double fraction) {
  check_size(width, height);
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    fail(ErrorKind::kInvalidArgument, "crop fraction must lie in (0, 1]");
  }
  const double side = std::sqrt(fraction);
  const int w = std::min(width, static_cast<int>(std::lround(side * width)));
  const int h = std::min(height, static_cast<int>(std::lround(side * height)));
  if (w == 0 || h == 0) fail(ErrorKind::kDegenerateImage, "crop rounds to zero size");
  const int right = width - w;
  const int bottom = height - h;
  return {Rect{0, 0, w, h}, Rect{right, 0, w, h}, Rect{0, bottom, w, h},
          Rect{right, bottom, w, h}, Rect{right / 2, bottom / 2, w, h}};
}

std::vector<TransformPlan> augmentation_plans(int width, int height,
                                              const AugmentConfig& cfg) {
  std::vector<TransformPlan> plans;
  plans.push_back(identity_plan());
  for (const Rect& r : crop_rects(width, height, cfg.crop_area_fraction)) {
    plans.push_back(region_plan(r));
  }
  for (double angle : cfg.rotation_angles) {
    plans.push_back({std::nullopt, normalize_degrees(angle), false});
  }
  return with_mirrors(std::move(plans));
}

std::vector<TransformPlan> positive_mirror_plans() {
  return with_mirrors({identity_plan()});
}

std::vector<TransformPlan> negative_expansion_plans(int width, int height) {
  if (width < 2 || height < 2) {
    fail(ErrorKind::kDegenerateImage, "2x2 tiling needs at least a 2x2 image");
  }
  const int left = (width + 1) / 2;
  const int top = (height + 1) / 2;
  const std::array<Rect, 4> quads = {Rect{0, 0, left, top},
                                     Rect{left, 0, width - left, top},
                                     Rect{0, top, left, height - top},
                                     Rect{left, top, width - left, height - top}};
  std::vector<TransformPlan> plans = {identity_plan(), {std::nullopt, 0.0, true}};
  for (const Rect& q : quads) plans.push_back(region_plan(q));
  for (const Rect& q : quads) plans.push_back({q, 0.0, true});
  return plans;
}

Rect enlarge_bbox(const Rect& rect, double factor, int width, int height) {
  check_region(rect, {width, height});
  if (!(factor >= 1.0)) fail(ErrorKind::kInvalidArgument, "enlarge factor must be >= 1");
  const int w = std::min(width, static_cast<int>(std::lround(factor * rect.w)));
  const int h = std::min(height, static_cast<int>(std::lround(factor * rect.h)));
  const int x = std::clamp(rect.x - (w - rect.w) / 2, 0, width - w);
  const int y = std::clamp(rect.y - (h - rect.h) / 2, 0, height - h);
  return {x, y, w, h};
}

double pool_responses(std::span<const double> scores, Pooling mode) {
  if (scores.empty()) fail(ErrorKind::kEmptyInput, "no responses to pool");
  if (mode == Pooling::kMax) return *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (double s : scores) sum += s;
  return sum;
}

FeatureMatrix augment_features(Extractor& extractor,
                               std::span<const ImageRef> sources,
                               std::span<const TransformPlan> plans) {
  if (sources.empty() || plans.empty()) {
    fail(ErrorKind::kEmptyInput, "augmentation needs sources and plans");
  }
  std::vector<ExtractionRequest> requests;
  requests.reserve(sources.size() * plans.size());
  for (const auto& src : sources) {
    for (std::size_t p = 0; p < plans.size(); ++p) {
      requests.push_back({representation_id(src.id, p), &src, plans[p]});
    }
  }
  const auto vectors = extractor.extract_batch(requests);
  FeatureMatrix out(vectors.front().dim());
  for (std::size_t i = 0; i < requests.size(); ++i) {
    out.append(requests[i].key, l2_normalize(vectors[i].values()).values());
  }
  return out;
}

TrainingSet augment_training_set(Extractor& extractor,
                                 std::span<const ImageRef> sources,
                                 std::span<const int> labels,
                                 std::span<const TransformPlan> plans) {
  if (labels.size() != sources.size()) {
    fail(ErrorKind::kInvalidArgument, "one label per source required");
  }
  const FeatureMatrix rows = augment_features(extractor, sources, plans);
  TrainingSet train(rows.dim());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    train.add(rows.row(i), labels[i / plans.size()]);
  }
  return train;
}

MulticlassTraining train_one_vs_all_expanded(const FeatureMatrix& representations,
                                             const LabelMap& labels,
                                             const SolverConfig& cfg) {
  const std::size_t positive_count = positive_mirror_plans().size();
  const std::size_t negative_count = 10;
  MulticlassTraining out;
  MulticlassModel& model = out.model;
  model.strategy = Strategy::kOneVsAll;
  model.bias = cfg.bias;

  std::set<std::string> classes;
  std::vector<std::size_t> plan_index(representations.size());
  for (std::size_t i = 0; i < representations.size(); ++i) {
    const auto [base, index] = split_representation_id(representations.id(i));
    if (!index || *index >= negative_count) {
      fail(ErrorKind::kInvalidArgument, "expected '<id>#<0..9>' row id, got '" +
                                            representations.id(i) + "'");
    }
    plan_index[i] = *index;
    for (const auto& l : labels_for(labels, representations.id(i))) classes.insert(l);
  }
  if (classes.size() < 2) fail(ErrorKind::kSingleClassData, "need at least 2 classes");
  model.classes.assign(classes.begin(), classes.end());

  for (const auto& cls : model.classes) {
    TrainingSet train(representations.dim());
    for (std::size_t i = 0; i < representations.size(); ++i) {
      const auto& set = labels_for(labels, representations.id(i));
      const bool positive = std::find(set.begin(), set.end(), cls) != set.end();
      if (positive && plan_index[i] < positive_count) train.add(representations.row(i), 1);
      if (!positive) train.add(representations.row(i), -1);
    }
    try {
      model.per_class.emplace_back(train_binary(train, cfg));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kSingleClassData && e.kind() != ErrorKind::kEmptyInput) throw;
      model.per_class.emplace_back(std::nullopt);
      out.warnings.push_back("class '" + cls + "' skipped: single-class subproblem");
    }
  }
  return out;
}

}  // namespace ots
