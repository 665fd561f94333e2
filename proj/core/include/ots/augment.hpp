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

#ifndef OTS_AUGMENT_HPP_
#define OTS_AUGMENT_HPP_

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ots/extractor.hpp"
#include "ots/feature.hpp"
#include "ots/geometry.hpp"
#include "ots/svm.hpp"

namespace ots {

enum class Pooling { kSum, kMax };

std::string_view to_string(Pooling p);
std::optional<Pooling> parse_pooling(std::string_view name);

struct AugmentConfig {
  std::array<double, 2> rotation_angles = {20.0, -20.0};
  double crop_area_fraction = 4.0 / 9.0;
  Pooling pooling = Pooling::kSum;
  double bbox_enlarge_factor = 1.5;
};

// Corner and centre crops, each covering `fraction` of the image area:
// top-left, top-right, bottom-left, bottom-right, centre.
std::array<Rect, 5> crop_rects(int width, int height, double fraction);

// The 16 representations: original, 5 crops, 2 rotations, then the same 8
// mirrored.
std::vector<TransformPlan> augmentation_plans(int width, int height,
                                              const AugmentConfig& cfg = {});

// Identity and its mirror.
std::vector<TransformPlan> positive_mirror_plans();

// Identity, mirror, the 2x2 quadrants (TL, TR, BL, BR) and their mirrors.
// On odd sizes the left/top tiles take the extra pixel. The first two plans
// coincide with positive_mirror_plans().
std::vector<TransformPlan> negative_expansion_plans(int width, int height);

// Scales the box about its centre, then shifts/clips it into the image.
Rect enlarge_bbox(const Rect& rect, double factor, int width, int height);

double pool_responses(std::span<const double> scores, Pooling mode);

// Wraps angles into (-180, 180].
double normalize_degrees(double degrees);

// One L2-normalised row per (source, plan), keyed `<id>#<plan index>`, in
// (source, plan) order.
FeatureMatrix augment_features(Extractor& extractor,
                               std::span<const ImageRef> sources,
                               std::span<const TransformPlan> plans);

// Binary variant: every row inherits its source's +1/-1 label.
TrainingSet augment_training_set(Extractor& extractor,
                                 std::span<const ImageRef> sources,
                                 std::span<const int> labels,
                                 std::span<const TransformPlan> plans);

// One-vs-all where each class sees positives through positive_mirror_plans
// and negatives through negative_expansion_plans. `representations` holds
// `<id>#<k>` rows indexed like negative_expansion_plans.
MulticlassTraining train_one_vs_all_expanded(const FeatureMatrix& representations,
                                             const LabelMap& labels,
                                             const SolverConfig& cfg);

}  // namespace ots

#endif  // OTS_AUGMENT_HPP_
