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

#ifndef OTS_PREPROCESS_HPP_
#define OTS_PREPROCESS_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ots/feature.hpp"

namespace ots {

double l2_norm(std::span<const double> v);

// v / ||v||. The zero vector is returned unchanged.
FeatureVector l2_normalize(std::span<const double> v);

// sign(v_j) * |v_j|^p, component-wise.
FeatureVector signed_power(std::span<const double> v, double p);

// Mean, top-k principal directions and their variances (1/n convention).
struct PcaWhitenModel {
  std::size_t k = 0;
  std::size_t d_in = 0;
  double epsilon = 1e-10;
  std::vector<double> mean;         // d_in
  std::vector<double> components;   // k x d_in, row-major, orthonormal rows
  std::vector<double> eigenvalues;  // k, non-increasing

  std::span<const double> component(std::size_t j) const {
    return std::span<const double>(components).subspan(j * d_in, d_in);
  }

  friend bool operator==(const PcaWhitenModel&, const PcaWhitenModel&) = default;
};

struct PcaFit {
  PcaWhitenModel model;
  // Set when k was reduced (clamping or rank deficiency).
  std::optional<std::string> warning;
};

// Requires n >= 2 and 1 <= k <= min(n-1, d). Components are sign-fixed so
// that each one's largest-magnitude entry is positive. If fewer than k
// eigenvalues exceed epsilon, k is reduced and a warning is returned.
PcaFit pca_fit(const FeatureMatrix& x, std::size_t k, double epsilon = 1e-10);

// out_j = <v - mean, component_j> / sqrt(eigenvalue_j + epsilon)
FeatureVector pca_whiten_apply(const PcaWhitenModel& model,
                               std::span<const double> v);

struct PipelineConfig {
  std::size_t pca_dim = 500;
  double power = 2.0;
  double epsilon = 1e-10;

  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

// L2-normalises every row, then fits PCA with pca_dim clamped to
// min(n-1, d) (clamping is reported as a warning, not an error).
PcaFit retrieval_pipeline_fit(const FeatureMatrix& x, const PipelineConfig& cfg);

struct PipelineStages {
  FeatureVector renormalized;  // unit length unless the whitened vector is 0
  FeatureVector output;        // after the signed power transform
};

// l2 -> whiten -> l2 -> signed power.
PipelineStages retrieval_pipeline_stages(const PcaWhitenModel& model,
                                         const PipelineConfig& cfg,
                                         std::span<const double> v);
FeatureVector retrieval_pipeline_apply(const PcaWhitenModel& model,
                                       const PipelineConfig& cfg,
                                       std::span<const double> v);

// PCAW1 text format.
std::string serialize_pca_model(const PcaWhitenModel& model);
PcaWhitenModel parse_pca_model(std::string_view contents);
void save_pca_model(const PcaWhitenModel& model, const std::filesystem::path& path);
PcaWhitenModel load_pca_model(const std::filesystem::path& path);

// Structural checks shared by the parser and fitters; throws kMalformedFile.
void validate_pca_model(const PcaWhitenModel& model);

}  // namespace ots

#endif  // OTS_PREPROCESS_HPP_
