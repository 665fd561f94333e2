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

#ifndef OTS_SVM_HPP_
#define OTS_SVM_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ots/feature.hpp"

namespace ots {

// Binary-labelled samples; y in {-1, +1}.
class TrainingSet {
 public:
  explicit TrainingSet(std::size_t dim);

  void add(std::span<const double> x, int y);

  std::size_t size() const noexcept { return labels_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  std::span<const double> x(std::size_t i) const {
    return std::span<const double>(values_).subspan(i * dim_, dim_);
  }
  int y(std::size_t i) const { return labels_[i]; }
  const std::vector<int>& labels() const noexcept { return labels_; }

 private:
  std::size_t dim_;
  std::vector<double> values_;
  std::vector<int> labels_;
};

struct SolverConfig {
  double C = 1.0;
  // Training stops once the duality gap falls below tol * (1 + |primal|).
  double tol = 1e-8;
  int max_epochs = 10000;
  // Appends a constant 1 feature (regularised like any other weight).
  bool bias = true;
  std::uint64_t seed = 0;
};

struct BinaryModel {
  std::vector<double> w;  // input dim, plus one trailing bias weight
  double C_used = 0.0;
  double objective_value = 0.0;
  bool bias = true;
  int epochs = 0;
  double duality_gap = 0.0;

  std::size_t input_dim() const { return w.size() - (bias ? 1 : 0); }
};

// 1/2 ||w||^2 + C * sum_i max(1 - y_i w^T x_i, 0). A weight vector one
// longer than the data dimension is read as carrying a bias weight.
double objective(std::span<const double> w, const TrainingSet& train, double C);

// Dual coordinate descent over alpha in [0, C]^n with the primal weight
// vector kept in sync; coordinates are visited in a per-epoch shuffled
// order drawn from cfg.seed. Throws kSingleClassData if all labels agree.
BinaryModel train_binary(const TrainingSet& train, const SolverConfig& cfg);

// w^T x (+ bias weight).
double decision(const BinaryModel& model, std::span<const double> x);

enum class Strategy { kOneVsAll, kOneVsOne };

std::string_view to_string(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view name);

// Pair model: `positive` (the lower class index) is the +1 side.
struct PairModel {
  std::size_t positive = 0;
  std::size_t negative = 0;
  BinaryModel model;
};

struct MulticlassModel {
  Strategy strategy = Strategy::kOneVsOne;
  std::vector<std::string> classes;  // sorted, unique
  bool bias = true;
  // OneVsAll: one entry per class; empty when the class was skipped.
  std::vector<std::optional<BinaryModel>> per_class;
  // OneVsOne: K(K-1)/2 models in (0,1), (0,2), ..., (K-2,K-1) order.
  std::vector<PairModel> pairs;

  std::size_t input_dim() const;
  std::size_t model_count() const;
  std::optional<std::size_t> class_index(std::string_view label) const;
};

struct MulticlassTraining {
  MulticlassModel model;
  std::vector<std::string> warnings;
};

// Resolves the label set for a row id, falling back from `<id>#<k>` to
// `<id>`. Throws kUnknownLabel when neither is labelled.
const std::vector<std::string>& labels_for(const LabelMap& labels, std::string_view id);

// One model per class: positives are rows whose label set contains it.
// Classes whose subproblem has a single sign are skipped with a warning.
MulticlassTraining train_one_vs_all(const FeatureMatrix& features,
                                    const LabelMap& labels,
                                    const SolverConfig& cfg);

// One model per unordered class pair, trained on that pair's rows only.
// Requires exactly one label per row.
MulticlassTraining train_one_vs_one(const FeatureMatrix& features,
                                    const LabelMap& labels,
                                    const SolverConfig& cfg);

// Decision values in model order (per class for OvA, per pair for OvO).
// Skipped OvA classes yield NaN.
std::vector<double> decision_values(const MulticlassModel& model,
                                    std::span<const double> x);

struct PairDecision {
  std::size_t positive = 0;
  std::size_t negative = 0;
  double value = 0.0;
};

// Each pair votes for `positive` when value >= 0, else `negative`. Most
// votes wins; ties go to the larger sum of |value| over the votes a class
// received, then to the lower class index.
std::size_t ovo_vote(std::size_t num_classes, std::span<const PairDecision> decisions);

// Votes over pair decision values already computed (e.g. pooled).
std::size_t ovo_vote(const MulticlassModel& model, std::span<const double> pair_values);

std::string predict_ovo(const MulticlassModel& model, std::span<const double> x);

// OTSVM1 text format.
std::string serialize_model(const MulticlassModel& model);
MulticlassModel parse_model(std::string_view contents);
void save_model(const MulticlassModel& model, const std::filesystem::path& path);
MulticlassModel load_model(const std::filesystem::path& path);

// Trade-off presets for the reference datasets.
std::optional<double> preset_c(std::string_view name);
std::vector<std::string> preset_names();

}  // namespace ots

#endif  // OTS_SVM_HPP_
