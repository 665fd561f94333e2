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

#ifndef OTS_METRICS_HPP_
#define OTS_METRICS_HPP_

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ots {

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;

  friend bool operator==(const PrPoint&, const PrPoint&) = default;
};

// Points at each positive hit, walking scores from high to low. Equal
// scores keep their original sample order.
using PrCurve = std::vector<PrPoint>;

PrCurve pr_curve(std::span<const double> scores, const std::vector<bool>& labels);

enum class ApMode { kAllPoints, kElevenPoint };

std::optional<ApMode> parse_ap_mode(std::string_view name);

// kAllPoints: mean precision at the rank of each positive.
// kElevenPoint: mean over r in {0, 0.1, ..., 1} of the best precision
// reached at recall >= r.
double average_precision(std::span<const double> scores, const std::vector<bool>& labels,
                         ApMode mode = ApMode::kAllPoints);

double mean_ap(std::span<const double> per_class_ap);

// Rows are true classes, columns predictions.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t num_classes);

  std::size_t num_classes() const noexcept { return k_; }
  long long at(std::size_t truth, std::size_t predicted) const {
    return counts_[truth * k_ + predicted];
  }
  void add(std::size_t truth, std::size_t predicted);
  long long row_sum(std::size_t truth) const;
  long long total() const;

 private:
  std::size_t k_;
  std::vector<long long> counts_;
};

ConfusionMatrix confusion(std::span<const std::string> predicted,
                          std::span<const std::string> truth,
                          std::span<const std::string> classes);

// Unweighted mean over classes of per-class accuracy (row-normalised
// diagonal). Every row needs at least one sample.
double mean_diag_accuracy(const ConfusionMatrix& m);

// |top-k ∩ relevant| / |relevant|.
double recall_at_k(std::span<const std::string> ranking,
                   const std::set<std::string>& relevant, std::size_t k);

struct ReportRow {
  std::string name;
  double value = 0.0;
};

// `name<TAB>value` lines.
std::string format_report(std::span<const ReportRow> rows);

}  // namespace ots

#endif  // OTS_METRICS_HPP_
