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

#include "ots/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ots/error.hpp"
#include "ots/text_io.hpp"

namespace ots {
namespace {

std::vector<std::size_t> ranking_order(std::span<const double> scores,
                                       const std::vector<bool>& labels) {
  if (scores.size() != labels.size()) {
    fail(ErrorKind::kInvalidArgument, "scores and labels differ in length");
  }
  for (double s : scores) {
    if (!std::isfinite(s)) fail(ErrorKind::kInvalidArgument, "non-finite score");
  }
  if (std::find(labels.begin(), labels.end(), true) == labels.end()) {
    fail(ErrorKind::kNoPositives, "no positive samples");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace

PrCurve pr_curve(std::span<const double> scores, const std::vector<bool>& labels) {
  const auto order = ranking_order(scores, labels);
  const auto positives = static_cast<double>(std::count(labels.begin(), labels.end(), true));
  PrCurve curve;
  std::size_t hits = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (!labels[order[rank]]) continue;
    ++hits;
    curve.push_back({static_cast<double>(hits) / positives,
                     static_cast<double>(hits) / static_cast<double>(rank + 1)});
  }
  return curve;
}

std::optional<ApMode> parse_ap_mode(std::string_view name) {
  if (name == "all_points") return ApMode::kAllPoints;
  if (name == "eleven_point") return ApMode::kElevenPoint;
  return std::nullopt;
}

double average_precision(std::span<const double> scores, const std::vector<bool>& labels,
                         ApMode mode) {
  const PrCurve curve = pr_curve(scores, labels);
  if (mode == ApMode::kAllPoints) {
    double sum = 0.0;
    for (const auto& p : curve) sum += p.precision;
    return sum / static_cast<double>(curve.size());
  }
  // Point j has recall (j+1)/P; compare in integers to avoid 0.1-step drift.
  const std::size_t positives = curve.size();
  double total = 0.0;
  for (std::size_t step = 0; step <= 10; ++step) {
    double best = 0.0;
    for (std::size_t j = 0; j < positives; ++j) {
      if ((j + 1) * 10 >= step * positives) best = std::max(best, curve[j].precision);
    }
    total += best;
  }
  return total / 11.0;
}

double mean_ap(std::span<const double> per_class_ap) {
  if (per_class_ap.empty()) fail(ErrorKind::kEmptyInput, "no AP values");
  double sum = 0.0;
  for (double ap : per_class_ap) {
    if (!(ap >= 0.0 && ap <= 1.0)) fail(ErrorKind::kInvalidArgument, "AP outside [0,1]");
    sum += ap;
  }
  return sum / static_cast<double>(per_class_ap.size());
}

ConfusionMatrix::ConfusionMatrix(std::size_t num_classes)
    : k_(num_classes), counts_(num_classes * num_classes, 0) {
  if (num_classes == 0) fail(ErrorKind::kEmptyInput, "confusion matrix needs classes");
}

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted) {
  if (truth >= k_ || predicted >= k_) fail(ErrorKind::kUnknownLabel, "class index out of range");
  ++counts_[truth * k_ + predicted];
}

long long ConfusionMatrix::row_sum(std::size_t truth) const {
  long long sum = 0;
  for (std::size_t p = 0; p < k_; ++p) sum += at(truth, p);
  return sum;
}

long long ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), 0LL);
}

ConfusionMatrix confusion(std::span<const std::string> predicted,
                          std::span<const std::string> truth,
                          std::span<const std::string> classes) {
  if (predicted.size() != truth.size()) {
    fail(ErrorKind::kInvalidArgument, "predictions and truth differ in length");
  }
  auto index_of = [&](const std::string& label) {
    const auto it = std::find(classes.begin(), classes.end(), label);
    if (it == classes.end()) fail(ErrorKind::kUnknownLabel, "unknown label '" + label + "'");
    return static_cast<std::size_t>(it - classes.begin());
  };
  ConfusionMatrix m(classes.size());
  for (std::size_t i = 0; i < truth.size(); ++i) m.add(index_of(truth[i]), index_of(predicted[i]));
  return m;
}

double mean_diag_accuracy(const ConfusionMatrix& m) {
  double sum = 0.0;
  for (std::size_t c = 0; c < m.num_classes(); ++c) {
    const long long row = m.row_sum(c);
    if (row == 0) {
      fail(ErrorKind::kEmptyClassRow, "class " + std::to_string(c) + " has no samples");
    }
    sum += static_cast<double>(m.at(c, c)) / static_cast<double>(row);
  }
  return sum / static_cast<double>(m.num_classes());
}

double recall_at_k(std::span<const std::string> ranking,
                   const std::set<std::string>& relevant, std::size_t k) {
  if (relevant.empty()) fail(ErrorKind::kEmptyRelevantSet, "no relevant items");
  if (k < 1) fail(ErrorKind::kInvalidArgument, "k must be >= 1");
  const std::size_t depth = std::min(k, ranking.size());
  std::set<std::string> found;
  for (std::size_t i = 0; i < depth; ++i) {
    if (relevant.contains(ranking[i])) found.insert(ranking[i]);
  }
  return static_cast<double>(found.size()) / static_cast<double>(relevant.size());
}

std::string format_report(std::span<const ReportRow> rows) {
  std::string out;
  for (const auto& r : rows) out += r.name + '\t' + text::format_double(r.value) + '\n';
  return out;
}

}  // namespace ots
