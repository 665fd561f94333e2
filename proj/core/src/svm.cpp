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

#include "ots/svm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>

#include <Eigen/Dense>

#include "ots/error.hpp"
#include "ots/text_io.hpp"

namespace ots {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

// w^T [x; 1] when the weight vector carries a bias slot.
double score(std::span<const double> w, std::span<const double> x) {
  double s = dot(w.first(x.size()), x);
  if (w.size() == x.size() + 1) s += w.back();
  return s;
}

struct Problem {
  const TrainingSet& train;
  bool bias;
  double C;

  std::size_t n() const { return train.size(); }
  std::size_t width() const { return train.dim() + (bias ? 1 : 0); }

  void axpy(double a, std::size_t i, std::vector<double>& w) const {
    const auto x = train.x(i);
    for (std::size_t j = 0; j < x.size(); ++j) w[j] += a * x[j];
    if (bias) w.back() += a;
  }

  std::vector<double> primal_from_dual(const std::vector<double>& alpha) const {
    std::vector<double> w(width(), 0.0);
    for (std::size_t i = 0; i < n(); ++i) {
      if (alpha[i] != 0.0) axpy(alpha[i] * train.y(i), i, w);
    }
    return w;
  }
};

double dual_value(const std::vector<double>& alpha, const std::vector<double>& w) {
  return std::accumulate(alpha.begin(), alpha.end(), 0.0) - 0.5 * dot(w, w);
}

// Primal-dual active-set refinement from the partition suggested by w0:
// points with margin below 1 - eps are bound (alpha = C), points within eps
// of 1 sit on the margin, the rest are inactive. Each round solves the
// equality-constrained primal for the margin set and moves points whose
// multiplier or margin disagrees with their set. Candidates are only
// returned when their duality gap passes the solver tolerance.
constexpr int kPolishRounds = 12;

std::optional<std::vector<double>> polish(const Problem& prob, const std::vector<double>& w0,
                                          double tol, double budget, double& work) {
  enum Set : char { kInactive, kMargin, kBound };
  const std::size_t n = prob.n();
  const std::size_t m = prob.width();
  Eigen::MatrixXd rows(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = prob.train.x(i);
    const double y = prob.train.y(i);
    for (std::size_t j = 0; j < x.size(); ++j) rows(i, j) = y * x[j];
    if (prob.bias) rows(i, m - 1) = y;
  }
  for (const double eps : {1e-2, 1e-3, 1e-4}) {
    std::vector<Set> set(n, kInactive);
    for (std::size_t i = 0; i < n; ++i) {
      const double mi = prob.train.y(i) * score(w0, prob.train.x(i));
      if (std::abs(mi - 1.0) <= eps) {
        set[i] = kMargin;
      } else if (mi < 1.0) {
        set[i] = kBound;
      }
    }
    for (int round = 0; round < kPolishRounds; ++round) {
      std::vector<std::size_t> margin;
      std::vector<double> alpha(n, 0.0);
      Eigen::VectorXd base = Eigen::VectorXd::Zero(m);
      for (std::size_t i = 0; i < n; ++i) {
        if (set[i] == kMargin) margin.push_back(i);
        if (set[i] == kBound) {
          alpha[i] = prob.C;
          base += prob.C * rows.row(i).transpose();
        }
      }
      const std::size_t f = margin.size();
      const double lo = static_cast<double>(std::min(f, m));
      const double cost = 3.0 * n * m + lo * lo * static_cast<double>(std::max(f, m)) + lo * lo * lo;
      if (work + cost > budget) return std::nullopt;
      work += cost;
      Eigen::VectorXd w_star = base;
      Eigen::VectorXd lambda;
      if (f > 0) {
        Eigen::MatrixXd z(f, m);
        for (std::size_t r = 0; r < f; ++r) z.row(r) = rows.row(margin[r]);
        const Eigen::VectorXd rhs = Eigen::VectorXd::Ones(f) - z * base;
        // shift = Z^+ rhs and lambda = (Z^T)^+ shift, factoring either Z
        // directly or the smaller Gram matrix Z^T Z.
        if (f <= m) {
          const Eigen::VectorXd shift =
              Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(z).solve(rhs);
          w_star += shift;
          const Eigen::MatrixXd zt = z.transpose();
          lambda = Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(zt).solve(shift);
        } else {
          const Eigen::MatrixXd gram = z.transpose() * z;
          const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(gram);
          const Eigen::VectorXd shift = cod.solve(z.transpose() * rhs);
          w_star += shift;
          lambda = z * cod.solve(shift);
        }
        for (std::size_t r = 0; r < f; ++r) alpha[margin[r]] = std::clamp(lambda(r), 0.0, prob.C);
      }
      const auto w_alpha = prob.primal_from_dual(alpha);
      const double primal = objective(w_alpha, prob.train, prob.C);
      if (primal - dual_value(alpha, w_alpha) <= tol * (1.0 + std::abs(primal))) return alpha;

      bool moved = false;
      for (std::size_t r = 0; r < f; ++r) {
        if (lambda(r) < 0.0) {
          set[margin[r]] = kInactive;
          moved = true;
        } else if (lambda(r) > prob.C) {
          set[margin[r]] = kBound;
          moved = true;
        }
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (set[i] == kMargin) continue;
        const double mi = rows.row(i).dot(w_star);
        if ((set[i] == kInactive && mi < 1.0) || (set[i] == kBound && mi > 1.0)) {
          set[i] = kMargin;
          moved = true;
        }
      }
      if (!moved) break;
    }
  }
  return std::nullopt;
}

}  // namespace

TrainingSet::TrainingSet(std::size_t dim) : dim_(dim) {
  if (dim == 0) fail(ErrorKind::kInvalidArgument, "training dimension must be >= 1");
}

void TrainingSet::add(std::span<const double> x, int y) {
  if (x.size() != dim_) {
    fail(ErrorKind::kDimMismatch, "sample dim " + std::to_string(x.size()) +
                                      " != " + std::to_string(dim_));
  }
  if (y != 1 && y != -1) fail(ErrorKind::kInvalidArgument, "label must be +1 or -1");
  for (double v : x) {
    if (!std::isfinite(v)) fail(ErrorKind::kInvalidArgument, "non-finite sample");
  }
  values_.insert(values_.end(), x.begin(), x.end());
  labels_.push_back(y);
}

double objective(std::span<const double> w, const TrainingSet& train, double C) {
  if (w.size() != train.dim() && w.size() != train.dim() + 1) {
    fail(ErrorKind::kDimMismatch, "weight dim " + std::to_string(w.size()) +
                                      " incompatible with data dim " +
                                      std::to_string(train.dim()));
  }
  double hinge = 0.0;
  for (std::size_t i = 0; i < train.size(); ++i) {
    hinge += std::max(1.0 - train.y(i) * score(w, train.x(i)), 0.0);
  }
  return 0.5 * dot(w, w) + C * hinge;
}

constexpr int kPolishInterval = 16;
constexpr double kPolishAllowance = 1e7;

BinaryModel train_binary(const TrainingSet& train, const SolverConfig& cfg) {
  if (!(cfg.C > 0.0)) fail(ErrorKind::kInvalidArgument, "C must be positive");
  if (!(cfg.tol > 0.0)) fail(ErrorKind::kInvalidArgument, "tol must be positive");
  if (cfg.max_epochs < 1) fail(ErrorKind::kInvalidArgument, "max_epochs must be >= 1");
  if (train.size() == 0) fail(ErrorKind::kEmptyInput, "empty training set");
  const auto& y = train.labels();
  if (std::all_of(y.begin(), y.end(), [&](int v) { return v == y.front(); })) {
    fail(ErrorKind::kSingleClassData, "all training labels are identical");
  }

  const Problem prob{train, cfg.bias, cfg.C};
  const std::size_t n = prob.n();
  std::vector<double> qdiag(n);
  for (std::size_t i = 0; i < n; ++i) {
    qdiag[i] = dot(train.x(i), train.x(i)) + (cfg.bias ? 1.0 : 0.0);
  }

  std::vector<double> alpha(n, 0.0);
  std::vector<double> w(prob.width(), 0.0);
  // A zero row contributes a constant hinge of 1; its dual variable sits at C.
  for (std::size_t i = 0; i < n; ++i) {
    if (qdiag[i] == 0.0) alpha[i] = cfg.C;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(cfg.seed);

  BinaryModel model;
  model.bias = cfg.bias;
  model.C_used = cfg.C;
  double primal = 0.0;
  double gap = 0.0;
  int epoch = 0;
  double sweep_work = 0.0;
  double polish_work = 0.0;
  while (epoch < cfg.max_epochs) {
    ++epoch;
    // Fisher-Yates with raw engine output keeps the order identical across
    // standard library implementations.
    for (std::size_t i = n; i > 1; --i) {
      std::swap(order[i - 1], order[rng() % i]);
    }
    for (const std::size_t i : order) {
      if (qdiag[i] == 0.0) continue;
      const double g = train.y(i) * score(w, train.x(i)) - 1.0;
      double pg = g;
      if (alpha[i] == 0.0) {
        pg = std::min(g, 0.0);
      } else if (alpha[i] == cfg.C) {
        pg = std::max(g, 0.0);
      }
      if (pg == 0.0) continue;
      const double old = alpha[i];
      alpha[i] = std::clamp(old - g / qdiag[i], 0.0, cfg.C);
      const double delta = (alpha[i] - old) * train.y(i);
      if (delta != 0.0) prob.axpy(delta, i, w);
    }

    // Rebuild w from alpha so rounding drift never enters the certificate.
    w = prob.primal_from_dual(alpha);
    auto certify = [&] {
      primal = objective(w, train, cfg.C);
      const double dual = std::accumulate(alpha.begin(), alpha.end(), 0.0) - 0.5 * dot(w, w);
      gap = primal - dual;
      return gap <= cfg.tol * (1.0 + std::abs(primal));
    };
    if (certify()) break;
    // Polishing may spend a fixed allowance plus as much arithmetic as the
    // sweeps so far.
    sweep_work += static_cast<double>(n) * prob.width();
    const double budget = sweep_work + kPolishAllowance;
    if (epoch % kPolishInterval == 0 && polish_work < budget) {
      if (auto exact = polish(prob, w, cfg.tol, budget, polish_work)) {
        alpha = std::move(*exact);
        w = prob.primal_from_dual(alpha);
        if (certify()) break;
      }
    }
  }

  model.w = std::move(w);
  model.objective_value = primal;
  model.epochs = epoch;
  model.duality_gap = gap;
  return model;
}

double decision(const BinaryModel& model, std::span<const double> x) {
  if (x.size() != model.input_dim()) {
    fail(ErrorKind::kDimMismatch, "decision input dim " + std::to_string(x.size()) +
                                      " != model dim " +
                                      std::to_string(model.input_dim()));
  }
  return score(model.w, x);
}

std::string_view to_string(Strategy s) {
  return s == Strategy::kOneVsAll ? "ova" : "ovo";
}

std::optional<Strategy> parse_strategy(std::string_view name) {
  if (name == "ova") return Strategy::kOneVsAll;
  if (name == "ovo") return Strategy::kOneVsOne;
  return std::nullopt;
}

std::size_t MulticlassModel::input_dim() const {
  for (const auto& m : per_class) {
    if (m) return m->input_dim();
  }
  if (!pairs.empty()) return pairs.front().model.input_dim();
  return 0;
}

std::size_t MulticlassModel::model_count() const {
  if (strategy == Strategy::kOneVsOne) return pairs.size();
  return static_cast<std::size_t>(
      std::count_if(per_class.begin(), per_class.end(), [](const auto& m) { return m.has_value(); }));
}

std::optional<std::size_t> MulticlassModel::class_index(std::string_view label) const {
  const auto it = std::lower_bound(classes.begin(), classes.end(), label);
  if (it == classes.end() || *it != label) return std::nullopt;
  return static_cast<std::size_t>(it - classes.begin());
}

const std::vector<std::string>& labels_for(const LabelMap& labels, std::string_view id) {
  if (auto it = labels.find(std::string(id)); it != labels.end()) return it->second;
  const auto [base, index] = split_representation_id(id);
  if (index) {
    if (auto it = labels.find(base); it != labels.end()) return it->second;
  }
  fail(ErrorKind::kUnknownLabel, "no label for id '" + std::string(id) + "'");
}

namespace {

std::vector<std::string> collect_classes(const FeatureMatrix& features,
                                         const LabelMap& labels) {
  std::set<std::string> set;
  for (const auto& id : features.ids()) {
    for (const auto& l : labels_for(labels, id)) set.insert(l);
  }
  if (set.size() < 2) {
    fail(ErrorKind::kSingleClassData, "need at least 2 classes, found " +
                                          std::to_string(set.size()));
  }
  return {set.begin(), set.end()};
}

}  // namespace

MulticlassTraining train_one_vs_all(const FeatureMatrix& features,
                                    const LabelMap& labels,
                                    const SolverConfig& cfg) {
  MulticlassTraining out;
  MulticlassModel& model = out.model;
  model.strategy = Strategy::kOneVsAll;
  model.bias = cfg.bias;
  model.classes = collect_classes(features, labels);
  for (const auto& cls : model.classes) {
    TrainingSet train(features.dim());
    for (std::size_t i = 0; i < features.size(); ++i) {
      const auto& set = labels_for(labels, features.id(i));
      const bool positive = std::find(set.begin(), set.end(), cls) != set.end();
      train.add(features.row(i), positive ? 1 : -1);
    }
    try {
      model.per_class.emplace_back(train_binary(train, cfg));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kSingleClassData) throw;
      model.per_class.emplace_back(std::nullopt);
      out.warnings.push_back("class '" + cls + "' skipped: single-class subproblem");
    }
  }
  return out;
}

MulticlassTraining train_one_vs_one(const FeatureMatrix& features,
                                    const LabelMap& labels,
                                    const SolverConfig& cfg) {
  MulticlassTraining out;
  MulticlassModel& model = out.model;
  model.strategy = Strategy::kOneVsOne;
  model.bias = cfg.bias;
  model.classes = collect_classes(features, labels);

  std::vector<std::size_t> row_class(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto& set = labels_for(labels, features.id(i));
    if (set.size() != 1) {
      fail(ErrorKind::kInvalidArgument,
           "one-vs-one needs a single label per sample; '" + features.id(i) +
               "' has " + std::to_string(set.size()));
    }
    row_class[i] = *model.class_index(set.front());
  }
  const std::size_t k = model.classes.size();
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = a + 1; b < k; ++b) {
      TrainingSet train(features.dim());
      for (std::size_t i = 0; i < features.size(); ++i) {
        if (row_class[i] == a) train.add(features.row(i), 1);
        if (row_class[i] == b) train.add(features.row(i), -1);
      }
      model.pairs.push_back({a, b, train_binary(train, cfg)});
    }
  }
  return out;
}

std::vector<double> decision_values(const MulticlassModel& model,
                                    std::span<const double> x) {
  std::vector<double> out;
  if (model.strategy == Strategy::kOneVsAll) {
    for (const auto& m : model.per_class) {
      out.push_back(m ? decision(*m, x) : std::nan(""));
    }
  } else {
    for (const auto& p : model.pairs) out.push_back(decision(p.model, x));
  }
  return out;
}

std::size_t ovo_vote(std::size_t num_classes, std::span<const PairDecision> decisions) {
  if (num_classes == 0) fail(ErrorKind::kEmptyInput, "no classes to vote over");
  std::vector<int> votes(num_classes, 0);
  std::vector<double> margin(num_classes, 0.0);
  for (const auto& d : decisions) {
    if (d.positive >= num_classes || d.negative >= num_classes) {
      fail(ErrorKind::kInvalidArgument, "pair index out of range");
    }
    const std::size_t winner = d.value >= 0.0 ? d.positive : d.negative;
    ++votes[winner];
    margin[winner] += std::abs(d.value);
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < num_classes; ++c) {
    if (votes[c] > votes[best] || (votes[c] == votes[best] && margin[c] > margin[best])) {
      best = c;
    }
  }
  return best;
}

std::size_t ovo_vote(const MulticlassModel& model, std::span<const double> pair_values) {
  if (model.strategy != Strategy::kOneVsOne) {
    fail(ErrorKind::kInvalidArgument, "voting requires a one-vs-one model");
  }
  if (pair_values.size() != model.pairs.size()) {
    fail(ErrorKind::kDimMismatch, "expected one value per pair model");
  }
  std::vector<PairDecision> decisions;
  decisions.reserve(model.pairs.size());
  for (std::size_t i = 0; i < model.pairs.size(); ++i) {
    decisions.push_back({model.pairs[i].positive, model.pairs[i].negative, pair_values[i]});
  }
  return ovo_vote(model.classes.size(), decisions);
}

std::string predict_ovo(const MulticlassModel& model, std::span<const double> x) {
  return model.classes[ovo_vote(model, decision_values(model, x))];
}

std::string serialize_model(const MulticlassModel& model) {
  std::string out = "OTSVM1\n";
  out += std::string(to_string(model.strategy)) + ' ' +
         std::to_string(model.classes.size()) + ' ' + (model.bias ? "1" : "0") + '\n';
  for (const auto& c : model.classes) out += c + '\n';
  auto line = [&](const std::string& key, const BinaryModel& m) {
    out += key + '\t' + text::format_double(m.C_used) + '\t' +
           text::format_double(m.objective_value);
    for (double v : m.w) out += '\t' + text::format_double(v);
    out += '\n';
  };
  if (model.strategy == Strategy::kOneVsAll) {
    for (std::size_t c = 0; c < model.per_class.size(); ++c) {
      if (model.per_class[c]) {
        line(std::to_string(c), *model.per_class[c]);
      } else {
        out += std::to_string(c) + "\tskipped\n";
      }
    }
  } else {
    for (const auto& p : model.pairs) {
      line(std::to_string(p.positive) + ',' + std::to_string(p.negative), p.model);
    }
  }
  return out;
}

MulticlassModel parse_model(std::string_view contents) {
  std::vector<std::string_view> lines = text::split(contents, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty() || lines[0] != "OTSVM1") {
    fail(ErrorKind::kMalformedFile, "missing OTSVM1 header");
  }
  if (lines.size() < 2) fail(ErrorKind::kMalformedFile, "OTSVM1: truncated");
  std::vector<std::string_view> header;
  for (auto f : text::split(lines[1], ' ')) {
    if (!f.empty()) header.push_back(f);
  }
  if (header.size() != 3) fail(ErrorKind::kMalformedFile, "OTSVM1: bad strategy line");
  MulticlassModel model;
  const auto strategy = parse_strategy(header[0]);
  if (!strategy) fail(ErrorKind::kMalformedFile, "OTSVM1: unknown strategy");
  model.strategy = *strategy;
  const auto k = text::parse_int(header[1], "OTSVM1 K");
  if (k < 2) fail(ErrorKind::kMalformedFile, "OTSVM1: K must be >= 2");
  if (header[2] != "0" && header[2] != "1") fail(ErrorKind::kMalformedFile, "OTSVM1: bad bias flag");
  model.bias = header[2] == "1";
  const std::size_t num_classes = static_cast<std::size_t>(k);
  const std::size_t expected_models = model.strategy == Strategy::kOneVsAll
                                          ? num_classes
                                          : num_classes * (num_classes - 1) / 2;
  if (lines.size() != 2 + num_classes + expected_models) {
    fail(ErrorKind::kMalformedFile, "OTSVM1: expected " +
                                        std::to_string(2 + num_classes + expected_models) +
                                        " lines, found " + std::to_string(lines.size()));
  }
  for (std::size_t c = 0; c < num_classes; ++c) {
    model.classes.emplace_back(lines[2 + c]);
    if (model.classes.back().empty()) fail(ErrorKind::kMalformedFile, "OTSVM1: empty class name");
  }
  if (!std::is_sorted(model.classes.begin(), model.classes.end()) ||
      std::adjacent_find(model.classes.begin(), model.classes.end()) != model.classes.end()) {
    fail(ErrorKind::kMalformedFile, "OTSVM1: classes must be sorted and unique");
  }

  std::optional<std::size_t> width;
  auto parse_binary = [&](const std::vector<std::string_view>& f) {
    if (f.size() < 4) fail(ErrorKind::kMalformedFile, "OTSVM1: model line too short");
    BinaryModel m;
    m.bias = model.bias;
    m.C_used = text::parse_double(f[1], "OTSVM1 C");
    m.objective_value = text::parse_double(f[2], "OTSVM1 objective");
    for (std::size_t i = 3; i < f.size(); ++i) m.w.push_back(text::parse_double(f[i], "OTSVM1 w"));
    if (!width) width = m.w.size();
    if (m.w.size() != *width || m.w.size() < (model.bias ? 2u : 1u)) {
      fail(ErrorKind::kMalformedFile, "OTSVM1: inconsistent weight length");
    }
    return m;
  };

  for (std::size_t i = 0; i < expected_models; ++i) {
    const auto f = text::split(lines[2 + num_classes + i], '\t');
    if (model.strategy == Strategy::kOneVsAll) {
      if (text::parse_int(f[0], "OTSVM1 class index") != static_cast<std::int64_t>(i)) {
        fail(ErrorKind::kMalformedFile, "OTSVM1: class lines out of order");
      }
      if (f.size() == 2 && f[1] == "skipped") {
        model.per_class.emplace_back(std::nullopt);
      } else {
        model.per_class.emplace_back(parse_binary(f));
      }
    } else {
      const auto pair = text::split(f[0], ',');
      if (pair.size() != 2) fail(ErrorKind::kMalformedFile, "OTSVM1: bad pair key");
      PairModel p;
      p.positive = static_cast<std::size_t>(text::parse_int(pair[0], "OTSVM1 pair"));
      p.negative = static_cast<std::size_t>(text::parse_int(pair[1], "OTSVM1 pair"));
      p.model = parse_binary(f);
      model.pairs.push_back(std::move(p));
    }
  }
  if (model.strategy == Strategy::kOneVsOne) {
    std::size_t i = 0;
    for (std::size_t a = 0; a < num_classes; ++a) {
      for (std::size_t b = a + 1; b < num_classes; ++b, ++i) {
        if (model.pairs[i].positive != a || model.pairs[i].negative != b) {
          fail(ErrorKind::kMalformedFile, "OTSVM1: pair lines out of order");
        }
      }
    }
  }
  return model;
}

void save_model(const MulticlassModel& model, const std::filesystem::path& path) {
  text::write_file_atomic(path, serialize_model(model));
}

MulticlassModel load_model(const std::filesystem::path& path) {
  return parse_model(text::read_file(path));
}

namespace {

const std::map<std::string, double, std::less<>>& presets() {
  static const std::map<std::string, double, std::less<>> table = {
      {"voc2007", 0.2}, {"voc2007_companion", 5.0}, {"mit67", 2.0},
      {"birds", 2.0},   {"flowers", 2.0},           {"h3d", 0.2},
      {"uiucatt", 0.2},
  };
  return table;
}

}  // namespace

std::optional<double> preset_c(std::string_view name) {
  const auto it = presets().find(name);
  if (it == presets().end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, c] : presets()) names.push_back(name);
  return names;
}

}  // namespace ots
