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


// ots: command-line front end for training, prediction, evaluation and
// spatial retrieval.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ots/augment.hpp"
#include "ots/error.hpp"
#include "ots/extractor.hpp"
#include "ots/feature.hpp"
#include "ots/metrics.hpp"
#include "ots/preprocess.hpp"
#include "ots/retrieval.hpp"
#include "ots/svm.hpp"
#include "ots/text_io.hpp"

namespace fs = std::filesystem;
using ots::ErrorKind;
using ots::fail;
using ots::text::format_double;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitInternal = 3;

// Nominal canvas for file-backed augmentation; stored vectors carry no
// geometry, only the plan index matters.
constexpr int kNominalSide = 300;

void note(const std::string& msg) { std::cerr << "ots: " << msg << '\n'; }

// Empty path or "-" means standard output.
void emit(const std::string& path, const std::string& contents) {
  if (path.empty() || path == "-") {
    std::cout << contents;
    std::cout.flush();
    return;
  }
  ots::text::write_file_atomic(path, contents);
}

ots::FeatureMatrix load_matrix(const std::string& path, const std::string& format) {
  if (format.empty()) return ots::load_features_any(path);
  return ots::load_features(path, *ots::parse_feature_format(format));
}

// `id<TAB>path[<TAB>width<TAB>height]` per line.
std::vector<ots::ImageRef> load_image_list(const std::string& path) {
  std::vector<ots::ImageRef> out;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  for (const auto& line : ots::text::read_lines(path)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = ots::text::split(line, '\t');
    const std::string where = path + ":" + std::to_string(line_no);
    if (fields.size() != 2 && fields.size() != 4) {
      fail(ErrorKind::kMalformedFile, where + ": expected id, path[, width, height]");
    }
    std::string id(fields[0]);
    if (id.empty() || !seen.insert(id).second) {
      fail(ErrorKind::kMalformedFile, where + ": empty or duplicate id '" + id + "'");
    }
    if (fields.size() == 4) {
      ots::ImageRef ref;
      ref.id = std::move(id);
      ref.path = std::string(fields[1]);
      ref.size = {static_cast<int>(ots::text::parse_int(fields[2], where + " width")),
                  static_cast<int>(ots::text::parse_int(fields[3], where + " height"))};
      if (ref.size.width < 1 || ref.size.height < 1) {
        fail(ErrorKind::kMalformedFile, where + ": image size must be positive");
      }
      out.push_back(std::move(ref));
    } else {
      out.push_back(ots::ImageRef::from_file(std::move(id), std::string(fields[1])));
    }
  }
  if (out.empty()) fail(ErrorKind::kEmptyInput, path + ": no images listed");
  return out;
}

// Rows grouped by base id, groups in order of first appearance.
struct RowGroups {
  std::vector<std::string> ids;
  std::vector<std::vector<std::size_t>> rows;
};

RowGroups group_by_base(const ots::FeatureMatrix& m) {
  RowGroups g;
  std::map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < m.size(); ++i) {
    auto base = ots::split_representation_id(m.id(i)).first;
    auto [it, fresh] = slot.emplace(base, g.ids.size());
    if (fresh) {
      g.ids.push_back(std::move(base));
      g.rows.emplace_back();
    }
    g.rows[it->second].push_back(i);
  }
  return g;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string features, labels, format, out, report;
  std::string strategy = "ovo";
  std::string augment = "none";
  std::string preset;
  double C = 1.0;
  double tol = 1e-8;
  int max_epochs = 10000;
  std::uint64_t seed = 0;
  bool no_bias = false;
};

std::string model_key(const ots::MulticlassModel& m, std::size_t i) {
  if (m.strategy == ots::Strategy::kOneVsAll) return m.classes[i];
  return m.classes[m.pairs[i].positive] + "|" + m.classes[m.pairs[i].negative];
}

std::string training_report(const ots::MulticlassTraining& t, std::size_t rows,
                            std::size_t dim, const std::string& augment,
                            std::optional<std::size_t> sources) {
  const auto& m = t.model;
  std::ostringstream r;
  r << "strategy\t" << ots::to_string(m.strategy) << '\n';
  r << "augment\t" << augment << '\n';
  if (sources) r << "sources\t" << *sources << '\n';
  r << "rows\t" << rows << '\n';
  r << "dim\t" << dim << '\n';
  r << "classes\t" << m.classes.size() << '\n';
  r << "models\t" << m.model_count() << '\n';
  auto line = [&](const std::string& key, const ots::BinaryModel& b) {
    r << "model\t" << key << "\tC=" << format_double(b.C_used)
      << "\tobjective=" << format_double(b.objective_value) << "\tepochs=" << b.epochs
      << "\tgap=" << format_double(b.duality_gap) << '\n';
  };
  if (m.strategy == ots::Strategy::kOneVsAll) {
    for (std::size_t i = 0; i < m.per_class.size(); ++i) {
      if (m.per_class[i]) {
        line(model_key(m, i), *m.per_class[i]);
      } else {
        r << "model\t" << model_key(m, i) << "\tskipped\n";
      }
    }
  } else {
    for (std::size_t i = 0; i < m.pairs.size(); ++i) line(model_key(m, i), m.pairs[i].model);
  }
  for (const auto& w : t.warnings) r << "warning\t" << w << '\n';
  return r.str();
}

int run_train(const TrainArgs& a) {
  const auto strategy = *ots::parse_strategy(a.strategy);
  ots::SolverConfig cfg;
  cfg.C = a.preset.empty() ? a.C : *ots::preset_c(a.preset);
  cfg.tol = a.tol;
  cfg.max_epochs = a.max_epochs;
  cfg.bias = !a.no_bias;
  cfg.seed = a.seed;

  const auto features = load_matrix(a.features, a.format);
  const auto labels = ots::load_labels(a.labels);
  auto train = [&](const ots::FeatureMatrix& x) {
    return strategy == ots::Strategy::kOneVsAll ? ots::train_one_vs_all(x, labels, cfg)
                                                : ots::train_one_vs_one(x, labels, cfg);
  };

  ots::MulticlassTraining result;
  std::size_t rows = features.size();
  std::optional<std::size_t> sources;
  if (a.augment == "none") {
    result = train(features);
  } else if (a.augment == "ots16") {
    const auto plans = ots::augmentation_plans(kNominalSide, kNominalSide);
    std::vector<ots::ImageRef> refs;
    for (const auto& id : group_by_base(features).ids) {
      ots::ImageRef ref;
      ref.id = id;
      ref.size = {kNominalSide, kNominalSide};
      refs.push_back(std::move(ref));
    }
    ots::FileBackedExtractor store(features, a.features);
    const auto expanded = ots::augment_features(store, refs, plans);
    sources = refs.size();
    rows = expanded.size();
    note("augment ots16: " + std::to_string(plans.size()) + " representations x " +
         std::to_string(refs.size()) + " sources = " + std::to_string(rows) + " rows");
    result = train(expanded);
  } else {
    if (strategy != ots::Strategy::kOneVsAll) {
      fail(ErrorKind::kInvalidArgument, "--augment posneg requires --strategy ova");
    }
    result = ots::train_one_vs_all_expanded(features, labels, cfg);
  }

  for (const auto& w : result.warnings) note("warning: " + w);
  ots::save_model(result.model, a.out);
  const auto report = training_report(result, rows, features.dim(), a.augment, sources);
  if (!a.report.empty()) emit(a.report, report);
  return kExitOk;
}

// ---------------------------------------------------------------- predict

struct PredictArgs {
  std::string model, features, format, out;
  std::string pooling = "sum";
};

int run_predict(const PredictArgs& a) {
  const auto model = ots::load_model(a.model);
  const auto features = load_matrix(a.features, a.format);
  const auto pooling = *ots::parse_pooling(a.pooling);
  const auto groups = group_by_base(features);

  std::ostringstream out;
  const bool ova = model.strategy == ots::Strategy::kOneVsAll;
  if (ova) {
    out << "id";
    for (const auto& c : model.classes) out << '\t' << c;
    out << '\n';
  }
  const std::size_t width = model.model_count();
  std::vector<std::vector<double>> columns(width);
  for (std::size_t g = 0; g < groups.ids.size(); ++g) {
    for (auto& c : columns) c.clear();
    for (const std::size_t r : groups.rows[g]) {
      const auto dv = ots::decision_values(model, features.row(r));
      for (std::size_t j = 0; j < width; ++j) columns[j].push_back(dv[j]);
    }
    std::vector<double> pooled(width);
    for (std::size_t j = 0; j < width; ++j) pooled[j] = ots::pool_responses(columns[j], pooling);
    out << groups.ids[g];
    if (ova) {
      for (const double v : pooled) out << '\t' << format_double(v);
    } else {
      out << '\t' << model.classes[ots::ovo_vote(model, pooled)];
    }
    out << '\n';
  }
  emit(a.out, out.str());
  return kExitOk;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string truth, scores, predictions, ranking, out;
  std::string ap_mode = "all_points";
  std::size_t k = 4;
  bool keep_self = false;
};

std::string evaluate_scores(const EvaluateArgs& a, const ots::LabelMap& truth) {
  const auto lines = ots::text::read_lines(a.scores);
  if (lines.empty()) fail(ErrorKind::kEmptyInput, a.scores + ": empty score file");
  const auto header = ots::text::split(lines.front(), '\t');
  if (header.size() < 2 || header.front() != "id") {
    fail(ErrorKind::kMalformedFile, a.scores + ": expected header 'id<TAB>class...'");
  }
  const std::size_t classes = header.size() - 1;
  std::vector<std::vector<double>> scores(classes);
  std::vector<std::string> ids;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = ots::text::split(lines[i], '\t');
    const std::string where = a.scores + ":" + std::to_string(i + 1);
    if (f.size() != header.size()) fail(ErrorKind::kMalformedFile, where + ": column count");
    ids.emplace_back(f[0]);
    for (std::size_t c = 0; c < classes; ++c) {
      scores[c].push_back(ots::text::parse_double(f[c + 1], where));
    }
  }
  if (ids.empty()) fail(ErrorKind::kEmptyInput, a.scores + ": no rows");

  const auto mode = *ots::parse_ap_mode(a.ap_mode);
  std::vector<ots::ReportRow> rows;
  std::vector<double> aps;
  for (std::size_t c = 0; c < classes; ++c) {
    const std::string name(header[c + 1]);
    if (std::any_of(scores[c].begin(), scores[c].end(), [](double v) { return std::isnan(v); })) {
      note("warning: class '" + name + "' has no scores; skipped");
      continue;
    }
    std::vector<bool> positive;
    for (const auto& id : ids) {
      const auto& l = ots::labels_for(truth, id);
      positive.push_back(std::find(l.begin(), l.end(), name) != l.end());
    }
    if (std::find(positive.begin(), positive.end(), true) == positive.end()) {
      note("warning: class '" + name + "' has no positives; skipped");
      continue;
    }
    const double ap = ots::average_precision(scores[c], positive, mode);
    rows.push_back({name, ap});
    aps.push_back(ap);
  }
  if (aps.empty()) fail(ErrorKind::kNoPositives, "no class could be evaluated");
  rows.push_back({"mAP", ots::mean_ap(aps)});
  return ots::format_report(rows);
}

std::string evaluate_predictions(const EvaluateArgs& a, const ots::LabelMap& truth) {
  std::vector<std::string> predicted, actual;
  std::set<std::string> classes;
  std::size_t line_no = 0;
  for (const auto& line : ots::text::read_lines(a.predictions)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = ots::text::split(line, '\t');
    if (f.size() != 2) {
      fail(ErrorKind::kMalformedFile,
           a.predictions + ":" + std::to_string(line_no) + ": expected id<TAB>label");
    }
    const auto& l = ots::labels_for(truth, f[0]);
    if (l.size() != 1) {
      fail(ErrorKind::kInvalidArgument, "id '" + std::string(f[0]) + "' is not single-label");
    }
    predicted.emplace_back(f[1]);
    actual.push_back(l.front());
    classes.insert(l.front());
  }
  if (predicted.empty()) fail(ErrorKind::kEmptyInput, a.predictions + ": no rows");
  const std::vector<std::string> class_list(classes.begin(), classes.end());
  const auto cm = ots::confusion(predicted, actual, class_list);
  const std::vector<ots::ReportRow> rows{{"accuracy", ots::mean_diag_accuracy(cm)}};
  return ots::format_report(rows);
}

std::string evaluate_ranking(const EvaluateArgs& a, const ots::LabelMap& truth) {
  std::vector<std::string> queries;
  std::map<std::string, std::vector<std::string>> ranked;
  std::size_t line_no = 0;
  for (const auto& line : ots::text::read_lines(a.ranking)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = ots::text::split(line, '\t');
    if (f.size() != 4) {
      fail(ErrorKind::kMalformedFile, a.ranking + ":" + std::to_string(line_no) +
                                          ": expected query<TAB>rank<TAB>ref<TAB>distance");
    }
    auto [it, fresh] = ranked.try_emplace(std::string(f[0]));
    if (fresh) queries.emplace_back(f[0]);
    it->second.emplace_back(f[2]);
  }
  if (queries.empty()) fail(ErrorKind::kEmptyInput, a.ranking + ": no rows");

  double total = 0.0;
  for (const auto& q : queries) {
    const auto& groups = ots::labels_for(truth, q);
    std::set<std::string> relevant;
    for (const auto& [id, labels] : truth) {
      for (const auto& g : labels) {
        if (std::find(groups.begin(), groups.end(), g) != groups.end()) relevant.insert(id);
      }
    }
    auto ranking = ranked[q];
    if (!a.keep_self) {
      relevant.erase(q);
      std::erase(ranking, q);
    }
    total += ots::recall_at_k(ranking, relevant, a.k);
  }
  const std::vector<ots::ReportRow> rows{
      {"recall@" + std::to_string(a.k), total / static_cast<double>(queries.size())}};
  return ots::format_report(rows);
}

int run_evaluate(const EvaluateArgs& a) {
  const auto truth = ots::load_labels(a.truth);
  std::string report;
  if (!a.scores.empty()) report += evaluate_scores(a, truth);
  if (!a.predictions.empty()) report += evaluate_predictions(a, truth);
  if (!a.ranking.empty()) report += evaluate_ranking(a, truth);
  emit(a.out, report);
  return kExitOk;
}

// ---------------------------------------------------------------- index / query

struct IndexArgs {
  std::string references, extractor, out;
  int h_r = 4;
  int h_q = 3;
  std::size_t pca_dim = 500;
  double power = 2.0;
  double epsilon = 1e-10;
  bool no_square = false;
};

int run_index(const IndexArgs& a) {
  ots::SpatialSearchConfig cfg;
  cfg.h_r = a.h_r;
  cfg.h_q = a.h_q;
  cfg.pipeline.pca_dim = a.pca_dim;
  cfg.pipeline.power = a.power;
  cfg.pipeline.epsilon = a.epsilon;
  cfg.square_mode = !a.no_square;
  const auto refs = load_image_list(a.references);
  auto extractor = ots::make_extractor(a.extractor);
  const auto built = ots::build_index(refs, cfg, *extractor);
  for (const auto& w : built.warnings) note("warning: " + w);
  ots::save_index(built.index, a.out);
  return kExitOk;
}

struct QueryArgs {
  std::string index, queries, extractor, out;
  std::optional<int> h_q;
  std::size_t top_k = 10;
};

int run_query(const QueryArgs& a) {
  const auto index = ots::load_index(a.index);
  const auto queries = load_image_list(a.queries);
  auto extractor =
      ots::make_extractor(a.extractor.empty() ? index.extractor_binding : a.extractor);
  const int h_q = a.h_q.value_or(index.config.h_q);
  std::ostringstream out;
  for (const auto& q : queries) {
    const auto result = ots::search(index, q, *extractor, h_q, a.top_k);
    for (std::size_t r = 0; r < result.size(); ++r) {
      out << q.id << '\t' << r + 1 << '\t' << result[r].id << '\t'
          << format_double(result[r].distance) << '\n';
    }
  }
  emit(a.out, out.str());
  return kExitOk;
}

// ---------------------------------------------------------------- preprocess

struct FitArgs {
  std::string features, format, out;
  std::size_t pca_dim = 500;
  double epsilon = 1e-10;
};

int run_preprocess_fit(const FitArgs& a) {
  ots::PipelineConfig cfg;
  cfg.pca_dim = a.pca_dim;
  cfg.epsilon = a.epsilon;
  const auto fit = ots::retrieval_pipeline_fit(load_matrix(a.features, a.format), cfg);
  if (fit.warning) note("warning: " + *fit.warning);
  ots::save_pca_model(fit.model, a.out);
  return kExitOk;
}

struct ApplyArgs {
  std::string model, features, in_format, out;
  std::string mode = "pipeline";
  std::string format = "tsv";
  double power = 2.0;
};

int run_preprocess_apply(const ApplyArgs& a) {
  const auto x = load_matrix(a.features, a.in_format);
  const auto out_format = *ots::parse_feature_format(a.format);
  std::optional<ots::PcaWhitenModel> model;
  if (a.mode != "l2") {
    if (a.model.empty()) fail(ErrorKind::kInvalidArgument, "--model is required for " + a.mode);
    model = ots::load_pca_model(a.model);
  }
  ots::PipelineConfig cfg;
  cfg.power = a.power;
  if (model) {
    cfg.pca_dim = model->k;
    cfg.epsilon = model->epsilon;
  }
  std::optional<ots::FeatureMatrix> out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    ots::FeatureVector v = a.mode == "l2"        ? ots::l2_normalize(x.row(i))
                           : a.mode == "whiten" ? ots::pca_whiten_apply(*model, x.row(i))
                                                : ots::retrieval_pipeline_apply(*model, cfg, x.row(i));
    if (!out) out.emplace(v.dim());
    out->append(x.id(i), v.values());
  }
  if (!out) fail(ErrorKind::kEmptyInput, a.features + ": no rows");
  if (out_format == ots::FeatureFormat::kBinary && (a.out.empty() || a.out == "-")) {
    fail(ErrorKind::kInvalidArgument, "binary output needs --out");
  }
  emit(a.out, ots::serialize_features(*out, out_format));
  return kExitOk;
}

// ---------------------------------------------------------------- plans

struct PlansArgs {
  int width = 0;
  int height = 0;
  std::string kind = "ots16";
  std::string out;
};

int run_plans(const PlansArgs& a) {
  const ots::ImageSize size{a.width, a.height};
  std::vector<ots::TransformPlan> plans;
  if (a.kind == "ots16") {
    plans = ots::augmentation_plans(a.width, a.height);
  } else if (a.kind == "positive") {
    plans = ots::positive_mirror_plans();
  } else {
    plans = ots::negative_expansion_plans(a.width, a.height);
  }
  std::ostringstream out;
  out << "index\tx\ty\tw\th\trotation\tmirrored\n";
  for (std::size_t i = 0; i < plans.size(); ++i) {
    const auto r = plans[i].region(size);
    out << i << '\t' << r.x << '\t' << r.y << '\t' << r.w << '\t' << r.h << '\t'
        << format_double(plans[i].rotation_degrees) << '\t' << (plans[i].mirrored ? 1 : 0)
        << '\n';
  }
  emit(a.out, out.str());
  return kExitOk;
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

template <typename F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const ots::Error& e) {
    std::cerr << "ots: error: " << one_line(e.what()) << '\n';
    return kExitInput;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "ots: error: io: " << one_line(e.what()) << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "ots: internal error: " << one_line(e.what()) << '\n';
    return kExitInternal;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Off-the-shelf descriptor classification and spatial retrieval", "ots"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "ots 0.1.0");

  const auto formats = CLI::IsMember({"tsv", "binary"});
  auto presets = ots::preset_names();

  TrainArgs train;
  auto* t = app.add_subcommand("train", "Train a multiclass linear SVM");
  t->add_option("--features", train.features, "Feature file (TSV or FVEC1)")->required();
  t->add_option("--labels", train.labels, "Label file (id<TAB>label)")->required();
  t->add_option("--format", train.format, "Feature file format (default: sniff)")
      ->check(formats);
  t->add_option("--strategy", train.strategy, "ova or ovo")
      ->check(CLI::IsMember({"ova", "ovo"}))
      ->capture_default_str();
  auto* c_opt = t->add_option("--C", train.C, "Soft-margin constant")
                    ->check(CLI::PositiveNumber)
                    ->capture_default_str();
  t->add_option("--preset", train.preset, "Named C value")
      ->check(CLI::IsMember(presets))
      ->excludes(c_opt);
  t->add_option("--augment", train.augment,
                "none, ots16 (stored <id>#0..15 rows) or posneg (stored <id>#0..9 rows)")
      ->check(CLI::IsMember({"none", "ots16", "posneg"}))
      ->capture_default_str();
  t->add_option("--tol", train.tol, "Relative duality gap tolerance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  t->add_option("--max-epochs", train.max_epochs)->check(CLI::PositiveNumber)->capture_default_str();
  t->add_flag("--no-bias", train.no_bias, "Train without the bias feature");
  t->add_option("--seed", train.seed, "Solver shuffle seed")->capture_default_str();
  t->add_option("--out", train.out, "Model output path")->required();
  t->add_option("--report", train.report, "Training report path ('-' for stdout)");

  PredictArgs predict;
  auto* p = app.add_subcommand("predict", "Score or classify feature rows");
  p->add_option("--model", predict.model)->required();
  p->add_option("--features", predict.features)->required();
  p->add_option("--format", predict.format)->check(formats);
  p->add_option("--pooling", predict.pooling, "Pooling over <id>#k rows: sum or max")
      ->check(CLI::IsMember({"sum", "max"}))
      ->capture_default_str();
  p->add_option("--out", predict.out, "Output path (default stdout)");

  EvaluateArgs evaluate;
  auto* e = app.add_subcommand("evaluate", "Compute AP, accuracy or recall@k");
  e->add_option("--truth", evaluate.truth, "Label file")->required();
  e->add_option("--scores", evaluate.scores, "Per-class score TSV from predict");
  e->add_option("--predictions", evaluate.predictions, "id<TAB>label TSV");
  e->add_option("--ranking", evaluate.ranking, "Ranking TSV from query");
  e->add_option("--ap-mode", evaluate.ap_mode)
      ->check(CLI::IsMember({"all_points", "eleven_point"}))
      ->capture_default_str();
  e->add_option("--k", evaluate.k, "Cut-off for recall@k")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  e->add_flag("--keep-self", evaluate.keep_self,
              "Keep the query id in its own ranking and relevant set");
  e->add_option("--out", evaluate.out, "Report path (default stdout)");

  IndexArgs index;
  auto* ix = app.add_subcommand("index", "Build a spatial retrieval index");
  ix->add_option("--references", index.references, "id<TAB>path[<TAB>W<TAB>H] list")
      ->required();
  ix->add_option("--extractor", index.extractor, "toy:<g>, file:<path> or external:<cmd>")
      ->required();
  ix->add_option("--h-r", index.h_r, "Reference pyramid levels")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  ix->add_option("--h-q", index.h_q, "Default query pyramid levels")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  ix->add_option("--pca-dim", index.pca_dim)->check(CLI::PositiveNumber)->capture_default_str();
  ix->add_option("--power", index.power)->check(CLI::PositiveNumber)->capture_default_str();
  ix->add_option("--epsilon", index.epsilon)->check(CLI::PositiveNumber)->capture_default_str();
  ix->add_flag("--no-square", index.no_square, "Extract patches as-is instead of squared");
  ix->add_option("--out", index.out)->required();

  QueryArgs query;
  auto* q = app.add_subcommand("query", "Rank indexed references for each query image");
  q->add_option("--index", query.index)->required();
  q->add_option("--queries", query.queries, "id<TAB>path[<TAB>W<TAB>H] list")->required();
  q->add_option("--top-k", query.top_k)->check(CLI::PositiveNumber)->capture_default_str();
  q->add_option("--h-q", query.h_q, "Override the index's query levels")
      ->check(CLI::PositiveNumber);
  q->add_option("--extractor", query.extractor, "Override the index's extractor binding");
  q->add_option("--out", query.out, "Output path (default stdout)");

  FitArgs fit;
  auto* pf = app.add_subcommand("preprocess-fit", "Fit the L2/PCA-whitening chain");
  pf->add_option("--features", fit.features)->required();
  pf->add_option("--format", fit.format)->check(formats);
  pf->add_option("--pca-dim", fit.pca_dim)->check(CLI::PositiveNumber)->capture_default_str();
  pf->add_option("--epsilon", fit.epsilon)->check(CLI::PositiveNumber)->capture_default_str();
  pf->add_option("--out", fit.out)->required();

  ApplyArgs apply;
  auto* pa = app.add_subcommand("preprocess-apply", "Apply a fitted chain to features");
  pa->add_option("--model", apply.model, "PCAW1 model (not needed for l2)");
  pa->add_option("--features", apply.features)->required();
  pa->add_option("--in-format", apply.in_format)->check(formats);
  pa->add_option("--mode", apply.mode, "pipeline, whiten or l2")
      ->check(CLI::IsMember({"pipeline", "whiten", "l2"}))
      ->capture_default_str();
  pa->add_option("--power", apply.power)->check(CLI::PositiveNumber)->capture_default_str();
  pa->add_option("--format", apply.format, "Output format")->check(formats)->capture_default_str();
  pa->add_option("--out", apply.out, "Output path (default stdout)");

  PlansArgs plans;
  auto* pl = app.add_subcommand("plans", "Dump augmentation geometry as TSV");
  pl->add_option("--width", plans.width)->required()->check(CLI::PositiveNumber);
  pl->add_option("--height", plans.height)->required()->check(CLI::PositiveNumber);
  pl->add_option("--kind", plans.kind, "ots16, positive or negative")
      ->check(CLI::IsMember({"ots16", "positive", "negative"}))
      ->capture_default_str();
  pl->add_option("--out", plans.out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForVersion& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    std::cerr << "ots: usage error: " << one_line(err.what()) << '\n';
    return kExitInput;
  }

  if (*t) return guarded([&] { return run_train(train); });
  if (*p) return guarded([&] { return run_predict(predict); });
  if (*e) {
    if (evaluate.scores.empty() && evaluate.predictions.empty() && evaluate.ranking.empty()) {
      std::cerr << "ots: usage error: evaluate needs --scores, --predictions or --ranking\n";
      return kExitInput;
    }
    return guarded([&] { return run_evaluate(evaluate); });
  }
  if (*ix) return guarded([&] { return run_index(index); });
  if (*q) return guarded([&] { return run_query(query); });
  if (*pf) return guarded([&] { return run_preprocess_fit(fit); });
  if (*pa) return guarded([&] { return run_preprocess_apply(apply); });
  if (*pl) return guarded([&] { return run_plans(plans); });
  return kExitInput;
}
