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


#include <sys/wait.h>

#include <cstdlib>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "ots/augment.hpp"
#include "ots/extractor.hpp"
#include "ots/feature.hpp"
#include "ots/image.hpp"
#include "ots/metrics.hpp"
#include "ots/retrieval.hpp"
#include "ots/svm.hpp"
#include "ots/text_io.hpp"
#include "synthetic.hpp"
#include "test_util.hpp"

namespace ots {
namespace {

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    blobs_ = synthetic::gaussian_blobs(21, 3, 6, 8, 4, 4.0);
    save_features(blobs_.train, path("train.tsv"), FeatureFormat::kTsv);
    save_features(blobs_.test, path("test.tsv"), FeatureFormat::kTsv);
    LabelMap all = blobs_.train_labels;
    all.insert(blobs_.test_labels.begin(), blobs_.test_labels.end());
    save_labels(all, path("labels.tsv"));
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  RunResult run(const std::string& args) const {
    const std::string cmd = std::string(OTS_CLI) + " " + args + " >" + path("stdout") +
                            " 2>" + path("stderr");
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = text::read_file(path("stdout"));
    r.err = text::read_file(path("stderr"));
    return r;
  }

  std::vector<std::vector<std::string>> rows(const std::string& contents) const {
    std::vector<std::vector<std::string>> out;
    std::size_t start = 0;
    while (start < contents.size()) {
      const auto end = contents.find('\n', start);
      const std::string line = contents.substr(start, end - start);
      std::vector<std::string> fields;
      for (auto f : text::split(line, '\t')) fields.emplace_back(f);
      out.push_back(std::move(fields));
      start = end + 1;
    }
    return out;
  }

  void write_images(int count) {
    std::string refs, queries;
    for (int i = 0; i < count; ++i) {
      const std::string id = "img" + std::to_string(i);
      const auto img = synthetic::textured_image(300 + i, 42, 36);
      save_pgm(img, path(id + ".pgm"));
      save_pgm(img.crop({7, 6, 28, 24}), path("q" + id + ".pgm"));
      refs += id + "\t" + path(id + ".pgm") + "\n";
      queries += "q" + id + "\t" + path("q" + id + ".pgm") + "\n";
    }
    text::write_file_atomic(path("refs.tsv"), refs);
    text::write_file_atomic(path("queries.tsv"), queries);
  }

  ots::testing::TempDir dir_;
  synthetic::Blobs blobs_;
};

TEST_F(CliTest, TrainOvoMatchesLibrary) {
  const auto r = run("train --features " + path("train.tsv") + " --labels " +
                     path("labels.tsv") + " --strategy ovo --out " + path("m.otsvm"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto model = load_model(path("m.otsvm"));
  EXPECT_EQ(model.pairs.size(), 3u);
  const auto lib = train_one_vs_one(load_features(path("train.tsv"), FeatureFormat::kTsv),
                                    load_labels(path("labels.tsv")), SolverConfig{});
  EXPECT_EQ(serialize_model(model), serialize_model(lib.model));
}

TEST_F(CliTest, PresetRecordsC) {
  const auto r = run("train --features " + path("train.tsv") + " --labels " +
                     path("labels.tsv") + " --preset voc2007 --out " + path("m.otsvm") +
                     " --report -");
  ASSERT_EQ(r.code, 0) << r.err;
  for (const auto& p : load_model(path("m.otsvm")).pairs) EXPECT_EQ(p.model.C_used, 0.2);
  EXPECT_NE(r.out.find("objective="), std::string::npos);
}

TEST_F(CliTest, AugmentOts16TrainsOnSixteenRowsPerSource) {
  FeatureMatrix stored(blobs_.train.dim());
  for (std::size_t i = 0; i < blobs_.train.size(); ++i) {
    for (std::size_t k = 0; k < 16; ++k) {
      std::vector<double> row(blobs_.train.row(i).begin(), blobs_.train.row(i).end());
      row[k % row.size()] += 0.01 * static_cast<double>(k);
      stored.append(representation_id(blobs_.train.id(i), k), row);
    }
  }
  save_features(stored, path("aug.fvec"), FeatureFormat::kBinary);
  const auto r = run("train --features " + path("aug.fvec") + " --labels " +
                     path("labels.tsv") + " --augment ots16 --out " + path("m.otsvm") +
                     " --report " + path("report.tsv"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = text::read_file(path("report.tsv"));
  EXPECT_NE(report.find("rows\t" + std::to_string(16 * blobs_.train.size()) + "\n"),
            std::string::npos);
  EXPECT_NE(r.err.find("16 representations"), std::string::npos);
}

TEST_F(CliTest, PosnegRequiresOva) {
  const auto r = run("train --features " + path("train.tsv") + " --labels " +
                     path("labels.tsv") + " --augment posneg --out " + path("m.otsvm"));
  EXPECT_EQ(r.code, 2);
}

TEST_F(CliTest, PredictOvaScoresMatchLibrary) {
  ASSERT_EQ(run("train --features " + path("train.tsv") + " --labels " + path("labels.tsv") +
                " --strategy ova --out " + path("m.otsvm"))
                .code,
            0);
  const auto r = run("predict --model " + path("m.otsvm") + " --features " + path("test.tsv"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto model = load_model(path("m.otsvm"));
  const auto table = rows(r.out);
  ASSERT_EQ(table.size(), blobs_.test.size() + 1);
  EXPECT_EQ(table[0][0], "id");
  for (std::size_t i = 0; i < blobs_.test.size(); ++i) {
    const auto dv = decision_values(model, blobs_.test.row(i));
    EXPECT_EQ(table[i + 1][0], blobs_.test.id(i));
    for (std::size_t c = 0; c < dv.size(); ++c) {
      EXPECT_EQ(text::parse_double(table[i + 1][c + 1], "score"), dv[c]);
    }
  }
}

TEST_F(CliTest, PredictPoolsRepresentations) {
  ASSERT_EQ(run("train --features " + path("train.tsv") + " --labels " + path("labels.tsv") +
                " --strategy ova --out " + path("m.otsvm"))
                .code,
            0);
  FeatureMatrix reps(blobs_.test.dim());
  for (std::size_t i = 0; i < blobs_.test.size(); ++i) {
    for (std::size_t k = 0; k < 16; ++k) {
      std::vector<double> row(blobs_.test.row(i).begin(), blobs_.test.row(i).end());
      row[0] += 0.1 * static_cast<double>(k);
      reps.append(representation_id(blobs_.test.id(i), k), row);
    }
  }
  save_features(reps, path("reps.tsv"), FeatureFormat::kTsv);
  const auto model = load_model(path("m.otsvm"));
  for (const auto pooling : {Pooling::kSum, Pooling::kMax}) {
    const auto r = run("predict --model " + path("m.otsvm") + " --features " +
                       path("reps.tsv") + " --pooling " + std::string(to_string(pooling)));
    ASSERT_EQ(r.code, 0) << r.err;
    const auto table = rows(r.out);
    ASSERT_EQ(table.size(), blobs_.test.size() + 1);
    for (std::size_t i = 0; i < blobs_.test.size(); ++i) {
      for (std::size_t c = 0; c < model.classes.size(); ++c) {
        std::vector<double> column;
        for (std::size_t k = 0; k < 16; ++k) {
          column.push_back(decision_values(model, reps.row(i * 16 + k))[c]);
        }
        EXPECT_EQ(text::parse_double(table[i + 1][c + 1], "score"),
                  pool_responses(column, pooling));
      }
    }
  }
}

TEST_F(CliTest, PredictOvoLabelsAndAccuracy) {
  ASSERT_EQ(run("train --features " + path("train.tsv") + " --labels " + path("labels.tsv") +
                " --out " + path("m.otsvm"))
                .code,
            0);
  ASSERT_EQ(run("predict --model " + path("m.otsvm") + " --features " + path("test.tsv") +
                " --out " + path("pred.tsv"))
                .code,
            0);
  const auto model = load_model(path("m.otsvm"));
  const auto table = rows(text::read_file(path("pred.tsv")));
  ASSERT_EQ(table.size(), blobs_.test.size());
  std::vector<std::string> predicted, truth;
  for (std::size_t i = 0; i < blobs_.test.size(); ++i) {
    EXPECT_EQ(table[i][1], predict_ovo(model, blobs_.test.row(i)));
    predicted.push_back(table[i][1]);
    truth.push_back(blobs_.test_labels.at(blobs_.test.id(i)).front());
  }
  const auto r = run("evaluate --truth " + path("labels.tsv") + " --predictions " +
                     path("pred.tsv"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto cm = confusion(predicted, truth, model.classes);
  const std::vector<ReportRow> expected{{"accuracy", mean_diag_accuracy(cm)}};
  EXPECT_EQ(r.out, format_report(expected));
}

TEST_F(CliTest, EvaluatePerfectScores) {
  std::string scores = "id\tclass0\tclass1\tclass2\n";
  std::string preds;
  for (std::size_t i = 0; i < blobs_.test.size(); ++i) {
    const auto& l = blobs_.test_labels.at(blobs_.test.id(i)).front();
    scores += blobs_.test.id(i);
    for (const char* c : {"class0", "class1", "class2"}) scores += l == c ? "\t1" : "\t-1";
    scores += "\n";
    preds += blobs_.test.id(i) + "\t" + l + "\n";
  }
  text::write_file_atomic(path("scores.tsv"), scores);
  text::write_file_atomic(path("preds.tsv"), preds);
  const auto r = run("evaluate --truth " + path("labels.tsv") + " --scores " +
                     path("scores.tsv") + " --predictions " + path("preds.tsv"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "class0\t1\nclass1\t1\nclass2\t1\nmAP\t1\naccuracy\t1\n");
}

TEST_F(CliTest, EvaluateScoresMatchLibrary) {
  ASSERT_EQ(run("train --features " + path("train.tsv") + " --labels " + path("labels.tsv") +
                " --strategy ova --C 0.01 --out " + path("m.otsvm"))
                .code,
            0);
  ASSERT_EQ(run("predict --model " + path("m.otsvm") + " --features " + path("test.tsv") +
                " --out " + path("scores.tsv"))
                .code,
            0);
  const auto model = load_model(path("m.otsvm"));
  for (const auto mode : {ApMode::kAllPoints, ApMode::kElevenPoint}) {
    const std::string name = mode == ApMode::kAllPoints ? "all_points" : "eleven_point";
    const auto r = run("evaluate --truth " + path("labels.tsv") + " --scores " +
                       path("scores.tsv") + " --ap-mode " + name);
    ASSERT_EQ(r.code, 0) << r.err;
    std::vector<ReportRow> expected;
    std::vector<double> aps;
    for (std::size_t c = 0; c < model.classes.size(); ++c) {
      std::vector<double> s;
      std::vector<bool> positive;
      for (std::size_t i = 0; i < blobs_.test.size(); ++i) {
        s.push_back(decision_values(model, blobs_.test.row(i))[c]);
        positive.push_back(blobs_.test_labels.at(blobs_.test.id(i)).front() ==
                           model.classes[c]);
      }
      aps.push_back(average_precision(s, positive, mode));
      expected.push_back({model.classes[c], aps.back()});
    }
    expected.push_back({"mAP", mean_ap(aps)});
    EXPECT_EQ(r.out, format_report(expected));
  }
}

TEST_F(CliTest, IndexAndQueryMatchLibrary) {
  write_images(5);
  ASSERT_EQ(run("index --references " + path("refs.tsv") + " --extractor toy:3 --out " +
                path("i.otidx"))
                .code,
            0);
  const auto index = load_index(path("i.otidx"));
  EXPECT_EQ(index.config.h_r, 4);
  EXPECT_EQ(index.config.h_q, 3);
  EXPECT_EQ(index.extractor_binding, "toy:3");

  ToyPixelExtractor toy(3);
  std::vector<ImageRef> refs;
  for (int i = 0; i < 5; ++i) {
    const std::string id = "img" + std::to_string(i);
    refs.push_back(ImageRef::from_file(id, path(id + ".pgm")));
  }
  const auto direct = build_index(refs, SpatialSearchConfig{}, toy).index;
  EXPECT_EQ(serialize_index(direct), serialize_index(index));

  const auto r = run("query --index " + path("i.otidx") + " --queries " + path("queries.tsv") +
                     " --top-k 3");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto table = rows(r.out);
  ASSERT_EQ(table.size(), 15u);
  for (int i = 0; i < 5; ++i) {
    const std::string id = "qimg" + std::to_string(i);
    const auto q = ImageRef::from_file(id, path(id + ".pgm"));
    const auto result = search(index, q, toy, 3, 3);
    for (std::size_t k = 0; k < 3; ++k) {
      const auto& row = table[i * 3 + k];
      EXPECT_EQ(row[0], id);
      EXPECT_EQ(row[1], std::to_string(k + 1));
      EXPECT_EQ(row[2], result[k].id);
      EXPECT_EQ(text::parse_double(row[3], "distance"), result[k].distance);
    }
    EXPECT_EQ(table[i * 3][2], "img" + std::to_string(i));
  }
}

TEST_F(CliTest, RankingRecallExcludesSelf) {
  std::string ranking = "a\t1\ta\t0\na\t2\tb\t1\na\t3\tc\t2\n";
  text::write_file_atomic(path("rank.tsv"), ranking);
  text::write_file_atomic(path("truth.tsv"), "a\tg\nb\tg\nc\th\n");
  auto r = run("evaluate --truth " + path("truth.tsv") + " --ranking " + path("rank.tsv") +
               " --k 1");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "recall@1\t1\n");
  r = run("evaluate --truth " + path("truth.tsv") + " --ranking " + path("rank.tsv") +
          " --k 1 --keep-self");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "recall@1\t0.5\n");
}

TEST_F(CliTest, PreprocessMatchesLibrary) {
  ASSERT_EQ(run("preprocess-fit --features " + path("train.tsv") + " --pca-dim 3 --out " +
                path("p.pcaw"))
                .code,
            0);
  const auto fit = retrieval_pipeline_fit(blobs_.train, PipelineConfig{3, 2.0, 1e-10});
  EXPECT_EQ(load_pca_model(path("p.pcaw")), fit.model);
  const auto r = run("preprocess-apply --model " + path("p.pcaw") + " --features " +
                     path("test.tsv") + " --power 2");
  ASSERT_EQ(r.code, 0) << r.err;
  FeatureMatrix expected(3);
  for (std::size_t i = 0; i < blobs_.test.size(); ++i) {
    expected.append(blobs_.test.id(i),
                    retrieval_pipeline_apply(fit.model, PipelineConfig{3, 2.0, 1e-10},
                                             blobs_.test.row(i))
                        .values());
  }
  EXPECT_EQ(r.out, serialize_features(expected, FeatureFormat::kTsv));
}

TEST_F(CliTest, PlansDumpGeometry) {
  const auto r = run("plans --width 300 --height 300");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto table = rows(r.out);
  ASSERT_EQ(table.size(), 17u);
  EXPECT_EQ(table[2], (std::vector<std::string>{"1", "0", "0", "200", "200", "0", "0"}));
  EXPECT_EQ(table[16][6], "1");
  EXPECT_EQ(rows(run("plans --width 20 --height 10 --kind negative").out).size(), 11u);
}

TEST_F(CliTest, ExitCodes) {
  auto r = run("train --features " + path("missing.tsv") + " --labels " + path("labels.tsv") +
               " --out " + path("m.otsvm"));
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
  EXPECT_EQ(run("train --features " + path("train.tsv")).code, 2);
  EXPECT_EQ(run("train --features " + path("train.tsv") + " --labels " + path("labels.tsv") +
                " --C -1 --out " + path("m.otsvm"))
                .code,
            2);
  EXPECT_EQ(run("bogus").code, 2);
  EXPECT_EQ(run("--help").code, 0);

  ASSERT_EQ(run("train --features " + path("train.tsv") + " --labels " + path("labels.tsv") +
                " --out " + path("m.otsvm"))
                .code,
            0);
  FeatureMatrix wrong(2);
  wrong.append("x", std::vector<double>{1.0, 2.0});
  save_features(wrong, path("wrong.tsv"), FeatureFormat::kTsv);
  r = run("predict --model " + path("m.otsvm") + " --features " + path("wrong.tsv"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("DimMismatch"), std::string::npos);
}

}  // namespace
}  // namespace ots
