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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "ots/error.hpp"
#include "ots/preprocess.hpp"
#include "test_util.hpp"

namespace ots {
namespace {

FeatureMatrix gaussian(std::uint64_t seed, std::size_t n, std::size_t d, double scale_decay = 0.9) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  FeatureMatrix m(d);
  std::vector<double> row(d);
  for (std::size_t i = 0; i < n; ++i) {
    double scale = 3.0;
    for (double& v : row) {
      v = 1.0 + scale * normal(rng);
      scale *= scale_decay;
    }
    m.append("r" + std::to_string(i), row);
  }
  return m;
}

void expect_orthonormal(const PcaWhitenModel& m, double tol) {
  for (std::size_t a = 0; a < m.k; ++a) {
    for (std::size_t b = 0; b < m.k; ++b) {
      double dot = 0;
      for (std::size_t j = 0; j < m.d_in; ++j) dot += m.component(a)[j] * m.component(b)[j];
      EXPECT_NEAR(dot, a == b ? 1.0 : 0.0, tol) << a << "," << b;
    }
  }
}

TEST(L2Normalize, Examples) {
  const auto v = l2_normalize(std::vector<double>{3, 4});
  EXPECT_DOUBLE_EQ(v[0], 0.6);
  EXPECT_DOUBLE_EQ(v[1], 0.8);
  const auto z = l2_normalize(std::vector<double>{0, 0});
  EXPECT_EQ(z[0], 0.0);
  EXPECT_EQ(z[1], 0.0);
}

TEST(L2Normalize, UnitNormAndIdempotence) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0, 100);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> v(1 + t % 13);
    for (double& x : v) x = normal(rng);
    const auto once = l2_normalize(v);
    EXPECT_NEAR(l2_norm(once.values()), 1.0, 1e-12);
    const auto twice = l2_normalize(once.values());
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(twice[i], once[i], 1e-12);
  }
}

TEST(SignedPower, Examples) {
  EXPECT_EQ(signed_power(std::vector<double>{-2, 3}, 2).values()[0], -4.0);
  EXPECT_EQ(signed_power(std::vector<double>{-2, 3}, 2).values()[1], 9.0);
  const std::vector<double> fixed = {0, -1, 1};
  const auto squared = signed_power(fixed, 2);
  EXPECT_EQ(std::vector<double>(squared.values().begin(), squared.values().end()), fixed);
  const std::vector<double> v = {-0.3, 1.7, 0.0, 4.0};
  const auto id = signed_power(v, 1);
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(id[i], v[i]);
}

TEST(SignedPower, PreservesSignPatternAndZeros) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0, 1);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> v(8);
    for (double& x : v) x = (rng() % 4 == 0) ? 0.0 : normal(rng);
    const auto p = signed_power(v, 2);
    for (std::size_t i = 0; i < v.size(); ++i) {
      EXPECT_EQ(std::signbit(p[i]) && p[i] != 0, std::signbit(v[i]) && v[i] != 0);
      EXPECT_EQ(p[i] == 0.0, v[i] == 0.0);
    }
  }
}

TEST(PcaFit, AxisAlignedData) {
  FeatureMatrix m(2);
  const std::vector<double> xs = {-3, -1, 0, 2, 7};
  double mean = 0, var = 0;
  for (double x : xs) mean += x / xs.size();
  for (double x : xs) var += (x - mean) * (x - mean) / xs.size();
  for (std::size_t i = 0; i < xs.size(); ++i) m.append("p" + std::to_string(i), std::vector<double>{xs[i], 0});
  const auto fit = pca_fit(m, 1);
  EXPECT_FALSE(fit.warning.has_value());
  EXPECT_NEAR(fit.model.component(0)[0], 1.0, 1e-12);
  EXPECT_NEAR(fit.model.component(0)[1], 0.0, 1e-12);
  EXPECT_NEAR(fit.model.eigenvalues[0], var, 1e-12);
}

TEST(PcaFit, ConstructedCovariance) {
  // (+-2, +-1) has population covariance diag(4, 1).
  FeatureMatrix m(2);
  m.append("a", std::vector<double>{2, 1});
  m.append("b", std::vector<double>{2, -1});
  m.append("c", std::vector<double>{-2, 1});
  m.append("d", std::vector<double>{-2, -1});
  const auto fit = pca_fit(m, 2);
  const auto oracle = oracle::jacobi_eigenvalues({{4, 0}, {0, 1}});
  EXPECT_NEAR(fit.model.eigenvalues[0], oracle[0], 1e-12);
  EXPECT_NEAR(fit.model.eigenvalues[1], oracle[1], 1e-12);
  EXPECT_NEAR(std::abs(fit.model.component(0)[0]), 1.0, 1e-12);
}

TEST(PcaFit, EigenvaluesMatchJacobiOracle) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto x = gaussian(seed, 40, 6);
    const auto fit = pca_fit(x, 5);
    std::vector<std::vector<double>> cov(6, std::vector<double>(6, 0.0));
    std::vector<double> mean(6, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i)
      for (std::size_t j = 0; j < 6; ++j) mean[j] += x.row(i)[j] / x.size();
    for (std::size_t i = 0; i < x.size(); ++i)
      for (std::size_t a = 0; a < 6; ++a)
        for (std::size_t b = 0; b < 6; ++b)
          cov[a][b] += (x.row(i)[a] - mean[a]) * (x.row(i)[b] - mean[b]) / x.size();
    const auto ev = oracle::jacobi_eigenvalues(cov);
    for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(fit.model.eigenvalues[j], ev[j], 1e-9);
  }
}

TEST(PcaFit, OrthonormalAndSignConvention) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    // Both the covariance route (n > d) and the Gram route (n < d).
    for (auto [n, d] : {std::pair<std::size_t, std::size_t>{50, 8}, {10, 40}}) {
      const auto fit = pca_fit(gaussian(seed, n, d), std::min(n - 1, d) - 1);
      expect_orthonormal(fit.model, 1e-8);
      for (std::size_t j = 0; j < fit.model.k; ++j) {
        const auto c = fit.model.component(j);
        std::size_t best = 0;
        for (std::size_t i = 1; i < c.size(); ++i)
          if (std::abs(c[i]) > std::abs(c[best])) best = i;
        EXPECT_GT(c[best], 0.0);
        if (j > 0) {
          EXPECT_LE(fit.model.eigenvalues[j], fit.model.eigenvalues[j - 1]);
        }
      }
    }
  }
}

TEST(PcaFit, GramRouteAgreesWithCovarianceRoute) {
  // Same data, forced through each route by padding with zero columns.
  const auto x = gaussian(99, 12, 5);
  FeatureMatrix wide(30);
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::vector<double> row(30, 0.0);
    std::copy(x.row(i).begin(), x.row(i).end(), row.begin());
    wide.append(x.id(i), row);
  }
  const auto narrow_fit = pca_fit(x, 4);
  const auto wide_fit = pca_fit(wide, 4);
  for (std::size_t j = 0; j < 4; ++j) {
    EXPECT_NEAR(narrow_fit.model.eigenvalues[j], wide_fit.model.eigenvalues[j], 1e-9);
    for (std::size_t i = 0; i < 5; ++i) {
      EXPECT_NEAR(narrow_fit.model.component(j)[i], wide_fit.model.component(j)[i], 1e-7);
    }
  }
}

TEST(PcaFit, RankDeficiencyReducesK) {
  FeatureMatrix m(3);
  for (int i = 0; i < 6; ++i) m.append("p" + std::to_string(i), std::vector<double>{double(i), 2.0 * i, 1.0});
  const auto fit = pca_fit(m, 2);
  EXPECT_EQ(fit.model.k, 1u);
  ASSERT_TRUE(fit.warning.has_value());
  EXPECT_NE(fit.warning->find("RankDeficient"), std::string::npos);
}

TEST(PcaFit, Preconditions) {
  FeatureMatrix one(2);
  one.append("a", std::vector<double>{1, 2});
  EXPECT_THROW(pca_fit(one, 1), Error);
  EXPECT_THROW(pca_fit(gaussian(1, 5, 3), 5), Error);
}

TEST(Whitening, MeanMapsToZero) {
  const auto fit = pca_fit(gaussian(4, 30, 5), 3);
  const auto out = pca_whiten_apply(fit.model, fit.model.mean);
  for (double v : out.values()) EXPECT_EQ(v, 0.0);
}

TEST(Whitening, OneDimensional) {
  PcaWhitenModel m;
  m.k = 1;
  m.d_in = 2;
  m.epsilon = 1e-300;
  m.mean = {0, 0};
  m.components = {1, 0};
  m.eigenvalues = {4};
  EXPECT_DOUBLE_EQ(pca_whiten_apply(m, std::vector<double>{2, 5})[0], 1.0);
}

TEST(Whitening, IdentityCovarianceOnFitSet) {
  const auto x = gaussian(8, 120, 10);
  const auto fit = pca_fit(x, 6);
  std::vector<std::vector<double>> z;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto v = pca_whiten_apply(fit.model, x.row(i));
    z.emplace_back(v.values().begin(), v.values().end());
  }
  for (std::size_t a = 0; a < 6; ++a) {
    double mean = 0;
    for (const auto& r : z) mean += r[a] / z.size();
    EXPECT_NEAR(mean, 0.0, 1e-8);
    for (std::size_t b = 0; b < 6; ++b) {
      double cov = 0;
      for (const auto& r : z) cov += r[a] * r[b] / z.size();
      EXPECT_NEAR(cov, a == b ? 1.0 : 0.0, 1e-6);
    }
  }
}

TEST(Whitening, DimMismatch) {
  const auto fit = pca_fit(gaussian(4, 30, 5), 3);
  try {
    pca_whiten_apply(fit.model, std::vector<double>{1, 2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDimMismatch);
  }
}

TEST(RetrievalPipeline, ClampsWithWarning) {
  const auto fit = retrieval_pipeline_fit(gaussian(2, 3, 4), PipelineConfig{});
  EXPECT_EQ(fit.model.k, 2u);
  ASSERT_TRUE(fit.warning.has_value());
  EXPECT_NE(fit.warning->find("clamped"), std::string::npos);
}

TEST(RetrievalPipeline, UnitRowsMatchPlainPca) {
  const auto raw = gaussian(6, 20, 5);
  FeatureMatrix unit(5);
  for (std::size_t i = 0; i < raw.size(); ++i) unit.append(raw.id(i), l2_normalize(raw.row(i)).values());
  PipelineConfig cfg;
  cfg.pca_dim = 3;
  const auto a = retrieval_pipeline_fit(unit, cfg).model;
  const auto b = pca_fit(unit, 3, cfg.epsilon).model;
  ASSERT_EQ(a.k, b.k);
  for (std::size_t j = 0; j < a.k; ++j) EXPECT_NEAR(a.eigenvalues[j], b.eigenvalues[j], 1e-14);
  for (std::size_t j = 0; j < a.components.size(); ++j) {
    EXPECT_NEAR(a.components[j], b.components[j], 1e-10);
  }
}

TEST(RetrievalPipeline, ScaleInvarianceAndUnitIntermediate) {
  const auto x = gaussian(12, 40, 8);
  PipelineConfig cfg;
  cfg.pca_dim = 5;
  const auto fit = retrieval_pipeline_fit(x, cfg);
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::vector<double> scaled(x.row(i).begin(), x.row(i).end());
    for (double& v : scaled) v *= 7.0;
    const auto a = retrieval_pipeline_apply(fit.model, cfg, x.row(i));
    const auto b = retrieval_pipeline_apply(fit.model, cfg, scaled);
    ASSERT_EQ(a.dim(), 5u);
    for (std::size_t j = 0; j < a.dim(); ++j) EXPECT_NEAR(a[j], b[j], 1e-12);
    const auto stages = retrieval_pipeline_stages(fit.model, cfg, x.row(i));
    EXPECT_NEAR(l2_norm(stages.renormalized.values()), 1.0, 1e-12);
  }
}

TEST(RetrievalPipeline, OneDimensionalCollapse) {
  const auto x = gaussian(13, 10, 3);
  PipelineConfig cfg;
  cfg.pca_dim = 1;
  const auto fit = retrieval_pipeline_fit(x, cfg);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = retrieval_pipeline_apply(fit.model, cfg, x.row(i))[0];
    EXPECT_TRUE(v == -1.0 || v == 0.0 || v == 1.0) << v;
  }
}

TEST(PcaModelIo, RoundTripIsExact) {
  ots::testing::TempDir dir;
  const auto fit = pca_fit(gaussian(21, 25, 7), 4);
  save_pca_model(fit.model, dir / "m.pcaw");
  EXPECT_EQ(load_pca_model(dir / "m.pcaw"), fit.model);
}

TEST(PcaModelIo, RejectsBadHeader) {
  EXPECT_THROW(parse_pca_model("PCAW2\n1\t1\t1e-10\n0\n1\n1\n"), Error);
  EXPECT_THROW(parse_pca_model("PCAW1\n1\t2\t1e-10\n0\t0\n1\t0\n"), Error);
}

}  // namespace
}  // namespace ots
