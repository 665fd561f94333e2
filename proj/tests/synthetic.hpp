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

// Seeded synthetic data shared by unit, integration and acceptance tests.
#ifndef OTS_TESTS_SYNTHETIC_HPP_
#define OTS_TESTS_SYNTHETIC_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ots/feature.hpp"
#include "ots/image.hpp"
#include "oracles.hpp"

namespace ots::synthetic {

inline oracle::SvmInstance random_svm_instance(std::mt19937_64& rng, std::size_t n,
                                               std::size_t d) {
  std::normal_distribution<double> normal(0.0, 1.0);
  oracle::SvmInstance inst;
  inst.dim = d;
  std::vector<double> direction(d);
  for (double& v : direction) v = normal(rng);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> x(d);
    for (double& v : x) v = normal(rng);
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) s += x[j] * direction[j];
    // Noisy linear labels so some instances are not separable.
    int y = (s + 0.7 * normal(rng)) >= 0.0 ? 1 : -1;
    if (i == 0) y = 1;
    if (i == 1) y = -1;
    inst.x.push_back(std::move(x));
    inst.y.push_back(y);
  }
  return inst;
}

struct Blobs {
  FeatureMatrix train{1};
  LabelMap train_labels;
  FeatureMatrix test{1};
  LabelMap test_labels;
  std::vector<std::vector<double>> centers;
};

// `classes` isotropic Gaussian clusters with unit noise; centres are drawn
// on a sphere of radius `separation`.
inline Blobs gaussian_blobs(std::uint64_t seed, std::size_t classes, std::size_t dim,
                            std::size_t train_per_class, std::size_t test_per_class,
                            double separation) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Blobs b;
  b.train = FeatureMatrix(dim);
  b.test = FeatureMatrix(dim);
  for (std::size_t c = 0; c < classes; ++c) {
    std::vector<double> center(dim);
    double norm = 0.0;
    for (double& v : center) {
      v = normal(rng);
      norm += v * v;
    }
    for (double& v : center) v *= separation / std::sqrt(norm);
    b.centers.push_back(center);
  }
  auto fill = [&](FeatureMatrix& m, LabelMap& labels, std::size_t per_class,
                  const std::string& prefix) {
    for (std::size_t i = 0; i < per_class; ++i) {
      for (std::size_t c = 0; c < classes; ++c) {
        std::vector<double> x(dim);
        for (std::size_t j = 0; j < dim; ++j) x[j] = b.centers[c][j] + normal(rng);
        const std::string id = prefix + std::to_string(c) + "_" + std::to_string(i);
        m.append(id, x);
        labels[id] = {"class" + std::to_string(c)};
      }
    }
  };
  fill(b.train, b.train_labels, train_per_class, "tr");
  fill(b.test, b.test_labels, test_per_class, "te");
  return b;
}

// Smooth random texture: a sum of oriented sinusoids plus Gaussian bumps,
// rescaled into [0, 1].
inline PixelGrid textured_image(std::uint64_t seed, int width, int height) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  struct Wave { double fx, fy, phase, amp; };
  struct Bump { double cx, cy, sigma, amp; };
  std::vector<Wave> waves;
  for (int i = 0; i < 4; ++i) {
    waves.push_back({(uni(rng) * 2 - 1) * 0.08, (uni(rng) * 2 - 1) * 0.08,
                     uni(rng) * 6.283, 0.5 + uni(rng)});
  }
  std::vector<Bump> bumps;
  for (int i = 0; i < 6; ++i) {
    bumps.push_back({uni(rng) * width, uni(rng) * height, 6 + uni(rng) * 14,
                     (uni(rng) * 2 - 1) * 2.0});
  }
  std::vector<double> v(static_cast<std::size_t>(width) * height);
  double lo = 1e300, hi = -1e300;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double s = 0.0;
      for (const auto& w : waves) s += w.amp * std::sin(w.fx * x + w.fy * y + w.phase);
      for (const auto& b : bumps) {
        const double dx = x - b.cx, dy = y - b.cy;
        s += b.amp * std::exp(-(dx * dx + dy * dy) / (2 * b.sigma * b.sigma));
      }
      v[static_cast<std::size_t>(y) * width + x] = s;
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
  }
  for (double& s : v) s = (s - lo) / (hi - lo);
  return PixelGrid(width, height, std::move(v));
}

}  // namespace ots::synthetic

#endif  // OTS_TESTS_SYNTHETIC_HPP_
