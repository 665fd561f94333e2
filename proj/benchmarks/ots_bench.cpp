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


#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "ots/feature.hpp"
#include "ots/preprocess.hpp"
#include "ots/retrieval.hpp"
#include "ots/svm.hpp"

namespace {

ots::TrainingSet blobs(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  ots::TrainingSet t(d);
  std::vector<double> x(d);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = i % 2 == 0 ? 1 : -1;
    for (auto& v : x) v = noise(rng) + 0.5 * y;
    t.add(x, y);
  }
  return t;
}

ots::FeatureMatrix gaussian_matrix(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  ots::FeatureMatrix m(d);
  std::vector<double> x(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : x) v = noise(rng);
    m.append("r" + std::to_string(i), x);
  }
  return m;
}

void BM_TrainBinary(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto d = static_cast<std::size_t>(state.range(1));
  const auto train = blobs(n, d, 7);
  ots::SolverConfig cfg;
  cfg.C = 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ots::train_binary(train, cfg));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_TrainBinary)->Args({200, 64})->Args({1000, 64})->Args({500, 1024})
    ->Unit(benchmark::kMillisecond);

void BM_PcaFit(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto d = static_cast<std::size_t>(state.range(1));
  const auto x = gaussian_matrix(n, d, 11);
  const std::size_t k = std::min<std::size_t>(d, n - 1) / 2;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ots::pca_fit(x, k));
  }
}
BENCHMARK(BM_PcaFit)->Args({500, 128})->Args({2000, 256})->Args({200, 4096})
    ->Unit(benchmark::kMillisecond);

void BM_Rank(benchmark::State& state) {
  const auto refs = static_cast<std::size_t>(state.range(0));
  constexpr std::size_t kDim = 128;
  std::mt19937_64 rng(13);
  std::normal_distribution<float> noise(0.0f, 1.0f);
  auto patches = [&](std::size_t count) {
    std::vector<float> v(count * kDim);
    for (auto& x : v) x = noise(rng);
    return ots::PatchSet(kDim, std::move(v));
  };
  ots::RetrievalIndex index;
  for (std::size_t r = 0; r < refs; ++r) {
    ots::IndexEntry e;
    e.id = "ref" + std::to_string(r);
    e.size = {64, 64};
    e.patches = ots::multi_level_patches(64, 64, 4);
    e.vectors = patches(e.patches.size());
    index.entries.push_back(std::move(e));
  }
  const auto query = patches(14);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ots::rank(index, query, 10));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(refs));
}
BENCHMARK(BM_Rank)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
