// Copyright 2026 The steplab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Microbenchmarks for the hot numeric paths.

#include <random>

#include <benchmark/benchmark.h>

#include "steplab/model.hpp"
#include "steplab/nummath.hpp"
#include "steplab/pathways.hpp"
#include "steplab/pseudolabel.hpp"

namespace steplab {
namespace {

DenseMatrix Random(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DenseMatrix m(rows, cols);
  for (double& v : m.data()) v = u(rng);
  return m;
}

void BM_CosineSimilarity(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const DenseMatrix a = Random(16, 512, 1);
  const DenseMatrix b = Random(n, 512, 2);
  for (auto _ : state) benchmark::DoNotOptimize(CosineSimilarityMatrix(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(16 * n));
}
BENCHMARK(BM_CosineSimilarity)->Arg(64)->Arg(256)->Arg(1024);

void BM_BuildSvLabels(benchmark::State& state) {
  const auto t = static_cast<std::size_t>(state.range(0));
  DenseMatrix fused = Random(16, t, 3);
  for (double& v : fused.data()) v = 0.5 * (v + 1.0);
  const ScoreMatrix scores{Pathway::kFused, fused};
  for (auto _ : state) benchmark::DoNotOptimize(BuildSvLabels(scores, 0.65, 2));
}
BENCHMARK(BM_BuildSvLabels)->Arg(64)->Arg(512);

ModelConfig BenchConfig() {
  ModelConfig c;
  c.video_input_dim = 512;
  c.step_input_dim = 512;
  c.hidden_dim = 128;
  c.heads = 4;
  c.layers = 2;
  c.max_positions = 256;
  return c;
}

void BM_Forward(benchmark::State& state) {
  const ModelParams params = InitParams(BenchConfig(), 0);
  const DenseMatrix video = Random(static_cast<std::size_t>(state.range(0)), 512, 4);
  const DenseMatrix steps = Random(12, 512, 5);
  for (auto _ : state) benchmark::DoNotOptimize(Forward(params, video, steps));
}
BENCHMARK(BM_Forward)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_ForwardBackward(benchmark::State& state) {
  const ModelParams params = InitParams(BenchConfig(), 0);
  const DenseMatrix video = Random(static_cast<std::size_t>(state.range(0)), 512, 4);
  const DenseMatrix steps = Random(12, 512, 5);
  const DenseMatrix grad = Random(12, video.rows(), 6);
  for (auto _ : state) {
    const ForwardResult fwd = Forward(params, video, steps);
    benchmark::DoNotOptimize(Backward(params, fwd.cache, grad));
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace steplab

BENCHMARK_MAIN();
