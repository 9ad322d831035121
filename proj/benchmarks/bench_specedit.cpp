// Copyright (c) 2026 The specedit Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <memory>
#include <random>

#include "specedit/editing.hpp"
#include "specedit/fit.hpp"
#include "specedit/spectral.hpp"
#include "specedit/toy_model.hpp"

namespace specedit {
namespace {

Matrix gaussian(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

ActivationSet random_set(Index d, Index n, int layers) {
  ActivationSet set;
  for (int l = 0; l < layers; ++l) {
    set.layer_ids.push_back(l);
    const auto seed = static_cast<std::uint64_t>(3 * l);
    set.layers.push_back({gaussian(d, n, seed).cast<float>(), gaussian(d, n, seed + 1).cast<float>(),
                          gaussian(d, n, seed + 2).cast<float>()});
  }
  return set;
}

void BM_Svd(benchmark::State& state) {
  const Index d = state.range(0);
  const Matrix a = gaussian(d, d, 1);
  for (auto _ : state) benchmark::DoNotOptimize(svd(a));
}
BENCHMARK(BM_Svd)->Arg(16)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_Fit(benchmark::State& state) {
  const Index d = state.range(0);
  const ActivationSet set = random_set(d, 200, 4);
  EditConfig config;
  config.explained_variance = 0.99;
  config.layers = LayerSelection::top(4);
  for (auto _ : state) benchmark::DoNotOptimize(fit_bundle(set, config));
}
BENCHMARK(BM_Fit)->Arg(16)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_EditSequence(benchmark::State& state) {
  const Index d = state.range(0);
  const Index tokens = 128;
  EditConfig config;
  config.explained_variance = 0.99;
  config.layers = LayerSelection::top(1);
  auto bundle = std::make_shared<const ProjectionBundle>(fit_bundle(random_set(d, 200, 1), config));
  const Editor editor(bundle, config);
  const Matrix z = gaussian(d, tokens, 7);
  for (auto _ : state) benchmark::DoNotOptimize(editor.edit_sequence(0, z, NormWindow::incremental));
  state.SetItemsProcessed(state.iterations() * tokens);
}
BENCHMARK(BM_EditSequence)->Arg(16)->Arg(64)->Arg(256)->Unit(benchmark::kMicrosecond);

void BM_ToyForward(benchmark::State& state) {
  const ToyModel model(ToyModelConfig{.layers = 4, .width = 16, .vocab = 256, .context = 64, .seed = 0});
  std::vector<int> prompt(64);
  for (std::size_t i = 0; i < prompt.size(); ++i) prompt[i] = static_cast<int>((7 * i) % 256);
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(prompt));
}
BENCHMARK(BM_ToyForward)->Unit(benchmark::kMicrosecond);

}  // namespace
}  // namespace specedit

BENCHMARK_MAIN();
