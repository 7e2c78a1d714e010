/*
 * Copyright 2026 The fdnc Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <benchmark/benchmark.h>

#include <algorithm>
#include <numeric>

#include "fdnc/divergence.h"
#include "fdnc/federation.h"

namespace {

using namespace fdnc;

Batch image_batch(const ModelSpec& spec, std::size_t n) {
  auto data = gen_synthetic_images(std::max(n, spec.num_classes), spec.num_classes, spec.input_shape, 1);
  std::vector<std::size_t> first(n);
  std::iota(first.begin(), first.end(), std::size_t{0});
  return gather(data, first);
}

void BM_DeskForward(benchmark::State& state) {
  auto spec = desk_cnn({3, 16, 16}, 10);
  auto params = init_params(spec, Rng(1, 0));
  auto batch = image_batch(spec, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(forward(spec, params, batch).loss);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DeskForward)->Arg(1)->Arg(32);

void BM_DeskBackward(benchmark::State& state) {
  auto spec = desk_cnn({3, 16, 16}, 10);
  auto params = init_params(spec, Rng(1, 0));
  auto batch = image_batch(spec, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(backward(spec, params, batch));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_DeskBackward)->Arg(1)->Arg(32);

void BM_Aggregate(benchmark::State& state) {
  auto spec = desk_cnn({3, 16, 16}, 10);
  std::vector<LocalUpdate> updates;
  for (std::size_t k = 0; k < static_cast<std::size_t>(state.range(0)); ++k)
    updates.push_back({k, init_params(spec, Rng(k, 0)), 10 + k, 0.0});
  for (auto _ : state) benchmark::DoNotOptimize(fedavg_aggregate(updates, Weighting::kBySampleCount));
}
BENCHMARK(BM_Aggregate)->Arg(2)->Arg(10);

void BM_LayerProfile(benchmark::State& state) {
  auto spec = desk_cnn({3, 16, 16}, 10);
  auto a = init_params(spec, Rng(1, 0)), b = init_params(spec, Rng(2, 0));
  const auto metric = state.range(0) ? DivergenceMetric::kCosine : DivergenceMetric::kNorm;
  for (auto _ : state) benchmark::DoNotOptimize(layer_profile(a, b, metric));
}
BENCHMARK(BM_LayerProfile)->Arg(0)->Arg(1);

}  // namespace

BENCHMARK_MAIN();
