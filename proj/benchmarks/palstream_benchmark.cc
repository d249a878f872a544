// Copyright 2026 The palstream Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "palstream/codec.h"
#include "palstream/kmeans.h"
#include "palstream/metrics.h"
#include "palstream/regression.h"
#include "palstream/synth.h"

namespace palstream {
namespace {

void BM_KmeansRun(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 255.0);
  std::vector<double> coords(n * 3);
  for (auto& v : coords) v = u(rng);
  kmeans::PointSet data(3, std::move(coords));
  for (auto _ : state) {
    benchmark::DoNotOptimize(kmeans::run(data, {.k = k, .seed = 0}));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_KmeansRun)->Args({10000, 16})->Args({10000, 128})->Unit(benchmark::kMillisecond);

void BM_Encode(benchmark::State& state) {
  RgbImage img = synth::photo({300, 212}, 3);
  const int mu = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(encode(img, mu));
  state.SetItemsProcessed(state.iterations() *
                          static_cast<std::int64_t>(img.pixel_count()));
}
BENCHMARK(BM_Encode)->Arg(8)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_SerializeRoundTrip(benchmark::State& state) {
  RgbImage img = synth::photo({640, 480}, 4);
  QuantizedImage q = encode(img, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto bytes = serialize(q);
    benchmark::DoNotOptimize(deserialize(bytes));
  }
  state.SetBytesProcessed(state.iterations() *
                          static_cast<std::int64_t>(serialize(q).size()));
}
BENCHMARK(BM_SerializeRoundTrip)->Arg(16)->Arg(256);

void BM_Psnr(benchmark::State& state) {
  RgbImage a = synth::photo({640, 480}, 5);
  RgbImage b = synth::photo({640, 480}, 6);
  for (auto _ : state) benchmark::DoNotOptimize(metrics::psnr(a, b));
}
BENCHMARK(BM_Psnr);

void BM_RegressionFit(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  regression::Dataset d(3);
  for (std::size_t i = 0; i < n; ++i) {
    double x[] = {u(rng), u(rng), u(rng)};
    d.add_row(x, 1.0 + 2.0 * x[0] - x[1] + 0.5 * x[2] + u(rng));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(regression::fit_with_outlier_removal(
        d, regression::CooksRule::four_over_n()));
  }
}
BENCHMARK(BM_RegressionFit)->Arg(50)->Arg(1000);

}  // namespace
}  // namespace palstream

BENCHMARK_MAIN();
