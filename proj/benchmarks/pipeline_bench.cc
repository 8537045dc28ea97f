// Copyright 2026 The proxyform Authors. All Rights Reserved.
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

#include <benchmark/benchmark.h>

#include "proxyform/pipeline.h"

namespace proxyform {
namespace {

void BM_Enhance(benchmark::State& state) {
  PipelineConfig cfg;
  cfg.scene = SceneSpec::desk(static_cast<std::size_t>(state.range(0)));
  cfg.width = static_cast<std::size_t>(state.range(1));
  cfg.layers = 1;
  const PointCloud cloud = gen_scene(cfg.scene, cfg.seed).cloud;
  const Proxies proxies = default_proxies(cfg);
  const Model model = init_model(cfg);
  for (auto _ : state) benchmark::DoNotOptimize(enhance(cfg, cloud, proxies, model));
}
BENCHMARK(BM_Enhance)
    ->Args({5000, 81})
    ->Args({20000, 81})
    ->Args({5000, 256})
    ->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace proxyform
