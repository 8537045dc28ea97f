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

#include "proxyform/cluster.h"
#include "proxyform/scene.h"

namespace proxyform {
namespace {

void BM_Knn(benchmark::State& state) {
  const PointCloud cloud = gen_scene(SceneSpec::desk(state.range(0)), 1).cloud;
  const Vec3 center{0.1, 0.2, 0.3};
  for (auto _ : state) benchmark::DoNotOptimize(knn(center, cloud, 32));
}
BENCHMARK(BM_Knn)->Arg(5000)->Arg(20000);

void BM_BuildClusters(benchmark::State& state) {
  const PointCloud cloud = gen_scene(SceneSpec::desk(5000), 1).cloud;
  GridSpec spec;
  const Bounds box = bounding_box(cloud);
  spec.bounds_min = box.min;
  spec.bounds_max = box.max;
  const auto centers = grid_prior(spec);
  const int threads = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_clusters(centers, cloud, {}, threads));
  }
}
BENCHMARK(BM_BuildClusters)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_Fps(benchmark::State& state) {
  const PointCloud cloud = gen_scene(SceneSpec::desk(1728), 2).cloud;
  for (auto _ : state) benchmark::DoNotOptimize(fps(cloud.points, 691, 0));
}
BENCHMARK(BM_Fps)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace proxyform
