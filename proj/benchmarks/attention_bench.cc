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

#include "proxyform/numerics.h"
#include "proxyform/proxy.h"
#include "proxyform/random.h"

namespace proxyform {
namespace {

Matrix<float> random_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  Matrix<float> m(rows, cols);
  for (float& v : m.data()) v = static_cast<float>(rng.normal());
  return m;
}

void BM_SelfAttention(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const auto q = random_matrix(rng, n, 64);
  const auto k = random_matrix(rng, n, 64);
  const auto v = random_matrix(rng, n, 64);
  for (auto _ : state) benchmark::DoNotOptimize(attention(q, k, v));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SelfAttention)->RangeMultiplier(2)->Range(128, 2048)->Complexity();

void BM_ProxyAttention(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const auto q = random_matrix(rng, n, 64);
  const auto k = random_matrix(rng, n, 64);
  const auto v = random_matrix(rng, n, 64);
  const auto p = random_matrix(rng, 32, 64);
  for (auto _ : state) benchmark::DoNotOptimize(proxy_attention(q, k, v, p));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ProxyAttention)->RangeMultiplier(2)->Range(128, 2048)->Complexity();

void BM_ProxyBlock(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  BlockInit init;
  init.width = 256;
  init.bias_rows = n;
  const auto params = proxy_block_init<float>(3, init);
  const auto f0 = random_matrix(rng, n, 256);
  const auto p0 = random_matrix(rng, 32, 256);
  for (auto _ : state) benchmark::DoNotOptimize(proxy_block(params, f0, p0));
}
BENCHMARK(BM_ProxyBlock)->Arg(256)->Arg(691);

}  // namespace
}  // namespace proxyform
