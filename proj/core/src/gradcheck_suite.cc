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

#include "proxyform/gradcheck_suite.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>

#include "proxyform/cluster.h"
#include "proxyform/geom.h"
#include "proxyform/numerics.h"
#include "proxyform/offsetnet.h"
#include "proxyform/proxy.h"
#include "proxyform/random.h"

namespace proxyform {
namespace {

// Precision of the forward probes. Analytic gradients are always double.
using Probe = long double;

template <typename T>
Matrix<T> normal_matrix(Rng& rng, std::size_t rows, std::size_t cols, double sd) {
  Matrix<T> m(rows, cols);
  for (T& v : m.data()) v = static_cast<T>(rng.normal(0.0, sd));
  return m;
}

template <typename T>
Probe weighted_sum(const Matrix<T>& out, const Matrix<double>& g) {
  Probe total = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    total += static_cast<Probe>(out.data()[i]) * static_cast<Probe>(g.data()[i]);
  }
  return total;
}

// Flat parameter vector made of several tensors, unpacked on every probe.
struct Packed {
  std::vector<double> x;
  std::vector<std::pair<std::size_t, std::size_t>> shapes;

  void add(const Matrix<double>& m) {
    shapes.emplace_back(m.rows(), m.cols());
    x.insert(x.end(), m.data().begin(), m.data().end());
  }

  template <typename T>
  std::vector<Matrix<T>> unpack(std::span<const double> flat) const {
    std::vector<Matrix<T>> out;
    std::size_t pos = 0;
    for (auto [r, c] : shapes) {
      Matrix<T> m(r, c);
      for (T& v : m.data()) v = static_cast<T>(flat[pos++]);
      out.push_back(std::move(m));
    }
    return out;
  }
};

void append(std::vector<double>& dst, const Matrix<double>& m) {
  dst.insert(dst.end(), m.data().begin(), m.data().end());
}

template <typename Params>
void append_params(std::vector<double>& dst, const Params& p) {
  p.for_each([&](const Matrix<double>& m) { append(dst, m); });
}

GradCheckGroup run_group(const std::string& name, std::size_t instances,
                         const std::function<GradCheckResult(std::size_t)>& one) {
  const auto start = std::chrono::steady_clock::now();
  GradCheckGroup group{name, instances, 0, 0.0, 0.0};
  for (std::size_t i = 0; i < instances; ++i) {
    const GradCheckResult r = one(i);
    group.coordinates += r.coordinates;
    group.max_rel_error = std::max(group.max_rel_error, r.max_rel_error);
  }
  group.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return group;
}

GradCheckResult check_offsetnet(std::uint64_t seed, std::size_t instance, double step) {
  Rng rng(seed);
  PointCloud cloud;
  for (int i = 0; i < 24; ++i) {
    cloud.points.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
  }
  std::vector<Vec3> centers;
  for (int t = 0; t < 3; ++t) {
    centers.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
  }
  const ClusterSet cs = build_clusters(centers, cloud, {Gamma::kKnn, 5, std::nullopt});

  const std::size_t c_off = 6;
  OffsetNetParams<double> params = offsetnet_init<double>(rng.next_u64(), c_off);
  for (double& v : params.w1.bias.data()) v = rng.normal(0.0, 0.2);
  params.w2 = normal_matrix<double>(rng, c_off, 3, 0.7);
  const Matrix<double> g = normal_matrix<double>(rng, cs.size(), 3, 1.0);

  // Even instances stay inside the ball; odd ones clamp every offset.
  double s = 1e3;
  if (instance % 2 == 1) {
    const Matrix<double> raw = offsetnet_raw(params, cs, cloud);
    double shortest = INFINITY;
    for (std::size_t t = 0; t < raw.rows(); ++t) {
      shortest = std::min(shortest, norm(Vec3{raw(t, 0), raw(t, 1), raw(t, 2)}));
    }
    s = 0.5 * shortest;
  }

  auto loss = [&](std::span<const double> x) -> Probe {
    OffsetNetParams<Probe> p = params.cast<Probe>();
    unflatten(x, p);
    const Matrix<Probe> raw = offsetnet_raw(p, cs, cloud);
    return weighted_sum(clamp_rows(raw, s), g);
  };
  auto grad = [&](std::span<const double> x) {
    OffsetNetParams<double> p = params;
    unflatten(x, p);
    return flatten(offsetnet_backward(p, cs, cloud, s, g));
  };
  return grad_check(loss, grad, flatten(params), step);
}

GradCheckResult check_proxy_block(std::uint64_t seed, std::size_t instance, double step) {
  Rng rng(seed);
  constexpr std::size_t kWidth = 16, kRows = 5, kProxies = 3;
  BlockInit init;
  init.width = kWidth;
  init.ffn_mult = 4;
  init.bias_rows = kRows + 1;
  init.bias_std = 0.3;
  const ProxyBlockParams<double> params = proxy_block_init<double>(rng.next_u64(), init);
  const AttentionOptions opts{instance % 2 == 1};

  Packed inputs;
  inputs.add(normal_matrix<double>(rng, kRows, kWidth, 1.0));
  inputs.add(normal_matrix<double>(rng, kProxies, kWidth, 1.0));
  const Matrix<double> g = normal_matrix<double>(rng, kRows, kWidth, 1.0);

  const std::size_t n_params = flatten(params).size();
  std::vector<double> x0 = flatten(params);
  x0.insert(x0.end(), inputs.x.begin(), inputs.x.end());

  auto loss = [&](std::span<const double> x) -> Probe {
    ProxyBlockParams<Probe> p = params.cast<Probe>();
    unflatten(x.first(n_params), p);
    const auto in = inputs.unpack<Probe>(x.subspan(n_params));
    return weighted_sum(proxy_block(p, in[0], in[1], opts), g);
  };
  auto grad = [&](std::span<const double> x) {
    ProxyBlockParams<double> p = params;
    unflatten(x.first(n_params), p);
    const auto in = inputs.unpack<double>(x.subspan(n_params));
    const auto grads = proxy_block_backward(p, in[0], in[1], g, opts);
    std::vector<double> out = flatten(grads.params);
    append(out, grads.df0);
    append(out, grads.dp0);
    return out;
  };
  return grad_check(loss, grad, x0, step);
}

// Shared driver for both heads; `image` selects the C -> 9 head.
GradCheckResult check_head(std::uint64_t seed, std::size_t instance, double step,
                           bool image) {
  Rng rng(seed);
  constexpr std::size_t kWidth = 16, kRows = 6;
  HeadParams<double> heads = zero_heads<double>(kWidth);
  heads.for_each([&](Matrix<double>& m) {
    for (double& v : m.data()) v = rng.normal(0.0, 0.3);
  });
  const bool literal = instance % 2 == 1;
  const Matrix<double> features = normal_matrix<double>(rng, kRows, kWidth, 1.0);
  const Matrix<double> g = normal_matrix<double>(rng, kRows, image ? 9 : 3, 1.0);

  const std::size_t n_params = flatten(heads).size();
  std::vector<double> x0 = flatten(heads);
  append(x0, features);

  auto unpack_features = [&](std::span<const double> x, auto tag) {
    using T = decltype(tag);
    Matrix<T> f(kRows, kWidth);
    for (std::size_t i = 0; i < f.size(); ++i) f.data()[i] = static_cast<T>(x[n_params + i]);
    return f;
  };
  auto loss = [&](std::span<const double> x) -> Probe {
    HeadParams<Probe> h = heads.cast<Probe>();
    unflatten(x.first(n_params), h);
    const Matrix<Probe> f = unpack_features(x, Probe{});
    return image ? weighted_sum(transform_head(f, h, literal), g)
                 : weighted_sum(translation_head(f, h), g);
  };
  auto grad = [&](std::span<const double> x) {
    HeadParams<double> h = heads;
    unflatten(x.first(n_params), h);
    const Matrix<double> f = unpack_features(x, 0.0);
    const auto lin = linear_backward(f, image ? h.u_image : h.u_text, g);
    HeadParams<double> dh = zero_heads<double>(kWidth);
    (image ? dh.u_image : dh.u_text) = lin.dp;
    std::vector<double> out = flatten(dh);
    append(out, lin.dx);
    return out;
  };
  return grad_check(loss, grad, x0, step);
}

GradCheckResult check_attention_pool(std::uint64_t seed, std::size_t, double step) {
  Rng rng(seed);
  constexpr std::size_t kWidth = 16, kTokens = 8;
  LinearParams<double> score = zero_linear<double>(kWidth, 1, false);
  for (double& v : score.weight.data()) v = rng.normal(0.0, 0.5);
  const Matrix<double> tokens = normal_matrix<double>(rng, kTokens, kWidth, 1.0);
  const Matrix<double> g = normal_matrix<double>(rng, 1, kWidth, 1.0);

  const std::size_t n_params = score.weight.size();
  std::vector<double> x0 = flatten(score);
  append(x0, tokens);

  auto loss = [&](std::span<const double> x) -> Probe {
    LinearParams<Probe> s = score.cast<Probe>();
    unflatten(x.first(n_params), s);
    Matrix<Probe> t(kTokens, kWidth);
    for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = static_cast<Probe>(x[n_params + i]);
    return weighted_sum(attention_pool(s, t), g);
  };
  auto grad = [&](std::span<const double> x) {
    LinearParams<double> s = score;
    unflatten(x.first(n_params), s);
    const Matrix<double> t(kTokens, kWidth,
                           std::vector<double>(x.begin() + n_params, x.end()));
    const auto grads = attention_pool_backward(s, t, g);
    std::vector<double> out = flatten(grads.dscore);
    append(out, grads.dtokens);
    return out;
  };
  return grad_check(loss, grad, x0, step);
}

}  // namespace

double GradCheckSuiteResult::max_rel_error() const {
  double worst = 0.0;
  for (const auto& g : groups) worst = std::max(worst, g.max_rel_error);
  return worst;
}

double GradCheckSuiteResult::seconds() const {
  double total = 0.0;
  for (const auto& g : groups) total += g.seconds;
  return total;
}

GradCheckSuiteResult run_gradcheck_suite(const GradCheckSuiteOptions& opts) {
  using Check = std::function<GradCheckResult(std::uint64_t, std::size_t, double)>;
  const std::pair<const char*, Check> checks[] = {
      {"offsetnet", check_offsetnet},
      {"proxy_block", check_proxy_block},
      {"translation_head",
       [](std::uint64_t s, std::size_t i, double h) { return check_head(s, i, h, false); }},
      {"transform_head",
       [](std::uint64_t s, std::size_t i, double h) { return check_head(s, i, h, true); }},
      {"attention_pool", check_attention_pool},
  };
  GradCheckSuiteResult result;
  std::uint64_t stream = 0;
  for (const auto& [name, check] : checks) {
    const std::uint64_t group_seed = derive_seed(opts.seed, stream++);
    result.groups.push_back(run_group(name, opts.instances, [&](std::size_t i) {
      return check(derive_seed(group_seed, i), i, opts.step);
    }));
  }
  return result;
}

}  // namespace proxyform
