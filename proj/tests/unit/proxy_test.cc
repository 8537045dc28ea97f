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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "oracles.h"
#include "proxyform/error.h"
#include "proxyform/gradcheck_suite.h"
#include "proxyform/proxy.h"

namespace proxyform {
namespace {

using oracle::max_abs_diff;
using oracle::random_matrix;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInvalidArgument;
}

// Half-pixel bilinear sample of a d x d grid at output cell (i, j) of s x s.
double bilinear(std::span<const double> grid, std::size_t d, std::size_t s, std::size_t i,
                std::size_t j) {
  auto axis = [&](std::size_t o, std::size_t& lo, std::size_t& hi, double& w) {
    double src = (o + 0.5) * static_cast<double>(d) / static_cast<double>(s) - 0.5;
    if (src < 0) src = 0;
    lo = static_cast<std::size_t>(src);
    if (lo > d - 1) lo = d - 1;
    hi = lo + 1 < d ? lo + 1 : d - 1;
    w = src - static_cast<double>(lo);
  };
  std::size_t y0, y1, x0, x1;
  double wy, wx;
  axis(i, y0, y1, wy);
  axis(j, x0, x1, wx);
  auto at = [&](std::size_t y, std::size_t x) { return grid[y * d + x]; };
  return (1 - wy) * ((1 - wx) * at(y0, x0) + wx * at(y0, x1)) +
         wy * ((1 - wx) * at(y1, x0) + wx * at(y1, x1));
}

TEST(BiasGeometry, FourthPowersOnly) {
  const BiasGeometry g16 = bias_geometry(16);
  EXPECT_EQ(g16.s, 4u);
  EXPECT_EQ(g16.d, 2u);
  EXPECT_EQ(g16.params_per_row(), 12u);
  EXPECT_EQ(bias_geometry(256).params_per_row(), 48u);
  EXPECT_EQ(bias_geometry(81).d, 3u);
  for (std::size_t c : {0, 1, 8, 64, 100, 255}) {
    EXPECT_EQ(code_of([c] { bias_geometry(c); }), ErrorCode::kInvalidConfig) << c;
  }
  for (std::size_t d = 2; d <= 6; ++d) {
    const std::size_t c = d * d * d * d;
    EXPECT_LT(bias_geometry(c).params_per_row(), c);
  }
}

TEST(ProxyBias, ZeroAndConstant) {
  auto p = zero_proxy_bias<double>(5, 16);
  EXPECT_EQ(proxy_bias(p), Matrix<double>(5, 16));
  for (double& v : p.bd.data()) v = 0.75;
  const Matrix<double> b = proxy_bias(p);
  for (double v : b.data()) EXPECT_DOUBLE_EQ(v, 0.75);
}

TEST(ProxyBias, CapacityFor691Rows) {
  const auto p = zero_proxy_bias<float>(691, 256);
  std::size_t count = 0;
  p.for_each([&](const Matrix<float>& m) { count += m.size(); });
  EXPECT_EQ(count, 33168u);
}

TEST(ProxyBias, MatchesBilinearPlusRowColumnOracle) {
  Rng rng(3);
  for (std::size_t c : {16, 81, 256}) {
    auto p = zero_proxy_bias<double>(3, c);
    for (auto* m : {&p.bd, &p.bc, &p.br}) *m = random_matrix<double>(rng, m->rows(), m->cols());
    const auto b = proxy_bias(p);
    const std::size_t s = p.geo.s, d = p.geo.d;
    for (std::size_t r = 0; r < 3; ++r) {
      for (std::size_t i = 0; i < s; ++i) {
        for (std::size_t j = 0; j < s; ++j) {
          const double expect = bilinear(p.bd.row(r), d, s, i, j) + p.bc(r, j) + p.br(r, i);
          EXPECT_NEAR(b(r, i * s + j), expect, 1e-12);
        }
      }
    }
  }
}

TEST(ProxyBias, InterpolationRowsSumToOne) {
  const auto a = bias_interpolation(16, 4);
  for (std::size_t i = 0; i < 16; ++i) {
    double sum = 0;
    for (double v : a.row(i)) sum += v;
    EXPECT_NEAR(sum, 1.0, 1e-15);
  }
}

TEST(ProxyAttention, SingletonReturnsValue) {
  Rng rng(4);
  const auto v = random_matrix<double>(rng, 1, 3);
  const auto out = proxy_attention(random_matrix<double>(rng, 1, 3), random_matrix<double>(rng, 1, 3),
                                   v, random_matrix<double>(rng, 1, 3));
  EXPECT_LE(max_abs_diff(out, v), 1e-15);
}

TEST(ProxyAttention, EqualsExplicitTwoSoftmaxProduct) {
  Rng rng(5);
  for (bool unscaled : {true, false}) {
    const auto q = random_matrix<double>(rng, 6, 4);
    const auto k = random_matrix<double>(rng, 6, 4);
    const auto v = random_matrix<double>(rng, 6, 4);
    const auto p = random_matrix<double>(rng, 2, 4);
    EXPECT_LE(max_abs_diff(proxy_attention(q, k, v, p, {unscaled}),
                           oracle::explicit_proxy_attention(q, k, v, p, unscaled)),
              1e-12);
  }
}

TEST(ProxyAttention, CompositeWeightsRowStochastic) {
  Rng rng(6);
  const auto q = random_matrix<double>(rng, 9, 4);
  const auto k = random_matrix<double>(rng, 9, 4);
  const auto p = random_matrix<double>(rng, 3, 4);
  const auto w = matmul(attention_weights(q, p), attention_weights(p, k));
  for (std::size_t r = 0; r < w.rows(); ++r) {
    double sum = 0;
    for (double x : w.row(r)) sum += x;
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(ProxyAttention, ProxyPermutationInvariantInFloat) {
  Rng rng(7);
  const auto q = random_matrix<float>(rng, 8, 4);
  const auto k = random_matrix<float>(rng, 8, 4);
  const auto v = random_matrix<float>(rng, 8, 4);
  const auto p = random_matrix<float>(rng, 4, 4);
  Matrix<float> rev(4, 4);
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 4; ++c) rev(r, c) = p(3 - r, c);
  }
  EXPECT_LE(max_abs_diff(proxy_attention(q, k, v, p), proxy_attention(q, k, v, rev)), 1e-6);
}

TEST(ProxyAttention, ShapeErrors) {
  EXPECT_THROW(proxy_attention(Matrix<double>(2, 3), Matrix<double>(2, 4), Matrix<double>(2, 4),
                               Matrix<double>(1, 4)),
               Error);
  EXPECT_THROW(proxy_attention(Matrix<double>(2, 4), Matrix<double>(2, 4), Matrix<double>(3, 4),
                               Matrix<double>(1, 4)),
               Error);
}

ProxyBlockParams<double> zero_block(std::size_t c, std::size_t rows) {
  BlockInit init;
  init.width = c;
  init.bias_rows = rows;
  auto b = proxy_block_init<double>(0, init);
  b.for_each([](Matrix<double>& m) { std::fill(m.data().begin(), m.data().end(), 0.0); });
  return b;
}

TEST(ProxyBlock, ZeroParamsAreIdentity) {
  Rng rng(8);
  const auto f0 = random_matrix<double>(rng, 5, 16);
  const auto p0 = random_matrix<double>(rng, 3, 16);
  EXPECT_EQ(proxy_block(zero_block(16, 8), f0, p0), f0);
}

TEST(ProxyBlock, MatchesStraightLineEvaluation) {
  Rng rng(9);
  BlockInit init;
  init.width = 16;
  init.bias_rows = 6;
  init.bias_std = 0.2;
  const auto b = proxy_block_init<double>(1, init);
  const auto f0 = random_matrix<double>(rng, 4, 16);
  const auto p0 = random_matrix<double>(rng, 2, 16);

  Matrix<double> f = f0;
  const auto bias = proxy_bias(b.bias);
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 16; ++c) f(r, c) += bias(r, c);
  }
  auto lin = [](const Matrix<double>& x, const LinearParams<double>& p) {
    auto y = oracle::naive_matmul(x, p.weight);
    if (p.has_bias()) {
      for (std::size_t r = 0; r < y.rows(); ++r) {
        for (std::size_t c = 0; c < y.cols(); ++c) y(r, c) += p.bias(0, c);
      }
    }
    return y;
  };
  const auto att = oracle::explicit_proxy_attention(lin(f, b.wq), lin(f, b.wk), lin(f, b.wv),
                                                    lin(p0, b.wp), false);
  Matrix<double> o = f;
  for (std::size_t i = 0; i < o.size(); ++i) o.data()[i] += att.data()[i];
  auto hidden = lin(o, b.ffn1);
  for (double& v : hidden.data()) v = std::max(v, 0.0);
  const auto ffn = lin(hidden, b.ffn2);
  for (std::size_t i = 0; i < o.size(); ++i) o.data()[i] += ffn.data()[i];
  EXPECT_LE(max_abs_diff(proxy_block(b, f0, p0), o), 1e-10);
}

TEST(ProxyBlock, ProxyRowPermutationInvariant) {
  Rng rng(10);
  BlockInit init;
  init.width = 16;
  init.bias_rows = 5;
  const auto b = proxy_block_init<double>(2, init);
  const auto f0 = random_matrix<double>(rng, 5, 16);
  const auto p0 = random_matrix<double>(rng, 3, 16);
  Matrix<double> perm(3, 16);
  const std::size_t order[] = {2, 0, 1};
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 16; ++c) perm(r, c) = p0(order[r], c);
  }
  EXPECT_LE(max_abs_diff(proxy_block(b, f0, p0), proxy_block(b, f0, perm)), 1e-12);
}

TEST(ProxyBlock, ShapeErrors) {
  const auto b = zero_block(16, 4);
  EXPECT_EQ(code_of([&] { proxy_block(b, Matrix<double>(5, 16), Matrix<double>(2, 16)); }),
            ErrorCode::kShape);
  EXPECT_EQ(code_of([&] { proxy_block(b, Matrix<double>(3, 8), Matrix<double>(2, 8)); }),
            ErrorCode::kShape);
  EXPECT_EQ(code_of([&] { proxy_block(b, Matrix<double>(3, 16), Matrix<double>(0, 16)); }),
            ErrorCode::kShape);
}

TEST(StackForward, EmptyStackAndComposition) {
  Rng rng(11);
  const auto f0 = random_matrix<double>(rng, 4, 16);
  const auto p = random_matrix<double>(rng, 2, 16);
  EXPECT_EQ(stack_forward<double>({}, f0, p), f0);
  BlockInit init;
  init.width = 16;
  init.bias_rows = 4;
  const std::vector<ProxyBlockParams<double>> blocks{proxy_block_init<double>(1, init),
                                                     proxy_block_init<double>(2, init)};
  EXPECT_EQ(stack_forward<double>(blocks, f0, p),
            proxy_block(blocks[1], proxy_block(blocks[0], f0, p), p));
}

TEST(Heads, ZeroHeadsGiveIdentityTransforms) {
  Rng rng(12);
  const auto f = random_matrix<double>(rng, 3, 16);
  const auto heads = zero_heads<double>(16);
  EXPECT_EQ(translation_head(f, heads), Matrix<double>(3, 3));
  for (const Matrix3& m : rows_to_matrices(transform_head(f, heads))) {
    EXPECT_EQ(m, Matrix3::identity());
  }
  EXPECT_EQ(transform_head(f, heads, true), Matrix<double>(3, 9));
}

TEST(Heads, ResidualAddsIdentityToLiteral) {
  Rng rng(13);
  const auto f = random_matrix<double>(rng, 2, 16);
  auto heads = zero_heads<double>(16);
  heads.u_image.weight = random_matrix<double>(rng, 16, 9);
  heads.u_text.weight = random_matrix<double>(rng, 16, 3);
  const auto lit = transform_head(f, heads, true);
  const auto res = transform_head(f, heads, false);
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t k = 0; k < 9; ++k) {
      EXPECT_DOUBLE_EQ(res(r, k), lit(r, k) + (k % 4 == 0 ? 1.0 : 0.0));
    }
  }
  EXPECT_LE(max_abs_diff(translation_head(f, heads), oracle::naive_matmul(f, heads.u_text.weight)),
            1e-12);
  const auto vecs = rows_to_vectors(translation_head(f, heads));
  EXPECT_EQ(vecs.size(), 2u);
}

TEST(PointNetLite, HandComputedTwoPointCluster) {
  const PointCloud cloud{{{1, 2, 3}, {-1, 0, 5}}};
  ClusterSet cs;
  cs.centers = {{0, 1, 4}};
  cs.members = {{0, 1}};
  cs.m = 2;
  cs.source_cloud_len = 2;
  LinearParams<double> p = zero_linear<double>(6, 6, true);
  p.weight = Matrix<double>::identity(6);
  // rows: [1 1 -1 1 2 3] and [-1 -1 1 -1 0 5]; relu then column max.
  const auto f = pointnet_lite(p, cs, cloud);
  EXPECT_EQ(f, (Matrix<double>(1, 6, {1, 1, 1, 1, 2, 5})));
}

TEST(PointNetLite, PermutationInvariantAndZeroWeights) {
  Rng rng(14);
  const PointCloud cloud = oracle::random_cloud(rng, 30);
  ClusterSet cs = build_clusters(std::vector<Vec3>{{0, 0, 0}, {0.5, 0.5, 0.5}}, cloud,
                                 {Gamma::kKnn, 6, std::nullopt});
  LinearParams<double> p = zero_linear<double>(6, 8, true);
  p.weight = random_matrix<double>(rng, 6, 8);
  p.bias = random_matrix<double>(rng, 1, 8);
  const auto before = pointnet_lite(p, cs, cloud);
  std::reverse(cs.members[0].begin(), cs.members[0].end());
  EXPECT_EQ(pointnet_lite(p, cs, cloud), before);
  EXPECT_EQ(pointnet_lite(zero_linear<double>(6, 8, true), cs, cloud), Matrix<double>(2, 8));
}

TEST(AttentionPool, ClosedForms) {
  LinearParams<double> score = zero_linear<double>(2, 1, false);
  score.weight = Matrix<double>(2, 1, {1.0, 0.0});
  const Matrix<double> one(1, 2, {0.3, -0.2});
  EXPECT_EQ(attention_pool(score, one), one);
  const Matrix<double> same(3, 2, {0.3, -0.2, 0.3, -0.2, 0.3, -0.2});
  EXPECT_LE(max_abs_diff(attention_pool(score, same), one), 1e-15);
  const Matrix<double> two(2, 2, {0.0, 5.0, std::log(3.0), 7.0});
  const auto pooled = attention_pool(score, two);
  EXPECT_NEAR(pooled(0, 0), 0.75 * std::log(3.0), 1e-15);
  EXPECT_NEAR(pooled(0, 1), 0.25 * 5.0 + 0.75 * 7.0, 1e-14);
  EXPECT_THROW(attention_pool(score, Matrix<double>(0, 2)), Error);
}

TEST(AttentionPool, PoolViewsOneRowPerView) {
  Rng rng(15);
  LinearParams<double> score = zero_linear<double>(4, 1, false);
  score.weight = random_matrix<double>(rng, 4, 1);
  std::vector<Matrix<double>> views;
  for (int v = 0; v < 3; ++v) views.push_back(random_matrix<double>(rng, 5, 4));
  const auto pooled = pool_views<double>(score, views);
  ASSERT_EQ(pooled.rows(), 3u);
  for (std::size_t v = 0; v < 3; ++v) {
    const auto row = attention_pool(score, views[v]);
    for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(pooled(v, c), row(0, c));
  }
  EXPECT_THROW(pool_views<double>(score, {}), Error);
}

TEST(GradCheckSuite, SmallRunPasses) {
  GradCheckSuiteOptions opts;
  opts.seed = 99;
  opts.instances = 2;
  const auto r = run_gradcheck_suite(opts);
  ASSERT_EQ(r.groups.size(), 5u);
  for (const auto& g : r.groups) {
    EXPECT_EQ(g.instances, 2u);
    EXPECT_GT(g.coordinates, 0u);
    EXPECT_LE(g.max_rel_error, 1e-5) << g.name;
  }
}

}  // namespace
}  // namespace proxyform
