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

#include <cmath>

#include "oracles.h"
#include "proxyform/error.h"
#include "proxyform/numerics.h"

namespace proxyform {
namespace {

using oracle::max_abs_diff;
using oracle::random_matrix;

TEST(Matrix, ConstructionAndShapeErrors) {
  const Matrix<double> m(2, 3, 1.5);
  EXPECT_EQ(m.size(), 6u);
  EXPECT_EQ(m(1, 2), 1.5);
  EXPECT_THROW(Matrix<double>(2, 2, std::vector<double>(3)), Error);
  EXPECT_THROW(matmul(Matrix<double>(2, 3), Matrix<double>(2, 3)), Error);
  EXPECT_THROW(add(Matrix<double>(2, 3), Matrix<double>(3, 2)), Error);
}

TEST(Matmul, IdentityAndScalar) {
  Rng rng(1);
  const auto m = random_matrix<double>(rng, 3, 3);
  EXPECT_EQ(matmul(Matrix<double>::identity(3), m), m);
  EXPECT_EQ(matmul(Matrix<double>(1, 1, 2.0), Matrix<double>(1, 1, 3.0))(0, 0), 6.0);
}

TEST(Matmul, MatchesNaiveOracle) {
  Rng rng(2);
  for (int i = 0; i < 20; ++i) {
    const auto a = random_matrix<double>(rng, 1 + rng.index(6), 4);
    const auto b = random_matrix<double>(rng, 4, 1 + rng.index(6));
    EXPECT_LE(max_abs_diff(matmul(a, b), oracle::naive_matmul(a, b)), 1e-12);
    EXPECT_LE(max_abs_diff(matmul_nt(a, transpose(b)), oracle::naive_matmul(a, b)), 1e-12);
    EXPECT_LE(max_abs_diff(matmul_tn(transpose(a), b), oracle::naive_matmul(a, b)), 1e-12);
  }
}

TEST(Softmax, ClosedForms) {
  const auto z = softmax_rows(Matrix<double>(1, 3, 0.0));
  for (double v : z.data()) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
  const auto s = softmax_rows(Matrix<double>(1, 2, {0.0, std::log(3.0)}));
  EXPECT_NEAR(s(0, 0), 0.25, 1e-15);
  EXPECT_NEAR(s(0, 1), 0.75, 1e-15);
}

TEST(Softmax, ShiftInvariantAndStable) {
  Rng rng(3);
  auto m = random_matrix<double>(rng, 4, 5);
  auto shifted = m;
  for (std::size_t j = 0; j < 5; ++j) shifted(2, j) += 123.0;
  const auto a = softmax_rows(m);
  const auto b = softmax_rows(shifted);
  for (std::size_t j = 0; j < 5; ++j) EXPECT_NEAR(a(2, j), b(2, j), 1e-12);

  Matrix<float> big(3, 4);
  for (std::size_t i = 0; i < big.size(); ++i) big.data()[i] = (i % 2 ? 1e4f : -1e4f) + i;
  const auto f = softmax_rows(big);
  ASSERT_TRUE(f.all_finite());
  for (std::size_t r = 0; r < 3; ++r) {
    float sum = 0;
    for (float v : f.row(r)) sum += v;
    EXPECT_NEAR(sum, 1.0f, 1e-6f);
  }
}

TEST(Relu, ForwardAndMask) {
  const Matrix<double> x(1, 3, {-1.0, 0.0, 2.0});
  EXPECT_EQ(relu(x), (Matrix<double>(1, 3, {0.0, 0.0, 2.0})));
  EXPECT_EQ(relu_backward(x, Matrix<double>(1, 3, 5.0)), (Matrix<double>(1, 3, {0.0, 0.0, 5.0})));
}

TEST(Pooling, AverageAndMaxWithTieRouting) {
  const Matrix<double> x(3, 2, {1.0, 4.0, 3.0, 4.0, 2.0, -1.0});
  const Matrix<double> avg = avg_pool_rows(x);
  ASSERT_EQ(avg.rows(), 1u);
  EXPECT_DOUBLE_EQ(avg(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(avg(0, 1), 7.0 / 3.0);
  EXPECT_EQ(max_pool_rows(x), (Matrix<double>(1, 2, {3.0, 4.0})));
  const auto g = max_pool_rows_backward(x, Matrix<double>(1, 2, {1.0, 1.0}));
  EXPECT_EQ(g, (Matrix<double>(3, 2, {0.0, 1.0, 1.0, 0.0, 0.0, 0.0})));
  EXPECT_THROW(avg_pool_rows(Matrix<double>(0, 2)), Error);
  EXPECT_THROW(max_pool_rows(Matrix<double>(0, 2)), Error);
}

TEST(Linear, BiasBroadcast) {
  LinearParams<double> p = zero_linear<double>(2, 2, true);
  p.weight = Matrix<double>(2, 2, {1.0, 2.0, 3.0, 4.0});
  p.bias = Matrix<double>(1, 2, {0.5, -0.5});
  const auto y = linear(Matrix<double>(2, 2, {1.0, 0.0, 0.0, 1.0}), p);
  EXPECT_EQ(y, (Matrix<double>(2, 2, {1.5, 1.5, 3.5, 3.5})));
  EXPECT_THROW(linear(Matrix<double>(1, 3), p), Error);
}

TEST(Attention, SingleKeyAndIdenticalKeys) {
  Rng rng(4);
  const auto q = random_matrix<double>(rng, 5, 3);
  const auto k1 = random_matrix<double>(rng, 1, 3);
  const auto v1 = random_matrix<double>(rng, 1, 4);
  const auto out = attention(q, k1, v1);
  for (std::size_t r = 0; r < 5; ++r) {
    for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(out(r, c), v1(0, c), 1e-15);
  }
  Matrix<double> same(3, 3);
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 3; ++c) same(r, c) = k1(0, c);
  }
  const auto v = random_matrix<double>(rng, 3, 2);
  const auto avg = avg_pool_rows(v);
  const auto o = attention(q, same, v);
  for (std::size_t r = 0; r < 5; ++r) {
    EXPECT_NEAR(o(r, 0), avg(0, 0), 1e-12);
    EXPECT_NEAR(o(r, 1), avg(0, 1), 1e-12);
  }
}

TEST(Attention, MatchesNaiveOracleInFloat) {
  Rng rng(5);
  const auto q = random_matrix<float>(rng, 4, 8);
  const auto k = random_matrix<float>(rng, 6, 8);
  const auto v = random_matrix<float>(rng, 6, 8);
  for (bool unscaled : {false, true}) {
    const auto expect = oracle::naive_matmul(oracle::naive_weights(q, k, unscaled), v);
    EXPECT_LE(max_abs_diff(attention(q, k, v, {unscaled}), expect), 1e-6);
  }
}

TEST(Attention, RowsAreConvexCombinations) {
  Rng rng(6);
  const auto w = attention_weights(random_matrix<double>(rng, 7, 4), random_matrix<double>(rng, 9, 4));
  for (std::size_t r = 0; r < w.rows(); ++r) {
    double sum = 0;
    for (double x : w.row(r)) {
      EXPECT_GE(x, 0.0);
      sum += x;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(Attention, FloatAgreesWithDouble) {
  Rng rng(7);
  const auto q = random_matrix<double>(rng, 6, 8, 0.5);
  const auto k = random_matrix<double>(rng, 6, 8, 0.5);
  const auto v = random_matrix<double>(rng, 6, 8, 0.5);
  const auto d = attention(q, k, v);
  const auto f = attention(q.cast<float>(), k.cast<float>(), v.cast<float>());
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_NEAR(f.data()[i], d.data()[i], 1e-3 * (1.0 + std::abs(d.data()[i])));
  }
}

TEST(GradCheck, SquaredNormIsExact) {
  Rng rng(8);
  std::vector<double> x(10);
  for (double& v : x) v = rng.normal();
  auto f = [](std::span<const double> p) {
    long double s = 0;
    for (double v : p) s += static_cast<long double>(v) * v;
    return s;
  };
  auto g = [](std::span<const double> p) {
    std::vector<double> out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = 2 * p[i];
    return out;
  };
  const auto r = grad_check(f, g, x);
  EXPECT_EQ(r.coordinates, 10u);
  EXPECT_LE(r.max_rel_error, 1e-8);
}

TEST(GradCheck, DetectsWrongGradient) {
  auto f = [](std::span<const double> p) { return static_cast<long double>(p[0]) * p[0]; };
  auto g = [](std::span<const double> p) { return std::vector<double>{3 * p[0]}; };
  const double x[] = {1.0};
  EXPECT_GT(grad_check(f, g, x).max_rel_error, 0.1);
}

TEST(GradCheck, NonFiniteIsEvaluationError) {
  auto f = [](std::span<const double> p) { return p[0] > 0 ? 1.0L / 0.0L : 0.0L; };
  auto g = [](std::span<const double>) { return std::vector<double>{0.0}; };
  const double x[] = {1.0};
  try {
    grad_check(f, g, x);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEvaluation);
  }
}

// softmax(relu(x W + b)) . G, differentiated through every pullback.
TEST(GradCheck, ComposedLinearReluSoftmax) {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = random_matrix<double>(rng, 3, 4);
    auto p = zero_linear<double>(4, 5, true);
    p.weight = random_matrix<double>(rng, 4, 5);
    p.bias = random_matrix<double>(rng, 1, 5);
    const auto g = random_matrix<double>(rng, 3, 5);

    auto loss = [&](std::span<const double> flat) {
      auto q = p.cast<long double>();
      unflatten(flat, q);
      const auto y = softmax_rows(relu(linear(x.cast<long double>(), q)));
      long double s = 0;
      for (std::size_t i = 0; i < y.size(); ++i) s += y.data()[i] * g.data()[i];
      return s;
    };
    auto grad = [&](std::span<const double> flat) {
      auto q = p;
      unflatten(flat, q);
      const auto pre = linear(x, q);
      const auto act = relu(pre);
      const auto y = softmax_rows(act);
      const auto d_act = softmax_rows_backward(y, g);
      const auto lin = linear_backward(x, q, relu_backward(pre, d_act));
      return flatten(lin.dp);
    };
    EXPECT_LE(grad_check(loss, grad, flatten(p)).max_rel_error, 1e-5);
  }
}

TEST(GradCheck, AttentionPullback) {
  Rng rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    const bool unscaled = trial % 2;
    const auto q = random_matrix<double>(rng, 3, 4);
    const auto k = random_matrix<double>(rng, 5, 4);
    const auto v = random_matrix<double>(rng, 5, 2);
    const auto g = random_matrix<double>(rng, 3, 2);
    std::vector<double> x0;
    for (const auto* m : {&q, &k, &v}) x0.insert(x0.end(), m->data().begin(), m->data().end());
    auto split = [&](std::span<const double> x, auto tag) {
      using T = decltype(tag);
      Matrix<T> a(3, 4), b(5, 4), c(5, 2);
      std::size_t pos = 0;
      for (auto* m : {&a, &b, &c}) {
        for (T& e : m->data()) e = static_cast<T>(x[pos++]);
      }
      return std::array<Matrix<T>, 3>{a, b, c};
    };
    auto loss = [&](std::span<const double> x) {
      const auto [a, b, c] = split(x, 0.0L);
      const auto y = attention(a, b, c, {unscaled});
      long double s = 0;
      for (std::size_t i = 0; i < y.size(); ++i) s += y.data()[i] * g.data()[i];
      return s;
    };
    auto grad = [&](std::span<const double> x) {
      const auto [a, b, c] = split(x, 0.0);
      const auto d = attention_backward(a, b, c, g, {unscaled});
      std::vector<double> out;
      for (const auto* m : {&d.dq, &d.dk, &d.dv}) out.insert(out.end(), m->data().begin(), m->data().end());
      return out;
    };
    EXPECT_LE(grad_check(loss, grad, x0).max_rel_error, 1e-5);
  }
}

TEST(GradCheck, PoolingPullbacks) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x0m = random_matrix<double>(rng, 4, 3);
    const auto g = random_matrix<double>(rng, 1, 3);
    const std::vector<double> x0(x0m.data().begin(), x0m.data().end());
    for (bool use_max : {false, true}) {
      auto loss = [&](std::span<const double> x) {
        Matrix<long double> m(4, 3);
        for (std::size_t i = 0; i < 12; ++i) m.data()[i] = x[i];
        const auto y = use_max ? max_pool_rows(m) : avg_pool_rows(m);
        long double s = 0;
        for (std::size_t i = 0; i < 3; ++i) s += y.data()[i] * g.data()[i];
        return s;
      };
      auto grad = [&](std::span<const double> x) {
        const Matrix<double> m(4, 3, std::vector<double>(x.begin(), x.end()));
        const auto d = use_max ? max_pool_rows_backward(m, g) : avg_pool_rows_backward<double>(4, g);
        return std::vector<double>(d.data().begin(), d.data().end());
      };
      EXPECT_LE(grad_check(loss, grad, x0).max_rel_error, 1e-5);
    }
  }
}

}  // namespace
}  // namespace proxyform
