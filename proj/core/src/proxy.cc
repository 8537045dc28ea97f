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

#include "proxyform/proxy.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "proxyform/error.h"
#include "proxyform/parallel.h"
#include "proxyform/random.h"

namespace proxyform {
namespace {

std::size_t integer_sqrt(std::size_t v) {
  auto r = static_cast<std::size_t>(std::sqrt(static_cast<double>(v)));
  while (r * r > v) --r;
  while ((r + 1) * (r + 1) <= v) ++r;
  return r;
}

template <typename T>
Matrix<T> uniform_matrix(Rng& rng, std::size_t rows, std::size_t cols,
                         double bound) {
  Matrix<T> m(rows, cols);
  for (T& v : m.data()) v = static_cast<T>(rng.uniform(-bound, bound));
  return m;
}

template <typename T>
Matrix<T> normal_matrix(Rng& rng, std::size_t rows, std::size_t cols,
                        double stddev) {
  Matrix<T> m(rows, cols);
  if (stddev == 0.0) return m;
  for (T& v : m.data()) v = static_cast<T>(rng.normal(0.0, stddev));
  return m;
}

template <typename T>
LinearParams<T> uniform_linear(Rng& rng, std::size_t in, std::size_t out,
                               double scale, bool with_bias, double bias_std) {
  LinearParams<T> p;
  p.weight = uniform_matrix<T>(rng, in, out,
                               scale / std::sqrt(static_cast<double>(in)));
  if (with_bias) p.bias = normal_matrix<T>(rng, 1, out, bias_std);
  return p;
}

template <typename T>
void check_block(const ProxyBlockParams<T>& params, const Matrix<T>& f0,
                 const Matrix<T>& p0) {
  const std::size_t c = params.width();
  if (f0.cols() != c || p0.cols() != c) {
    fail(ErrorCode::kShape, "proxy_block: feature width " +
                                std::to_string(f0.cols()) + "/" +
                                std::to_string(p0.cols()) + " != " +
                                std::to_string(c));
  }
  if (f0.rows() > params.bias.capacity()) {
    fail(ErrorCode::kShape, "proxy_block: " + std::to_string(f0.rows()) +
                                " rows exceed proxy-bias capacity " +
                                std::to_string(params.bias.capacity()));
  }
  if (params.bias.geo.c != c) {
    fail(ErrorCode::kShape, "proxy_block: bias width mismatch");
  }
  if (p0.rows() == 0) fail(ErrorCode::kShape, "proxy_block: no proxy tokens");
}

// Everything the backward pass needs from one forward evaluation.
template <typename T>
struct BlockTape {
  Matrix<T> f;
  Matrix<T> q, k, v, p;
  Matrix<T> o_prime;
  Matrix<T> h_pre;
  Matrix<T> h;
  Matrix<T> out;
};

template <typename T>
BlockTape<T> block_forward(const ProxyBlockParams<T>& params,
                           const Matrix<T>& f0, const Matrix<T>& p0,
                           const AttentionOptions& opts) {
  check_block(params, f0, p0);
  BlockTape<T> tape;
  const Matrix<T> bias = proxy_bias(params.bias);
  tape.f = add(f0, slice_rows(bias, 0, f0.rows()));
  tape.q = linear(tape.f, params.wq);
  tape.k = linear(tape.f, params.wk);
  tape.v = linear(tape.f, params.wv);
  tape.p = linear(p0, params.wp);
  tape.o_prime = add(tape.f, proxy_attention(tape.q, tape.k, tape.v, tape.p, opts));
  tape.h_pre = linear(tape.o_prime, params.ffn1);
  tape.h = relu(tape.h_pre);
  tape.out = add(tape.o_prime, linear(tape.h, params.ffn2));
  return tape;
}

}  // namespace

BiasGeometry bias_geometry(std::size_t c) {
  const std::size_t s = integer_sqrt(c);
  const std::size_t d = integer_sqrt(s);
  if (s * s != c || d * d != s || d < 2) {
    fail(ErrorCode::kInvalidConfig,
         "proxy bias needs a width C = D^4 with D >= 2, got " + std::to_string(c));
  }
  return {c, s, d};
}

template <typename T>
ProxyBiasParams<T> zero_proxy_bias(std::size_t rows, std::size_t c) {
  const BiasGeometry geo = bias_geometry(c);
  return {geo, Matrix<T>(rows, geo.d * geo.d), Matrix<T>(rows, geo.s),
          Matrix<T>(rows, geo.s)};
}

Matrix<double> bias_interpolation(std::size_t s, std::size_t d) {
  Matrix<double> a(s, d);
  const double ratio = static_cast<double>(d) / static_cast<double>(s);
  for (std::size_t i = 0; i < s; ++i) {
    double src = (static_cast<double>(i) + 0.5) * ratio - 0.5;
    src = std::max(src, 0.0);
    auto i0 = static_cast<std::size_t>(std::floor(src));
    i0 = std::min(i0, d - 1);
    const std::size_t i1 = std::min(i0 + 1, d - 1);
    const double lambda = src - static_cast<double>(i0);
    a(i, i0) += 1.0 - lambda;
    a(i, i1) += lambda;
  }
  return a;
}

template <typename T>
Matrix<T> proxy_bias(const ProxyBiasParams<T>& params) {
  const BiasGeometry& g = params.geo;
  if (params.bd.cols() != g.d * g.d || params.bc.cols() != g.s ||
      params.br.cols() != g.s || params.bc.rows() != params.bd.rows() ||
      params.br.rows() != params.bd.rows()) {
    fail(ErrorCode::kInvalidConfig, "proxy bias parameter shapes are inconsistent");
  }
  const Matrix<T> a = bias_interpolation(g.s, g.d).template cast<T>();
  Matrix<T> out(params.capacity(), g.c);
  for (std::size_t r = 0; r < params.capacity(); ++r) {
    const Matrix<T> grid(g.d, g.d, std::vector<T>(params.bd.row(r).begin(),
                                                  params.bd.row(r).end()));
    const Matrix<T> up = matmul_nt(matmul(a, grid), a);
    auto dst = out.row(r);
    for (std::size_t i = 0; i < g.s; ++i) {
      for (std::size_t j = 0; j < g.s; ++j) {
        dst[i * g.s + j] = up(i, j) + params.bc(r, j) + params.br(r, i);
      }
    }
  }
  return out;
}

template <typename T>
ProxyBiasParams<T> proxy_bias_backward(const ProxyBiasParams<T>& params,
                                       const Matrix<T>& d_bias) {
  const BiasGeometry& g = params.geo;
  if (d_bias.cols() != g.c || d_bias.rows() > params.capacity()) {
    fail(ErrorCode::kShape, "proxy_bias_backward: gradient shape mismatch");
  }
  ProxyBiasParams<T> grads = zero_proxy_bias<T>(params.capacity(), g.c);
  const Matrix<T> a = bias_interpolation(g.s, g.d).template cast<T>();
  for (std::size_t r = 0; r < d_bias.rows(); ++r) {
    const Matrix<T> d_up(g.s, g.s, std::vector<T>(d_bias.row(r).begin(),
                                                  d_bias.row(r).end()));
    const Matrix<T> d_grid = matmul(matmul_tn(a, d_up), a);
    std::copy(d_grid.data().begin(), d_grid.data().end(), grads.bd.row(r).begin());
    for (std::size_t i = 0; i < g.s; ++i) {
      for (std::size_t j = 0; j < g.s; ++j) {
        grads.bc(r, j) += d_up(i, j);
        grads.br(r, i) += d_up(i, j);
      }
    }
  }
  return grads;
}

template <typename T>
Matrix<T> proxy_attention(const Matrix<T>& q, const Matrix<T>& k,
                          const Matrix<T>& v, const Matrix<T>& p,
                          const AttentionOptions& opts) {
  if (q.cols() != k.cols() || p.cols() != q.cols() || k.rows() != v.rows()) {
    fail(ErrorCode::kShape, "proxy_attention: incompatible operands");
  }
  const Matrix<T> compressed = attention(p, k, v, opts);
  return attention(q, p, compressed, opts);
}

template <typename T>
ProxyAttentionGrads<T> proxy_attention_backward(
    const Matrix<T>& q, const Matrix<T>& k, const Matrix<T>& v,
    const Matrix<T>& p, const Matrix<T>& d_out, const AttentionOptions& opts) {
  if (q.cols() != k.cols() || p.cols() != q.cols() || k.rows() != v.rows()) {
    fail(ErrorCode::kShape, "proxy_attention_backward: incompatible operands");
  }
  const Matrix<T> compressed = attention(p, k, v, opts);
  auto broadcast = attention_backward(q, p, compressed, d_out, opts);
  auto compress = attention_backward(p, k, v, broadcast.dv, opts);
  ProxyAttentionGrads<T> g;
  g.dq = std::move(broadcast.dq);
  g.dp = std::move(broadcast.dk);
  accumulate(g.dp, compress.dq);
  g.dk = std::move(compress.dk);
  g.dv = std::move(compress.dv);
  return g;
}

template <typename T>
ProxyBlockParams<T> proxy_block_init(std::uint64_t seed, const BlockInit& init) {
  if (init.width == 0 || init.ffn_mult == 0) {
    fail(ErrorCode::kInvalidConfig, "proxy_block_init: width and ffn_mult must be > 0");
  }
  Rng rng(seed);
  const std::size_t c = init.width;
  const std::size_t hidden = init.ffn_mult * c;
  const double ws = init.weight_scale;
  ProxyBlockParams<T> p;
  p.wq = uniform_linear<T>(rng, c, c, ws, false, 0.0);
  p.wk = uniform_linear<T>(rng, c, c, ws, false, 0.0);
  p.wv = uniform_linear<T>(rng, c, c, ws, false, 0.0);
  p.wp = uniform_linear<T>(rng, c, c, ws, false, 0.0);
  p.ffn1 = uniform_linear<T>(rng, c, hidden, ws, true, init.bias_std);
  p.ffn2 = uniform_linear<T>(rng, hidden, c, ws, true, init.bias_std);
  p.bias = zero_proxy_bias<T>(init.bias_rows, c);
  p.bias.bd = normal_matrix<T>(rng, p.bias.bd.rows(), p.bias.bd.cols(), init.bias_std);
  p.bias.bc = normal_matrix<T>(rng, p.bias.bc.rows(), p.bias.bc.cols(), init.bias_std);
  p.bias.br = normal_matrix<T>(rng, p.bias.br.rows(), p.bias.br.cols(), init.bias_std);
  return p;
}

template <typename T>
Matrix<T> proxy_block(const ProxyBlockParams<T>& params, const Matrix<T>& f0,
                      const Matrix<T>& p0, const AttentionOptions& opts) {
  return block_forward(params, f0, p0, opts).out;
}

template <typename T>
ProxyBlockGrads<T> proxy_block_backward(const ProxyBlockParams<T>& params,
                                        const Matrix<T>& f0,
                                        const Matrix<T>& p0,
                                        const Matrix<T>& d_out,
                                        const AttentionOptions& opts) {
  const BlockTape<T> tape = block_forward(params, f0, p0, opts);
  if (d_out.rows() != tape.out.rows() || d_out.cols() != tape.out.cols()) {
    fail(ErrorCode::kShape, "proxy_block_backward: gradient shape mismatch");
  }
  ProxyBlockGrads<T> g;

  // FFN residual.
  auto ffn2 = linear_backward(tape.h, params.ffn2, d_out);
  auto ffn1 = linear_backward(tape.o_prime, params.ffn1,
                              relu_backward(tape.h_pre, ffn2.dx));
  Matrix<T> d_oprime = add(d_out, ffn1.dx);
  g.params.ffn1 = std::move(ffn1.dp);
  g.params.ffn2 = std::move(ffn2.dp);

  // Attention residual.
  Matrix<T> d_f = d_oprime;
  auto attn = proxy_attention_backward(tape.q, tape.k, tape.v, tape.p, d_oprime, opts);
  auto lq = linear_backward(tape.f, params.wq, attn.dq);
  auto lk = linear_backward(tape.f, params.wk, attn.dk);
  auto lv = linear_backward(tape.f, params.wv, attn.dv);
  auto lp = linear_backward(p0, params.wp, attn.dp);
  accumulate(d_f, lq.dx);
  accumulate(d_f, lk.dx);
  accumulate(d_f, lv.dx);
  g.params.wq = std::move(lq.dp);
  g.params.wk = std::move(lk.dp);
  g.params.wv = std::move(lv.dp);
  g.params.wp = std::move(lp.dp);
  g.dp0 = std::move(lp.dx);

  g.params.bias = proxy_bias_backward(params.bias, d_f);
  g.df0 = std::move(d_f);
  return g;
}

template <typename T>
Matrix<T> stack_forward(std::span<const ProxyBlockParams<T>> blocks,
                        const Matrix<T>& f0, const Matrix<T>& p,
                        const AttentionOptions& opts) {
  Matrix<T> f = f0;
  for (const auto& block : blocks) f = proxy_block(block, f, p, opts);
  return f;
}

template <typename T>
HeadParams<T> zero_heads(std::size_t width) {
  return {zero_linear<T>(width, 3, true), zero_linear<T>(width, 9, true)};
}

template <typename T>
Matrix<T> translation_head(const Matrix<T>& features, const HeadParams<T>& heads) {
  if (heads.u_text.out() != 3) fail(ErrorCode::kShape, "translation head must emit 3 values");
  return linear(features, heads.u_text);
}

template <typename T>
Matrix<T> transform_head(const Matrix<T>& features, const HeadParams<T>& heads,
                         bool literal) {
  if (heads.u_image.out() != 9) fail(ErrorCode::kShape, "transform head must emit 9 values");
  Matrix<T> m = linear(features, heads.u_image);
  if (!literal) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
      m(r, 0) += T{1};
      m(r, 4) += T{1};
      m(r, 8) += T{1};
    }
  }
  return m;
}

std::vector<Vec3> rows_to_vectors(const Matrix<double>& m) {
  if (m.cols() != 3) fail(ErrorCode::kShape, "rows_to_vectors: expected n x 3");
  std::vector<Vec3> out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) out[r] = {m(r, 0), m(r, 1), m(r, 2)};
  return out;
}

std::vector<Matrix3> rows_to_matrices(const Matrix<double>& m) {
  if (m.cols() != 9) fail(ErrorCode::kShape, "rows_to_matrices: expected n x 9");
  std::vector<Matrix3> out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    std::array<double, 9> e{};
    std::copy(m.row(r).begin(), m.row(r).end(), e.begin());
    out[r] = Matrix3(e);
  }
  return out;
}

template <typename T>
Matrix<T> pointnet_lite(const LinearParams<T>& params, const ClusterSet& cs,
                        const PointCloud& cloud, int threads) {
  if (params.in() != 6) fail(ErrorCode::kShape, "pointnet_lite: weights must map 6 -> C");
  cs.validate(cloud);
  Matrix<T> out(cs.size(), params.out());
  parallel_for(cs.size(), threads, [&](std::size_t t) {
    const Vec3& q = cs.centers[t];
    Matrix<T> x(cs.m, 6);
    for (std::size_t r = 0; r < cs.m; ++r) {
      const Vec3& p = cloud[cs.members[t][r]];
      auto row = x.row(r);
      row[0] = static_cast<T>(p.x - q.x);
      row[1] = static_cast<T>(p.y - q.y);
      row[2] = static_cast<T>(p.z - q.z);
      row[3] = static_cast<T>(p.x);
      row[4] = static_cast<T>(p.y);
      row[5] = static_cast<T>(p.z);
    }
    const Matrix<T> pooled = max_pool_rows(relu(linear(x, params)));
    std::copy(pooled.data().begin(), pooled.data().end(), out.row(t).begin());
  });
  return out;
}

template <typename T>
Matrix<T> attention_pool(const LinearParams<T>& score, const Matrix<T>& tokens) {
  if (tokens.rows() == 0) fail(ErrorCode::kShape, "attention_pool: empty token group");
  if (score.out() != 1) fail(ErrorCode::kShape, "attention_pool: score must map C -> 1");
  const Matrix<T> weights = softmax_rows(transpose(linear(tokens, score)));
  return matmul(weights, tokens);
}

template <typename T>
AttentionPoolGrads<T> attention_pool_backward(const LinearParams<T>& score,
                                              const Matrix<T>& tokens,
                                              const Matrix<T>& d_out) {
  if (tokens.rows() == 0) fail(ErrorCode::kShape, "attention_pool: empty token group");
  const Matrix<T> scores = linear(tokens, score);  // V x 1
  const Matrix<T> weights = softmax_rows(transpose(scores));
  auto mm = matmul_backward(weights, tokens, d_out);
  const Matrix<T> d_scores = transpose(softmax_rows_backward(weights, mm.da));
  auto lin = linear_backward(tokens, score, d_scores);
  AttentionPoolGrads<T> g;
  g.dscore = std::move(lin.dp);
  g.dtokens = std::move(mm.db);
  accumulate(g.dtokens, lin.dx);
  return g;
}

template <typename T>
Matrix<T> pool_views(const LinearParams<T>& score,
                     std::span<const Matrix<T>> views) {
  if (views.empty()) fail(ErrorCode::kShape, "pool_views: no views");
  Matrix<T> out(views.size(), score.in());
  for (std::size_t v = 0; v < views.size(); ++v) {
    const Matrix<T> pooled = attention_pool(score, views[v]);
    std::copy(pooled.data().begin(), pooled.data().end(), out.row(v).begin());
  }
  return out;
}

#define PROXYFORM_INSTANTIATE(T)                                                 \
  template ProxyBiasParams<T> zero_proxy_bias(std::size_t, std::size_t);         \
  template Matrix<T> proxy_bias(const ProxyBiasParams<T>&);                      \
  template ProxyBiasParams<T> proxy_bias_backward(const ProxyBiasParams<T>&,     \
                                                  const Matrix<T>&);             \
  template Matrix<T> proxy_attention(const Matrix<T>&, const Matrix<T>&,         \
                                     const Matrix<T>&, const Matrix<T>&,         \
                                     const AttentionOptions&);                   \
  template ProxyAttentionGrads<T> proxy_attention_backward(                      \
      const Matrix<T>&, const Matrix<T>&, const Matrix<T>&, const Matrix<T>&,    \
      const Matrix<T>&, const AttentionOptions&);                                \
  template ProxyBlockParams<T> proxy_block_init(std::uint64_t, const BlockInit&); \
  template Matrix<T> proxy_block(const ProxyBlockParams<T>&, const Matrix<T>&,   \
                                 const Matrix<T>&, const AttentionOptions&);     \
  template ProxyBlockGrads<T> proxy_block_backward(                              \
      const ProxyBlockParams<T>&, const Matrix<T>&, const Matrix<T>&,            \
      const Matrix<T>&, const AttentionOptions&);                                \
  template Matrix<T> stack_forward(std::span<const ProxyBlockParams<T>>,         \
                                   const Matrix<T>&, const Matrix<T>&,           \
                                   const AttentionOptions&);                     \
  template HeadParams<T> zero_heads(std::size_t);                                \
  template Matrix<T> translation_head(const Matrix<T>&, const HeadParams<T>&);   \
  template Matrix<T> transform_head(const Matrix<T>&, const HeadParams<T>&,      \
                                    bool);                                       \
  template Matrix<T> pointnet_lite(const LinearParams<T>&, const ClusterSet&,    \
                                   const PointCloud&, int);                      \
  template Matrix<T> attention_pool(const LinearParams<T>&, const Matrix<T>&);   \
  template AttentionPoolGrads<T> attention_pool_backward(                        \
      const LinearParams<T>&, const Matrix<T>&, const Matrix<T>&);               \
  template Matrix<T> pool_views(const LinearParams<T>&,                          \
                                std::span<const Matrix<T>>);

PROXYFORM_INSTANTIATE(float)
PROXYFORM_INSTANTIATE(double)
PROXYFORM_INSTANTIATE(long double)

#undef PROXYFORM_INSTANTIATE

}  // namespace proxyform
