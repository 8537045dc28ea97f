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

#ifndef PROXYFORM_PROXY_H_
#define PROXYFORM_PROXY_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "proxyform/cluster.h"
#include "proxyform/geom.h"
#include "proxyform/numerics.h"

namespace proxyform {

// Side lengths of the low-rank bias grids for feature width C = S^2 = D^4.
struct BiasGeometry {
  std::size_t c = 0;
  std::size_t s = 0;
  std::size_t d = 0;

  std::size_t params_per_row() const { return d * d + 2 * s; }

  friend bool operator==(const BiasGeometry&, const BiasGeometry&) = default;
};

// Throws kInvalidConfig unless c is a fourth power with D >= 2.
BiasGeometry bias_geometry(std::size_t c);

// Learnable additive bias, stored per row as a D x D grid (bd), a 1 x S row
// (bc) and an S x 1 column (br). bd rows hold D*D values row-major.
template <typename T>
struct ProxyBiasParams {
  BiasGeometry geo;
  Matrix<T> bd;  // N x D^2
  Matrix<T> bc;  // N x S
  Matrix<T> br;  // N x S

  std::size_t capacity() const { return bd.rows(); }

  template <typename F>
  void for_each(F&& f) {
    f(bd);
    f(bc);
    f(br);
  }
  template <typename F>
  void for_each(F&& f) const {
    f(bd);
    f(bc);
    f(br);
  }

  template <typename U>
  ProxyBiasParams<U> cast() const {
    return {geo, bd.template cast<U>(), bc.template cast<U>(),
            br.template cast<U>()};
  }

  friend bool operator==(const ProxyBiasParams&, const ProxyBiasParams&) = default;
};

template <typename T>
ProxyBiasParams<T> zero_proxy_bias(std::size_t rows, std::size_t c);

// S x D bilinear resampling weights (half-pixel centers, edge clamped).
Matrix<double> bias_interpolation(std::size_t s, std::size_t d);

// (interp(bd) + bc + br) flattened row-major to N x C.
template <typename T>
Matrix<T> proxy_bias(const ProxyBiasParams<T>& params);

// Pullback for the first d_bias.rows() rows; remaining rows get zero.
template <typename T>
ProxyBiasParams<T> proxy_bias_backward(const ProxyBiasParams<T>& params,
                                       const Matrix<T>& d_bias);

// Proxy compression attention(p, k, v) followed by proxy broadcast
// attention(q, p, compressed). Never forms an N x N matrix.
template <typename T>
Matrix<T> proxy_attention(const Matrix<T>& q, const Matrix<T>& k,
                          const Matrix<T>& v, const Matrix<T>& p,
                          const AttentionOptions& opts = {});

template <typename T>
struct ProxyAttentionGrads {
  Matrix<T> dq;
  Matrix<T> dk;
  Matrix<T> dv;
  Matrix<T> dp;
};

template <typename T>
ProxyAttentionGrads<T> proxy_attention_backward(
    const Matrix<T>& q, const Matrix<T>& k, const Matrix<T>& v,
    const Matrix<T>& p, const Matrix<T>& d_out,
    const AttentionOptions& opts = {});

template <typename T>
struct ProxyBlockParams {
  LinearParams<T> wq;
  LinearParams<T> wk;
  LinearParams<T> wv;
  LinearParams<T> wp;
  LinearParams<T> ffn1;  // C -> ffn_mult * C, with bias
  LinearParams<T> ffn2;  // ffn_mult * C -> C, with bias
  ProxyBiasParams<T> bias;

  std::size_t width() const { return wq.in(); }

  template <typename F>
  void for_each(F&& f) {
    wq.for_each(f);
    wk.for_each(f);
    wv.for_each(f);
    wp.for_each(f);
    ffn1.for_each(f);
    ffn2.for_each(f);
    bias.for_each(f);
  }
  template <typename F>
  void for_each(F&& f) const {
    wq.for_each(f);
    wk.for_each(f);
    wv.for_each(f);
    wp.for_each(f);
    ffn1.for_each(f);
    ffn2.for_each(f);
    bias.for_each(f);
  }

  template <typename U>
  ProxyBlockParams<U> cast() const {
    return {wq.template cast<U>(),   wk.template cast<U>(),
            wv.template cast<U>(),   wp.template cast<U>(),
            ffn1.template cast<U>(), ffn2.template cast<U>(),
            bias.template cast<U>()};
  }

  friend bool operator==(const ProxyBlockParams&, const ProxyBlockParams&) = default;
};

struct BlockInit {
  std::size_t width = 256;
  std::size_t ffn_mult = 4;
  std::size_t bias_rows = 0;
  // Projection weights are uniform in +-scale/sqrt(fan_in).
  double weight_scale = 1.0;
  // Standard deviation of the proxy-bias parameters and FFN biases.
  double bias_std = 0.0;
};

template <typename T>
ProxyBlockParams<T> proxy_block_init(std::uint64_t seed, const BlockInit& init);

// F = F0 + B; Q,K,V = F W_{q,k,v}; P = P0 W_p; O' = F + ProxyAttn(Q,K,V,P);
// O = O' + FFN(O').
template <typename T>
Matrix<T> proxy_block(const ProxyBlockParams<T>& params, const Matrix<T>& f0,
                      const Matrix<T>& p0, const AttentionOptions& opts = {});

template <typename T>
struct ProxyBlockGrads {
  ProxyBlockParams<T> params;
  Matrix<T> df0;
  Matrix<T> dp0;
};

template <typename T>
ProxyBlockGrads<T> proxy_block_backward(const ProxyBlockParams<T>& params,
                                        const Matrix<T>& f0,
                                        const Matrix<T>& p0,
                                        const Matrix<T>& d_out,
                                        const AttentionOptions& opts = {});

// F^{l+1} = ProxyBlock(F^l, P) for every block in order.
template <typename T>
Matrix<T> stack_forward(std::span<const ProxyBlockParams<T>> blocks,
                        const Matrix<T>& f0, const Matrix<T>& p,
                        const AttentionOptions& opts = {});

template <typename T>
struct HeadParams {
  LinearParams<T> u_text;   // C -> 3
  LinearParams<T> u_image;  // C -> 9

  template <typename F>
  void for_each(F&& f) {
    u_text.for_each(f);
    u_image.for_each(f);
  }
  template <typename F>
  void for_each(F&& f) const {
    u_text.for_each(f);
    u_image.for_each(f);
  }

  template <typename U>
  HeadParams<U> cast() const {
    return {u_text.template cast<U>(), u_image.template cast<U>()};
  }

  friend bool operator==(const HeadParams&, const HeadParams&) = default;
};

template <typename T>
HeadParams<T> zero_heads(std::size_t width);

// n x 3 translations.
template <typename T>
Matrix<T> translation_head(const Matrix<T>& features, const HeadParams<T>& heads);

// n x 9 matrices, row-major per cluster. Emits I + F U_image unless
// `literal` is set, in which case F U_image is returned as is.
template <typename T>
Matrix<T> transform_head(const Matrix<T>& features, const HeadParams<T>& heads,
                         bool literal = false);

// Converts rows of an n x 3 / n x 9 head output to geometry types.
std::vector<Vec3> rows_to_vectors(const Matrix<double>& m);
std::vector<Matrix3> rows_to_matrices(const Matrix<double>& m);

// Simplified PointNet: per point [p - q, p] -> linear(6 -> C) -> ReLU, then
// max pool over the cluster. One row per cluster.
template <typename T>
Matrix<T> pointnet_lite(const LinearParams<T>& params, const ClusterSet& cs,
                        const PointCloud& cloud, int threads = 1);

// Softmax-weighted sum of token rows with weights softmax(tokens * score).
// score is C -> 1 without bias.
template <typename T>
Matrix<T> attention_pool(const LinearParams<T>& score, const Matrix<T>& tokens);

template <typename T>
struct AttentionPoolGrads {
  LinearParams<T> dscore;
  Matrix<T> dtokens;
};

template <typename T>
AttentionPoolGrads<T> attention_pool_backward(const LinearParams<T>& score,
                                              const Matrix<T>& tokens,
                                              const Matrix<T>& d_out);

// One pooled row per view group, V x C.
template <typename T>
Matrix<T> pool_views(const LinearParams<T>& score,
                     std::span<const Matrix<T>> views);

}  // namespace proxyform

#endif  // PROXYFORM_PROXY_H_
