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

#include "proxyform/offsetnet.h"

#include <cmath>

#include "proxyform/error.h"
#include "proxyform/parallel.h"
#include "proxyform/random.h"

namespace proxyform {
namespace {

constexpr std::size_t kFeatureWidth = 6;

template <typename T>
Matrix<T> cluster_features(const ClusterSet& cs, const PointCloud& cloud,
                           std::size_t t) {
  const Vec3& q = cs.centers[t];
  const auto& list = cs.members[t];
  Matrix<T> x(list.size(), kFeatureWidth);
  for (std::size_t r = 0; r < list.size(); ++r) {
    const Vec3& p = cloud[list[r]];
    const Vec3 rel = p - q;
    auto row = x.row(r);
    row[0] = static_cast<T>(rel.x);
    row[1] = static_cast<T>(rel.y);
    row[2] = static_cast<T>(rel.z);
    row[3] = static_cast<T>(p.x);
    row[4] = static_cast<T>(p.y);
    row[5] = static_cast<T>(p.z);
  }
  return x;
}

template <typename T>
void check_params(const OffsetNetParams<T>& params) {
  if (params.w1.in() != kFeatureWidth || params.w2.rows() != params.c_off() ||
      params.w2.cols() != 3) {
    fail(ErrorCode::kShape, "offsetnet: parameter shapes are inconsistent");
  }
}

Vec3 row_vec(const Matrix<double>& m, std::size_t r) {
  return {m(r, 0), m(r, 1), m(r, 2)};
}

}  // namespace

template <typename T>
OffsetNetParams<T> offsetnet_init(std::uint64_t seed, std::size_t c_off) {
  if (c_off == 0) fail(ErrorCode::kInvalidArgument, "offsetnet_init: c_off must be > 0");
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(kFeatureWidth));
  OffsetNetParams<T> p;
  p.w1 = zero_linear<T>(kFeatureWidth, c_off, true);
  for (T& v : p.w1.weight.data()) v = static_cast<T>(rng.uniform(-bound, bound));
  p.w2 = Matrix<T>(c_off, 3);
  return p;
}

template <typename T>
std::vector<Matrix<T>> offset_features(const ClusterSet& cs,
                                        const PointCloud& cloud) {
  cs.validate(cloud);
  std::vector<Matrix<T>> out;
  out.reserve(cs.size());
  for (std::size_t t = 0; t < cs.size(); ++t) {
    out.push_back(cluster_features<T>(cs, cloud, t));
  }
  return out;
}

template <typename T>
Matrix<T> offsetnet_raw(const OffsetNetParams<T>& params, const ClusterSet& cs,
                        const PointCloud& cloud, int threads) {
  check_params(params);
  cs.validate(cloud);
  Matrix<T> raw(cs.size(), 3);
  parallel_for(cs.size(), threads, [&](std::size_t t) {
    const Matrix<T> x = cluster_features<T>(cs, cloud, t);
    const Matrix<T> pooled = avg_pool_rows(relu(linear(x, params.w1)));
    const Matrix<T> out = matmul(pooled, params.w2);
    for (std::size_t c = 0; c < 3; ++c) raw(t, c) = out(0, c);
  });
  return raw;
}

OffsetField clamp_offsets(std::span<const Vec3> raw, double s) {
  if (!(s >= 0.0)) fail(ErrorCode::kInvalidArgument, "clamp_offsets: s must be >= 0");
  OffsetField field;
  field.offsets.reserve(raw.size());
  for (const Vec3& r : raw) {
    const double len = norm(r);
    field.offsets.push_back(len > s ? (s / len) * r : r);
  }
  return field;
}

template <typename T>
Matrix<T> clamp_rows(const Matrix<T>& raw, double s) {
  if (!(s >= 0.0)) fail(ErrorCode::kInvalidArgument, "clamp_rows: s must be >= 0");
  if (raw.cols() != 3) fail(ErrorCode::kShape, "clamp_rows: expected n x 3");
  Matrix<T> out = raw;
  const T bound = static_cast<T>(s);
  for (std::size_t t = 0; t < raw.rows(); ++t) {
    auto row = out.row(t);
    const T len = std::sqrt(row[0] * row[0] + row[1] * row[1] + row[2] * row[2]);
    if (len > bound) {
      for (T& v : row) v = bound / len * v;
    }
  }
  return out;
}

template <typename T>
OffsetField offsetnet_forward(const OffsetNetParams<T>& params,
                              const ClusterSet& cs, const PointCloud& cloud,
                              double s, int threads) {
  const Matrix<T> raw = offsetnet_raw(params, cs, cloud, threads);
  std::vector<Vec3> rows(raw.rows());
  for (std::size_t t = 0; t < raw.rows(); ++t) {
    rows[t] = {static_cast<double>(raw(t, 0)), static_cast<double>(raw(t, 1)),
               static_cast<double>(raw(t, 2))};
  }
  return clamp_offsets(rows, s);
}

OffsetNetParams<double> offsetnet_backward(const OffsetNetParams<double>& params,
                                           const ClusterSet& cs,
                                           const PointCloud& cloud, double s,
                                           const Matrix<double>& d_offsets) {
  check_params(params);
  cs.validate(cloud);
  if (d_offsets.rows() != cs.size() || d_offsets.cols() != 3) {
    fail(ErrorCode::kShape, "offsetnet_backward: gradient must be n x 3");
  }
  OffsetNetParams<double> grads;
  grads.w1 = zero_linear<double>(kFeatureWidth, params.c_off(), params.w1.has_bias());
  grads.w2 = Matrix<double>(params.c_off(), 3);

  for (std::size_t t = 0; t < cs.size(); ++t) {
    const Matrix<double> x = cluster_features<double>(cs, cloud, t);
    const Matrix<double> pre = linear(x, params.w1);
    const Matrix<double> hidden = relu(pre);
    const Matrix<double> pooled = avg_pool_rows(hidden);
    const Matrix<double> raw = matmul(pooled, params.w2);

    // Pullback of the ball projection r -> s r / |r| for |r| > s.
    const Vec3 r = row_vec(raw, 0);
    const Vec3 g = row_vec(d_offsets, t);
    Vec3 d_raw = g;
    const double len = norm(r);
    if (len > s) {
      d_raw = (s / len) * (g - (dot(r, g) / (len * len)) * r);
    }
    Matrix<double> d_raw_m(1, 3, {d_raw.x, d_raw.y, d_raw.z});

    auto mm = matmul_backward(pooled, params.w2, d_raw_m);
    accumulate(grads.w2, mm.db);
    const Matrix<double> d_hidden = avg_pool_rows_backward(hidden.rows(), mm.da);
    const Matrix<double> d_pre = relu_backward(pre, d_hidden);
    auto lin = linear_backward(x, params.w1, d_pre);
    accumulate(grads.w1.weight, lin.dp.weight);
    if (params.w1.has_bias()) accumulate(grads.w1.bias, lin.dp.bias);
  }
  return grads;
}

std::vector<Vec3> apply_offsets(std::span<const Vec3> centers,
                                const OffsetField& field) {
  if (centers.size() != field.size()) {
    fail(ErrorCode::kInvalidArgument, "apply_offsets: length mismatch");
  }
  std::vector<Vec3> out(centers.size());
  for (std::size_t t = 0; t < centers.size(); ++t) {
    out[t] = centers[t] + field.offsets[t];
  }
  return out;
}

#define PROXYFORM_INSTANTIATE(T)                                                 \
  template OffsetNetParams<T> offsetnet_init(std::uint64_t, std::size_t);        \
  template std::vector<Matrix<T>> offset_features(const ClusterSet&,             \
                                                  const PointCloud&);            \
  template Matrix<T> offsetnet_raw(const OffsetNetParams<T>&, const ClusterSet&, \
                                   const PointCloud&, int);                      \
  template Matrix<T> clamp_rows(const Matrix<T>&, double);                       \
  template OffsetField offsetnet_forward(const OffsetNetParams<T>&,              \
                                         const ClusterSet&, const PointCloud&,   \
                                         double, int);

PROXYFORM_INSTANTIATE(float)
PROXYFORM_INSTANTIATE(double)
PROXYFORM_INSTANTIATE(long double)

#undef PROXYFORM_INSTANTIATE

}  // namespace proxyform
