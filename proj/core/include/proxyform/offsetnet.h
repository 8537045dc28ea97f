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

#ifndef PROXYFORM_OFFSETNET_H_
#define PROXYFORM_OFFSETNET_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "proxyform/cluster.h"
#include "proxyform/geom.h"
#include "proxyform/numerics.h"

namespace proxyform {

// Per-cluster offset predictor: pointwise linear(6 -> c_off) + ReLU, average
// pool over the cluster, pointwise linear(c_off -> 3). The output layer has
// no bias term at all.
template <typename T>
struct OffsetNetParams {
  LinearParams<T> w1;
  Matrix<T> w2;

  std::size_t c_off() const { return w1.out(); }

  template <typename F>
  void for_each(F&& f) {
    w1.for_each(f);
    f(w2);
  }
  template <typename F>
  void for_each(F&& f) const {
    w1.for_each(f);
    f(w2);
  }

  template <typename U>
  OffsetNetParams<U> cast() const {
    return {w1.template cast<U>(), w2.template cast<U>()};
  }

  friend bool operator==(const OffsetNetParams&, const OffsetNetParams&) = default;
};

struct OffsetField {
  std::vector<Vec3> offsets;

  std::size_t size() const { return offsets.size(); }
};

// Random w1 (uniform, +-1/sqrt(6)), zero b1, zero w2: the first forward pass
// produces exactly zero offsets.
template <typename T>
OffsetNetParams<T> offsetnet_init(std::uint64_t seed, std::size_t c_off);

// One m x 6 matrix per cluster with rows [p - q_t, p].
template <typename T>
std::vector<Matrix<T>> offset_features(const ClusterSet& cs,
                                        const PointCloud& cloud);

// Unclamped offsets, one row per cluster.
template <typename T>
Matrix<T> offsetnet_raw(const OffsetNetParams<T>& params, const ClusterSet& cs,
                        const PointCloud& cloud, int threads = 1);

// Projects every row onto the L2 ball of radius s.
OffsetField clamp_offsets(std::span<const Vec3> raw, double s);

// Same projection on the rows of an n x 3 matrix, evaluated in T.
template <typename T>
Matrix<T> clamp_rows(const Matrix<T>& raw, double s);

template <typename T>
OffsetField offsetnet_forward(const OffsetNetParams<T>& params,
                              const ClusterSet& cs, const PointCloud& cloud,
                              double s, int threads = 1);

// Gradient of a loss with respect to the parameters, given the loss gradient
// d_offsets (n x 3) with respect to the clamped offsets.
OffsetNetParams<double> offsetnet_backward(const OffsetNetParams<double>& params,
                                           const ClusterSet& cs,
                                           const PointCloud& cloud, double s,
                                           const Matrix<double>& d_offsets);

std::vector<Vec3> apply_offsets(std::span<const Vec3> centers,
                                const OffsetField& field);

}  // namespace proxyform

#endif  // PROXYFORM_OFFSETNET_H_
