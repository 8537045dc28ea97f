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

#ifndef PROXYFORM_RESHAPE_H_
#define PROXYFORM_RESHAPE_H_

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "proxyform/cluster.h"
#include "proxyform/geom.h"

namespace proxyform {

// One linear map and one translation per kept cluster.
struct TransformSet {
  std::vector<Matrix3> matrices;
  std::vector<Vec3> translations;

  std::size_t size() const { return matrices.size(); }

  static TransformSet identity(std::size_t n);
};

// Row convention: p -> p M^T + T, which equals M p + T for column points.
std::vector<Vec3> apply_submanifold(std::span<const Vec3> points,
                                    const Matrix3& m, const Vec3& t);

// For every point index, the cluster that transforms it: the member cluster
// whose center is nearest to the point (ties to the lower cluster id), or
// nullopt for points outside all clusters.
std::vector<std::optional<std::size_t>> assign_points(const ClusterSet& cs,
                                                      const PointCloud& cloud);

// Transforms each clustered point exactly once by its assigned cluster and
// leaves every other point untouched. Length and order are preserved.
PointCloud apply_all(const ClusterSet& cs, const TransformSet& ts,
                     const PointCloud& cloud, int threads = 1);

}  // namespace proxyform

#endif  // PROXYFORM_RESHAPE_H_
