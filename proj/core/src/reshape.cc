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

#include "proxyform/reshape.h"

#include <limits>

#include "proxyform/error.h"
#include "proxyform/parallel.h"

namespace proxyform {

TransformSet TransformSet::identity(std::size_t n) {
  return {std::vector<Matrix3>(n, Matrix3::identity()), std::vector<Vec3>(n)};
}

std::vector<Vec3> apply_submanifold(std::span<const Vec3> points,
                                    const Matrix3& m, const Vec3& t) {
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const Vec3& p : points) out.push_back(apply(m, p) + t);
  return out;
}

std::vector<std::optional<std::size_t>> assign_points(const ClusterSet& cs,
                                                      const PointCloud& cloud) {
  cs.validate(cloud);
  std::vector<std::optional<std::size_t>> owner(cloud.size());
  std::vector<double> best(cloud.size(), std::numeric_limits<double>::infinity());
  for (std::size_t c = 0; c < cs.size(); ++c) {
    for (std::size_t idx : cs.members[c]) {
      const double d = squared_distance(cloud[idx], cs.centers[c]);
      // Strict comparison keeps the lower cluster id on ties.
      if (!owner[idx] || d < best[idx]) {
        owner[idx] = c;
        best[idx] = d;
      }
    }
  }
  return owner;
}

PointCloud apply_all(const ClusterSet& cs, const TransformSet& ts,
                     const PointCloud& cloud, int threads) {
  if (ts.matrices.size() != cs.size() || ts.translations.size() != cs.size()) {
    fail(ErrorCode::kInvalidArgument,
         "apply_all: transform set size does not match the cluster set");
  }
  const auto owner = assign_points(cs, cloud);
  PointCloud out = cloud;
  parallel_for(cloud.size(), threads, [&](std::size_t i) {
    if (!owner[i]) return;
    const std::size_t c = *owner[i];
    out[i] = apply(ts.matrices[c], cloud[i]) + ts.translations[c];
  });
  return out;
}

}  // namespace proxyform
