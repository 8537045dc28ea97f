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

#ifndef PROXYFORM_CLUSTER_H_
#define PROXYFORM_CLUSTER_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "proxyform/geom.h"

namespace proxyform {

// Uniform reference grid over the cloud cuboid, shrunk by offset_bound on
// every side so that reference points moved by at most offset_bound stay
// inside [bounds_min, bounds_max].
struct GridSpec {
  std::array<int, 3> counts{12, 12, 12};
  Vec3 bounds_min;
  Vec3 bounds_max;
  double offset_bound = 0.0;

  std::size_t total() const {
    return static_cast<std::size_t>(counts[0]) * counts[1] * counts[2];
  }
};

enum class Gamma { kKnn, kBall };

struct ClusterParams {
  Gamma gamma = Gamma::kKnn;
  std::size_t m = 32;
  std::optional<double> radius;  // required iff gamma == kBall
};

// Cluster centers plus exactly m member indices per center. Members may
// repeat when a neighborhood holds fewer than m points.
struct ClusterSet {
  std::vector<Vec3> centers;
  std::vector<std::vector<std::size_t>> members;
  std::size_t m = 0;
  std::size_t source_cloud_len = 0;

  std::size_t size() const { return centers.size(); }
  bool empty() const { return centers.empty(); }

  // Throws kCorruptedClusterSet when the set does not describe `cloud`.
  void validate(const PointCloud& cloud) const;

  friend bool operator==(const ClusterSet&, const ClusterSet&) = default;
};

enum class DropMethod { kRandom, kFps };

struct DropConfig {
  double beta = 0.6;
  DropMethod method = DropMethod::kRandom;
  std::uint64_t seed = 0;
};

// Cell-center reference points ordered by flattened index
// t = (i * y_s + j) * z_s + k.
std::vector<Vec3> grid_prior(const GridSpec& spec);

// Stochastic reference points drawn uniformly in the shrunken cuboid. Only
// used as a comparison baseline for the deterministic grid.
std::vector<Vec3> random_prior(const GridSpec& spec, std::uint64_t seed);

std::vector<std::size_t> knn(const Vec3& center, const PointCloud& cloud,
                             std::size_t m);

std::vector<std::size_t> ball_query(const Vec3& center,
                                    const PointCloud& cloud, double radius,
                                    std::size_t m);

ClusterSet build_clusters(std::span<const Vec3> centers,
                          const PointCloud& cloud, const ClusterParams& params,
                          int threads = 1);

// Second clustering pass around the deformed centers.
ClusterSet recluster(std::span<const Vec3> new_centers,
                     const PointCloud& cloud, const ClusterParams& params,
                     int threads = 1);

// Greedy farthest-point sampling. The first pick is drawn from `seed`.
std::vector<std::size_t> fps(std::span<const Vec3> points, std::size_t k,
                             std::uint64_t seed);

// Same as fps() with an explicit first pick.
std::vector<std::size_t> fps_from(std::span<const Vec3> points, std::size_t k,
                                  std::size_t first);

// max(1, floor((1 - beta) * n)).
std::size_t kept_count(std::size_t n, double beta);

// Indices of the clusters that survive dropping, ascending.
std::vector<std::size_t> drop_indices(std::span<const Vec3> centers,
                                      const DropConfig& cfg);

ClusterSet drop_clusters(const ClusterSet& cs, const DropConfig& cfg);

}  // namespace proxyform

#endif  // PROXYFORM_CLUSTER_H_
