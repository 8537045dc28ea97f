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

#include "proxyform/cluster.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include "proxyform/error.h"
#include "proxyform/parallel.h"
#include "proxyform/random.h"

namespace proxyform {
namespace {

struct Cuboid {
  Vec3 lo;
  Vec3 hi;
};

Cuboid shrunken_cuboid(const GridSpec& spec) {
  for (int c : spec.counts) {
    if (c <= 0) fail(ErrorCode::kInvalidArgument, "grid counts must be > 0");
  }
  const double s = spec.offset_bound;
  if (!std::isfinite(s) || s < 0.0) {
    fail(ErrorCode::kInvalidArgument, "offset bound must be finite and >= 0");
  }
  if (!is_finite(spec.bounds_min) || !is_finite(spec.bounds_max)) {
    fail(ErrorCode::kInvalidBounds, "grid bounds must be finite");
  }
  const Vec3 shift{s, s, s};
  Cuboid box{spec.bounds_min + shift, spec.bounds_max - shift};
  if (!(box.lo.x < box.hi.x && box.lo.y < box.hi.y && box.lo.z < box.hi.z)) {
    fail(ErrorCode::kInvalidBounds,
         "grid cuboid is empty after shrinking by the offset bound");
  }
  return box;
}

// Sorts candidate indices by (distance, index).
void sort_by_distance(std::vector<std::pair<double, std::size_t>>& items,
                      std::size_t keep) {
  keep = std::min(keep, items.size());
  std::partial_sort(items.begin(), items.begin() + keep, items.end());
  items.resize(keep);
}

std::vector<std::size_t> repeat_to(const std::vector<std::size_t>& base,
                                   std::size_t m) {
  std::vector<std::size_t> out(m);
  for (std::size_t i = 0; i < m; ++i) out[i] = base[i % base.size()];
  return out;
}

void check_query(const PointCloud& cloud, std::size_t m, const char* op) {
  if (cloud.empty()) {
    fail(ErrorCode::kEmptyInput, std::string(op) + ": empty cloud");
  }
  if (m == 0) {
    fail(ErrorCode::kInvalidArgument, std::string(op) + ": m must be > 0");
  }
}

}  // namespace

void ClusterSet::validate(const PointCloud& cloud) const {
  if (members.size() != centers.size()) {
    fail(ErrorCode::kCorruptedClusterSet, "centers/members length mismatch");
  }
  if (source_cloud_len != cloud.size()) {
    fail(ErrorCode::kCorruptedClusterSet,
         "cluster set was built for a cloud of different length");
  }
  for (const auto& list : members) {
    if (list.size() != m) {
      fail(ErrorCode::kCorruptedClusterSet, "member list length != m");
    }
    for (std::size_t idx : list) {
      if (idx >= cloud.size()) {
        fail(ErrorCode::kCorruptedClusterSet,
             "member index " + std::to_string(idx) + " out of range");
      }
    }
  }
}

std::vector<Vec3> grid_prior(const GridSpec& spec) {
  const Cuboid box = shrunken_cuboid(spec);
  const auto [xs, ys, zs] = spec.counts;
  const Vec3 step{(box.hi.x - box.lo.x) / xs, (box.hi.y - box.lo.y) / ys,
                  (box.hi.z - box.lo.z) / zs};
  std::vector<Vec3> centers;
  centers.reserve(spec.total());
  for (int i = 0; i < xs; ++i) {
    for (int j = 0; j < ys; ++j) {
      for (int k = 0; k < zs; ++k) {
        centers.push_back({box.lo.x + (i + 0.5) * step.x,
                           box.lo.y + (j + 0.5) * step.y,
                           box.lo.z + (k + 0.5) * step.z});
      }
    }
  }
  return centers;
}

std::vector<Vec3> random_prior(const GridSpec& spec, std::uint64_t seed) {
  const Cuboid box = shrunken_cuboid(spec);
  Rng rng(seed);
  std::vector<Vec3> centers(spec.total());
  for (Vec3& c : centers) {
    c.x = rng.uniform(box.lo.x, box.hi.x);
    c.y = rng.uniform(box.lo.y, box.hi.y);
    c.z = rng.uniform(box.lo.z, box.hi.z);
  }
  return centers;
}

std::vector<std::size_t> knn(const Vec3& center, const PointCloud& cloud,
                             std::size_t m) {
  check_query(cloud, m, "knn");
  std::vector<std::pair<double, std::size_t>> items(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    items[i] = {squared_distance(center, cloud[i]), i};
  }
  sort_by_distance(items, m);
  std::vector<std::size_t> base(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) base[i] = items[i].second;
  return repeat_to(base, m);
}

std::vector<std::size_t> ball_query(const Vec3& center,
                                    const PointCloud& cloud, double radius,
                                    std::size_t m) {
  check_query(cloud, m, "ball_query");
  if (!(radius > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "ball_query: radius must be > 0");
  }
  std::vector<std::pair<double, std::size_t>> items;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const double d = distance(center, cloud[i]);
    if (d <= radius) items.emplace_back(d, i);
  }
  if (items.empty()) return knn(center, cloud, m);
  sort_by_distance(items, m);
  std::vector<std::size_t> base(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) base[i] = items[i].second;
  return repeat_to(base, m);
}

ClusterSet build_clusters(std::span<const Vec3> centers,
                          const PointCloud& cloud, const ClusterParams& params,
                          int threads) {
  if (centers.empty()) {
    fail(ErrorCode::kEmptyInput, "build_clusters: no centers");
  }
  if (params.gamma == Gamma::kBall && !params.radius) {
    fail(ErrorCode::kInvalidArgument, "build_clusters: ball query needs a radius");
  }
  if (params.gamma == Gamma::kKnn && params.radius) {
    fail(ErrorCode::kInvalidArgument, "build_clusters: radius given for knn");
  }
  check_query(cloud, params.m, "build_clusters");

  ClusterSet cs;
  cs.centers.assign(centers.begin(), centers.end());
  cs.members.resize(centers.size());
  cs.m = params.m;
  cs.source_cloud_len = cloud.size();
  parallel_for(centers.size(), threads, [&](std::size_t t) {
    cs.members[t] = params.gamma == Gamma::kKnn
                        ? knn(centers[t], cloud, params.m)
                        : ball_query(centers[t], cloud, *params.radius, params.m);
  });
  return cs;
}

ClusterSet recluster(std::span<const Vec3> new_centers,
                     const PointCloud& cloud, const ClusterParams& params,
                     int threads) {
  return build_clusters(new_centers, cloud, params, threads);
}

std::vector<std::size_t> fps_from(std::span<const Vec3> points, std::size_t k,
                                  std::size_t first) {
  const std::size_t n = points.size();
  if (k > n) fail(ErrorCode::kInvalidArgument, "fps: k exceeds point count");
  if (k == 0) return {};
  if (first >= n) fail(ErrorCode::kInvalidArgument, "fps: first index out of range");

  std::vector<std::size_t> picked;
  picked.reserve(k);
  std::vector<char> taken(n, 0);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::size_t current = first;
  for (;;) {
    picked.push_back(current);
    taken[current] = 1;
    if (picked.size() == k) break;
    std::size_t best = n;
    double best_d = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      nearest[i] = std::min(nearest[i], squared_distance(points[i], points[current]));
      if (nearest[i] > best_d) {
        best_d = nearest[i];
        best = i;
      }
    }
    current = best;
  }
  return picked;
}

std::vector<std::size_t> fps(std::span<const Vec3> points, std::size_t k,
                             std::uint64_t seed) {
  if (k > points.size()) {
    fail(ErrorCode::kInvalidArgument, "fps: k exceeds point count");
  }
  if (k == 0) return {};
  Rng rng(seed);
  return fps_from(points, k, rng.index(points.size()));
}

std::size_t kept_count(std::size_t n, double beta) {
  if (!(beta >= 0.0 && beta < 1.0)) {
    fail(ErrorCode::kInvalidArgument, "drop ratio must lie in [0, 1)");
  }
  // The epsilon absorbs representation error such as (1 - 0.9) * 10 < 1.
  const double raw = (1.0 - beta) * static_cast<double>(n);
  const auto kept = static_cast<std::size_t>(std::floor(raw + 1e-9));
  return std::max<std::size_t>(1, std::min(kept, n));
}

std::vector<std::size_t> drop_indices(std::span<const Vec3> centers,
                                      const DropConfig& cfg) {
  const std::size_t n = centers.size();
  if (n == 0) fail(ErrorCode::kEmptyInput, "drop_clusters: empty cluster set");
  const std::size_t keep = kept_count(n, cfg.beta);
  std::vector<std::size_t> kept;
  if (keep == n) {
    kept.resize(n);
    std::iota(kept.begin(), kept.end(), std::size_t{0});
    return kept;
  }
  if (cfg.method == DropMethod::kFps) {
    kept = fps(centers, keep, cfg.seed);
  } else {
    // Partial Fisher-Yates.
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    Rng rng(cfg.seed);
    for (std::size_t i = 0; i < keep; ++i) {
      const std::size_t j = i + rng.index(n - i);
      std::swap(pool[i], pool[j]);
    }
    kept.assign(pool.begin(), pool.begin() + keep);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

ClusterSet drop_clusters(const ClusterSet& cs, const DropConfig& cfg) {
  const auto kept = drop_indices(cs.centers, cfg);
  ClusterSet out;
  out.m = cs.m;
  out.source_cloud_len = cs.source_cloud_len;
  out.centers.reserve(kept.size());
  out.members.reserve(kept.size());
  for (std::size_t t : kept) {
    out.centers.push_back(cs.centers[t]);
    out.members.push_back(cs.members[t]);
  }
  return out;
}

}  // namespace proxyform
