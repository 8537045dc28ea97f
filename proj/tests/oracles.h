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

#ifndef PROXYFORM_TESTS_ORACLES_H_
#define PROXYFORM_TESTS_ORACLES_H_

// Brute-force reference implementations. They share no code with the
// library beyond plain data types.

#include <algorithm>
#include <cmath>
#include <array>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "proxyform/cluster.h"
#include "proxyform/geom.h"
#include "proxyform/numerics.h"
#include "proxyform/random.h"

namespace proxyform::oracle {

inline double dist(const Vec3& a, const Vec3& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

inline std::vector<std::size_t> cycle(const std::vector<std::size_t>& base, std::size_t m) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; out.size() < m; i = (i + 1) % base.size()) out.push_back(base[i]);
  return out;
}

// Selection by repeated minimum; the first minimum found keeps the lower index.
inline std::vector<std::size_t> sorted_by_distance(const Vec3& c, const PointCloud& cloud,
                                                   const std::vector<std::size_t>& pool,
                                                   std::size_t limit) {
  std::vector<std::size_t> remaining = pool;
  std::vector<std::size_t> out;
  while (!remaining.empty() && out.size() < limit) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < remaining.size(); ++i) {
      const double di = dist(c, cloud[remaining[i]]);
      const double db = dist(c, cloud[remaining[best]]);
      if (di < db || (di == db && remaining[i] < remaining[best])) best = i;
    }
    out.push_back(remaining[best]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return out;
}

inline std::vector<std::size_t> knn(const Vec3& c, const PointCloud& cloud, std::size_t m) {
  std::vector<std::size_t> all(cloud.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return cycle(sorted_by_distance(c, cloud, all, m), m);
}

inline std::vector<std::size_t> ball_query(const Vec3& c, const PointCloud& cloud, double r,
                                           std::size_t m) {
  std::vector<std::size_t> inside;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (dist(c, cloud[i]) <= r) inside.push_back(i);
  }
  if (inside.empty()) return oracle::knn(c, cloud, m);
  return cycle(sorted_by_distance(c, cloud, inside, m), m);
}

// Recomputes every candidate's distance to the whole selected set each round.
inline std::vector<std::size_t> fps(const std::vector<Vec3>& pts, std::size_t k,
                                    std::size_t first) {
  std::vector<std::size_t> picked{first};
  while (picked.size() < k) {
    std::size_t best = pts.size();
    double best_d = -1.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (std::find(picked.begin(), picked.end(), i) != picked.end()) continue;
      double d = std::numeric_limits<double>::infinity();
      for (std::size_t j : picked) d = std::min(d, dist(pts[i], pts[j]));
      if (d > best_d) {
        best_d = d;
        best = i;
      }
    }
    picked.push_back(best);
  }
  return picked;
}

// For each point, the member cluster with the nearest center, lowest id on ties.
inline std::vector<std::optional<std::size_t>> assignment(const ClusterSet& cs,
                                                          const PointCloud& cloud) {
  std::vector<std::optional<std::size_t>> owner(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < cs.size(); ++c) {
      const auto& mem = cs.members[c];
      if (std::find(mem.begin(), mem.end(), i) == mem.end()) continue;
      const Vec3 e{cloud[i].x - cs.centers[c].x, cloud[i].y - cs.centers[c].y,
                   cloud[i].z - cs.centers[c].z};
      const double d = e.x * e.x + e.y * e.y + e.z * e.z;
      if (d < best) {
        best = d;
        owner[i] = c;
      }
    }
  }
  return owner;
}

inline Vec3 transform(const std::array<double, 9>& m, const Vec3& p, const Vec3& t) {
  return {m[0] * p.x + m[1] * p.y + m[2] * p.z + t.x,
          m[3] * p.x + m[4] * p.y + m[5] * p.z + t.y,
          m[6] * p.x + m[7] * p.y + m[8] * p.z + t.z};
}

template <typename T>
Matrix<T> naive_matmul(const Matrix<T>& a, const Matrix<T>& b) {
  Matrix<T> out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      T acc = 0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      out(i, j) = acc;
    }
  }
  return out;
}

template <typename T>
Matrix<T> naive_softmax(const Matrix<T>& m) {
  Matrix<T> out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    T hi = m(i, 0);
    for (std::size_t j = 1; j < m.cols(); ++j) hi = std::max(hi, m(i, j));
    T sum = 0;
    for (std::size_t j = 0; j < m.cols(); ++j) sum += std::exp(m(i, j) - hi);
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = std::exp(m(i, j) - hi) / sum;
  }
  return out;
}

// softmax(a b^T * scale), built entry by entry.
template <typename T>
Matrix<T> naive_weights(const Matrix<T>& a, const Matrix<T>& b, bool unscaled) {
  Matrix<T> logits(a.rows(), b.rows());
  const T scale = unscaled ? T(1) : T(1) / std::sqrt(static_cast<T>(a.cols()));
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.rows(); ++j) {
      T acc = 0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(j, k);
      logits(i, j) = acc * scale;
    }
  }
  return naive_softmax(logits);
}

// Explicit composite product softmax(Q P^T) softmax(P K^T) V.
template <typename T>
Matrix<T> explicit_proxy_attention(const Matrix<T>& q, const Matrix<T>& k, const Matrix<T>& v,
                                   const Matrix<T>& p, bool unscaled) {
  const Matrix<T> composite =
      naive_matmul(naive_weights(q, p, unscaled), naive_weights(p, k, unscaled));
  return naive_matmul(composite, v);
}

template <typename T>
double max_abs_diff(const Matrix<T>& a, const Matrix<T>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, static_cast<double>(std::abs(a.data()[i] - b.data()[i])));
  }
  return worst;
}

template <typename T>
Matrix<T> random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double sd = 1.0) {
  Matrix<T> m(rows, cols);
  for (T& v : m.data()) v = static_cast<T>(rng.normal(0.0, sd));
  return m;
}

inline PointCloud random_cloud(Rng& rng, std::size_t n, double extent = 1.0) {
  PointCloud c;
  for (std::size_t i = 0; i < n; ++i) {
    c.points.push_back({rng.uniform(-extent, extent), rng.uniform(-extent, extent),
                        rng.uniform(-extent, extent)});
  }
  return c;
}

}  // namespace proxyform::oracle

#endif  // PROXYFORM_TESTS_ORACLES_H_
