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

#ifndef PROXYFORM_GEOM_H_
#define PROXYFORM_GEOM_H_

#include <array>
#include <cstddef>
#include <vector>

namespace proxyform {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline Vec3 operator+(const Vec3& a, const Vec3& b) {
  return {a.x + b.x, a.y + b.y, a.z + b.z};
}
inline Vec3 operator-(const Vec3& a, const Vec3& b) {
  return {a.x - b.x, a.y - b.y, a.z - b.z};
}
inline Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
inline Vec3 operator*(double s, const Vec3& a) {
  return {s * a.x, s * a.y, s * a.z};
}

inline double dot(const Vec3& a, const Vec3& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}
inline double squared_norm(const Vec3& a) { return dot(a, a); }
double norm(const Vec3& a);
inline double squared_distance(const Vec3& a, const Vec3& b) {
  return squared_norm(a - b);
}
double distance(const Vec3& a, const Vec3& b);
bool is_finite(const Vec3& v);

// 3x3 matrix, row-major. Acts on column vectors: apply(m, p) = m * p.
class Matrix3 {
 public:
  constexpr Matrix3() = default;
  constexpr explicit Matrix3(const std::array<double, 9>& entries)
      : m_(entries) {}

  static constexpr Matrix3 identity() {
    return Matrix3({1, 0, 0, 0, 1, 0, 0, 0, 1});
  }

  constexpr double operator()(std::size_t r, std::size_t c) const {
    return m_[r * 3 + c];
  }
  constexpr double& operator()(std::size_t r, std::size_t c) {
    return m_[r * 3 + c];
  }
  constexpr const std::array<double, 9>& entries() const { return m_; }

  Matrix3 transpose() const;
  double determinant() const;
  bool is_finite() const;

  friend bool operator==(const Matrix3&, const Matrix3&) = default;

 private:
  std::array<double, 9> m_{};
};

Vec3 apply(const Matrix3& m, const Vec3& p);

// Ordered point list; indices identify points.
struct PointCloud {
  std::vector<Vec3> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  const Vec3& operator[](std::size_t i) const { return points[i]; }
  Vec3& operator[](std::size_t i) { return points[i]; }

  friend bool operator==(const PointCloud&, const PointCloud&) = default;
};

struct Bounds {
  Vec3 min;
  Vec3 max;
};

// Axis-aligned bounding box. Throws kEmptyInput on an empty cloud.
Bounds bounding_box(const PointCloud& cloud);

// Rotation about +z. Throws kInvalidArgument for non-finite theta.
Matrix3 rot_z(double theta);

// diag(sx, sy, sz). A zero factor throws kDegenerateTransform.
Matrix3 scale(double sx, double sy, double sz);

// Shear in the xy plane: x' = x + k * y.
Matrix3 shear_xy(double k);

// Returns m2 * m1, i.e. m1 is applied first.
Matrix3 compose(const Matrix3& m2, const Matrix3& m1);

PointCloud apply_linear(const PointCloud& cloud, const Matrix3& m);
PointCloud translate(const PointCloud& cloud, const Vec3& t);

}  // namespace proxyform

#endif  // PROXYFORM_GEOM_H_
