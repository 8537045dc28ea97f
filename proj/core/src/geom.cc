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

#include "proxyform/geom.h"

#include <cmath>
#include <string>

#include "proxyform/error.h"

namespace proxyform {

double norm(const Vec3& a) { return std::sqrt(squared_norm(a)); }

double distance(const Vec3& a, const Vec3& b) { return norm(a - b); }

bool is_finite(const Vec3& v) {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

Matrix3 Matrix3::transpose() const {
  Matrix3 t;
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 3; ++c) t(c, r) = (*this)(r, c);
  }
  return t;
}

double Matrix3::determinant() const {
  const auto& a = *this;
  return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
         a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
         a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

bool Matrix3::is_finite() const {
  for (double v : m_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Vec3 apply(const Matrix3& m, const Vec3& p) {
  return {m(0, 0) * p.x + m(0, 1) * p.y + m(0, 2) * p.z,
          m(1, 0) * p.x + m(1, 1) * p.y + m(1, 2) * p.z,
          m(2, 0) * p.x + m(2, 1) * p.y + m(2, 2) * p.z};
}

Bounds bounding_box(const PointCloud& cloud) {
  if (cloud.empty()) fail(ErrorCode::kEmptyInput, "bounding_box: empty cloud");
  Bounds b{cloud[0], cloud[0]};
  for (const Vec3& p : cloud.points) {
    b.min = {std::fmin(b.min.x, p.x), std::fmin(b.min.y, p.y),
             std::fmin(b.min.z, p.z)};
    b.max = {std::fmax(b.max.x, p.x), std::fmax(b.max.y, p.y),
             std::fmax(b.max.z, p.z)};
  }
  return b;
}

Matrix3 rot_z(double theta) {
  if (!std::isfinite(theta)) {
    fail(ErrorCode::kInvalidArgument, "rot_z: theta must be finite");
  }
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return Matrix3({c, -s, 0, s, c, 0, 0, 0, 1});
}

Matrix3 scale(double sx, double sy, double sz) {
  if (!std::isfinite(sx) || !std::isfinite(sy) || !std::isfinite(sz)) {
    fail(ErrorCode::kInvalidArgument, "scale: factors must be finite");
  }
  if (sx == 0.0 || sy == 0.0 || sz == 0.0) {
    fail(ErrorCode::kDegenerateTransform, "scale: zero factor loses rank");
  }
  return Matrix3({sx, 0, 0, 0, sy, 0, 0, 0, sz});
}

Matrix3 shear_xy(double k) {
  if (!std::isfinite(k)) {
    fail(ErrorCode::kInvalidArgument, "shear_xy: k must be finite");
  }
  return Matrix3({1, k, 0, 0, 1, 0, 0, 0, 1});
}

Matrix3 compose(const Matrix3& m2, const Matrix3& m1) {
  Matrix3 out;
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 3; ++c) {
      out(r, c) = m2(r, 0) * m1(0, c) + m2(r, 1) * m1(1, c) +
                  m2(r, 2) * m1(2, c);
    }
  }
  return out;
}

PointCloud apply_linear(const PointCloud& cloud, const Matrix3& m) {
  PointCloud out;
  out.points.reserve(cloud.size());
  for (const Vec3& p : cloud.points) out.points.push_back(apply(m, p));
  return out;
}

PointCloud translate(const PointCloud& cloud, const Vec3& t) {
  PointCloud out;
  out.points.reserve(cloud.size());
  for (const Vec3& p : cloud.points) out.points.push_back(p + t);
  return out;
}

}  // namespace proxyform
