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

#include "proxyform/scene.h"

#include <string>

#include "proxyform/error.h"
#include "proxyform/random.h"

namespace proxyform {

SceneSpec SceneSpec::desk(std::size_t total_points) {
  SceneSpec spec;
  spec.total_points = total_points;
  const std::size_t per_blob = total_points / 8;
  spec.blobs = {
      {{1.0, 0.5, 0.35}, 0.12, per_blob},
      {{-0.8, -0.6, 0.30}, 0.10, per_blob},
      {{0.2, -1.2, 0.45}, 0.15, per_blob},
  };
  return spec;
}

void SceneSpec::validate() const {
  if (total_points == 0) fail(ErrorCode::kInvalidConfig, "scene: total_points must be > 0");
  std::size_t fg = 0;
  for (const Blob& b : blobs) {
    if (!(b.sigma >= 0.0) || !is_finite(b.center)) {
      fail(ErrorCode::kInvalidConfig, "scene: blob needs a finite center and sigma >= 0");
    }
    fg += b.points;
  }
  if (fg > total_points) {
    fail(ErrorCode::kInvalidConfig, "scene: blob points exceed total_points");
  }
  if (!(slab_min.x <= slab_max.x && slab_min.y <= slab_max.y &&
        slab_min.z <= slab_max.z)) {
    fail(ErrorCode::kInvalidConfig, "scene: slab_min must not exceed slab_max");
  }
  if (!(noise_sigma >= 0.0)) fail(ErrorCode::kInvalidConfig, "scene: noise_sigma must be >= 0");
}

Scene gen_scene(const SceneSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  Scene scene;
  scene.cloud.points.reserve(spec.total_points);
  scene.labels.reserve(spec.total_points);
  for (std::size_t b = 0; b < spec.blobs.size(); ++b) {
    const Blob& blob = spec.blobs[b];
    for (std::size_t i = 0; i < blob.points; ++i) {
      scene.cloud.points.push_back({rng.normal(blob.center.x, blob.sigma),
                                    rng.normal(blob.center.y, blob.sigma),
                                    rng.normal(blob.center.z, blob.sigma)});
      scene.labels.push_back(static_cast<int>(b) + 1);
    }
  }
  while (scene.cloud.size() < spec.total_points) {
    const double x = rng.uniform(spec.slab_min.x, spec.slab_max.x);
    const double y = rng.uniform(spec.slab_min.y, spec.slab_max.y);
    const double z = rng.uniform(spec.slab_min.z, spec.slab_max.z) +
                     rng.normal(0.0, spec.noise_sigma);
    scene.cloud.points.push_back({x, y, z});
    scene.labels.push_back(0);
  }
  return scene;
}

Proxies synth_proxies(std::uint64_t seed, std::size_t n_text,
                      std::size_t n_views, std::size_t tokens_per_view,
                      std::size_t width) {
  if (n_text == 0 || n_views == 0 || tokens_per_view == 0 || width == 0) {
    fail(ErrorCode::kInvalidArgument, "synth_proxies: all dimensions must be > 0");
  }
  Rng rng(seed);
  Proxies px;
  px.text = Matrix<double>(n_text, width);
  for (double& v : px.text.data()) v = rng.normal();
  px.views.reserve(n_views);
  for (std::size_t v = 0; v < n_views; ++v) {
    Matrix<double> tokens(tokens_per_view, width);
    for (double& x : tokens.data()) x = rng.normal();
    px.views.push_back(std::move(tokens));
  }
  return px;
}

}  // namespace proxyform
