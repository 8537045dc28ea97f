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

#ifndef PROXYFORM_SCENE_H_
#define PROXYFORM_SCENE_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "proxyform/geom.h"
#include "proxyform/numerics.h"

namespace proxyform {

struct Blob {
  Vec3 center;
  double sigma = 0.1;
  std::size_t points = 0;
};

// Desk-scale synthetic scene: isotropic Gaussian blobs ("targets") over a
// uniformly sampled background slab whose height is jittered by noise_sigma.
struct SceneSpec {
  std::size_t total_points = 5000;
  std::vector<Blob> blobs;
  Vec3 slab_min{-2.0, -2.0, 0.0};
  Vec3 slab_max{2.0, 2.0, 0.1};
  double noise_sigma = 0.01;

  // Three blobs resting on the slab, sized to a fraction of total_points.
  static SceneSpec desk(std::size_t total_points);

  void validate() const;
};

struct Scene {
  PointCloud cloud;
  // 0 for background, b + 1 for points of blob b.
  std::vector<int> labels;
};

Scene gen_scene(const SceneSpec& spec, std::uint64_t seed);

// Stand-ins for encoder outputs: unit-variance text tokens (n_text x C) and
// one tokens_per_view x C token set per view.
struct Proxies {
  Matrix<double> text;
  std::vector<Matrix<double>> views;
};

Proxies synth_proxies(std::uint64_t seed, std::size_t n_text,
                      std::size_t n_views, std::size_t tokens_per_view,
                      std::size_t width);

}  // namespace proxyform

#endif  // PROXYFORM_SCENE_H_
