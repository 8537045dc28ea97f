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

#ifndef PROXYFORM_PIPELINE_H_
#define PROXYFORM_PIPELINE_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "proxyform/cluster.h"
#include "proxyform/flops.h"
#include "proxyform/geom.h"
#include "proxyform/offsetnet.h"
#include "proxyform/proxy.h"
#include "proxyform/reshape.h"
#include "proxyform/scene.h"

namespace proxyform {

enum class Precision { kFloat32, kFloat64 };

struct PipelineConfig {
  std::array<int, 3> grid_counts{12, 12, 12};
  // Maximum offset in offset units; one unit is a quarter of the narrowest
  // grid cell edge of the unshrunk grid.
  double offset_bound = 4.0;
  double beta = 0.6;
  DropMethod drop_method = DropMethod::kRandom;
  Gamma gamma = Gamma::kKnn;
  std::size_t m = 32;
  std::optional<double> radius;
  std::size_t width = 256;
  std::size_t c_off = 64;
  std::size_t ffn_mult = 4;
  std::size_t layers = 3;
  std::size_t n_text_proxies = 16;
  std::size_t n_views = 4;
  std::size_t tokens_per_view = 8;
  std::uint64_t seed = 0;
  Precision precision = Precision::kFloat32;
  bool unscaled_logits = false;
  bool literal_transform_head = false;
  int threads = 1;
  // Std-dev of the head weights at init. 0 keeps the pipeline an exact
  // identity map at initialization.
  double head_init_std = 0.0;
  SceneSpec scene = SceneSpec::desk(5000);

  // Throws kInvalidConfig.
  void validate() const;

  std::size_t cluster_count() const {
    return static_cast<std::size_t>(grid_counts[0]) * grid_counts[1] * grid_counts[2];
  }
  std::size_t kept_clusters() const { return kept_count(cluster_count(), beta); }

  ClusterParams cluster_params() const { return {gamma, m, radius}; }
};

// All learnable parameters of one pipeline. Stored in 64-bit and cast to
// the evaluation precision on use.
struct Model {
  OffsetNetParams<double> offsetnet;
  LinearParams<double> pointnet;
  std::vector<ProxyBlockParams<double>> text_blocks;
  std::vector<ProxyBlockParams<double>> image_blocks;
  LinearParams<double> view_score;
  HeadParams<double> heads;

  template <typename F>
  void for_each(F&& f) const {
    offsetnet.for_each(f);
    pointnet.for_each(f);
    for (const auto& b : text_blocks) b.for_each(f);
    for (const auto& b : image_blocks) b.for_each(f);
    view_score.for_each(f);
    heads.for_each(f);
  }

  friend bool operator==(const Model&, const Model&) = default;
};

Model init_model(const PipelineConfig& cfg);

// Offset bound in scene units for a cloud with the given bounds.
double offset_bound_scene(const PipelineConfig& cfg, const Bounds& bounds);

struct StageStats {
  std::string name;
  std::uint64_t flops = 0;
  double millis = 0.0;
};

struct CloudStats {
  std::size_t points = 0;
  std::size_t moved = 0;
  double mean_displacement = 0.0;
  double max_displacement = 0.0;
  Bounds bounds;
};

struct RunReport {
  std::uint64_t seed = 0;
  std::string config_hash;
  std::size_t clusters_total = 0;
  std::size_t clusters_kept = 0;
  double offset_bound_scene = 0.0;
  double mean_offset_norm = 0.0;
  CloudStats stats;
  std::vector<StageStats> stages;
  FlopsReport text_stack;
  FlopsReport image_stack;

  std::uint64_t total_flops() const;
};

struct EnhanceResult {
  PointCloud cloud;
  RunReport report;
};

// grid prior -> clusters -> offsets -> recluster -> drop -> cluster features
// -> text-guided stack -> translations -> image-guided stack -> matrices
// -> submanifold reshape. Stage failures are rethrown with the stage name.
EnhanceResult enhance(const PipelineConfig& cfg, const PointCloud& cloud,
                      const Proxies& proxies, const Model& model);

// Uses init_model(cfg) and proxies synthesized from cfg.seed.
EnhanceResult enhance(const PipelineConfig& cfg, const PointCloud& cloud);

Proxies default_proxies(const PipelineConfig& cfg);

// Self / cross / proxy accountant output at the config's kept-cluster count.
VariantComparison flops_report(const PipelineConfig& cfg, std::size_t n_proxy);

}  // namespace proxyform

#endif  // PROXYFORM_PIPELINE_H_
