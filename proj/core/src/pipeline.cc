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

#include "proxyform/pipeline.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>
#include <utility>

#include "proxyform/error.h"
#include "proxyform/io.h"
#include "proxyform/random.h"

namespace proxyform {
namespace {

enum Stream : std::uint64_t {
  kOffsetNetStream = 1,
  kPointNetStream = 2,
  kViewScoreStream = 3,
  kHeadStream = 4,
  kDropStream = 5,
  kProxyStream = 6,
  kTextBlockStream = 100,
  kImageBlockStream = 200,
};

class StageTimer {
 public:
  StageTimer(RunReport& report, std::string name)
      : report_(report), name_(std::move(name)),
        start_(std::chrono::steady_clock::now()) {}

  void finish(std::uint64_t flops) {
    const auto elapsed = std::chrono::steady_clock::now() - start_;
    report_.stages.push_back(
        {name_, flops,
         std::chrono::duration<double, std::milli>(elapsed).count()});
  }

  const std::string& name() const { return name_; }

 private:
  RunReport& report_;
  std::string name_;
  std::chrono::steady_clock::time_point start_;
};

template <typename Fn>
auto in_stage(const std::string& name, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), "stage " + name + ": " + e.what());
  }
}

template <typename T>
std::vector<ProxyBlockParams<T>> cast_blocks(
    const std::vector<ProxyBlockParams<double>>& blocks) {
  std::vector<ProxyBlockParams<T>> out;
  out.reserve(blocks.size());
  for (const auto& b : blocks) out.push_back(b.template cast<T>());
  return out;
}

CloudStats cloud_stats(const PointCloud& before, const PointCloud& after) {
  CloudStats s;
  s.points = after.size();
  if (!after.empty()) s.bounds = bounding_box(after);
  double total = 0.0;
  for (std::size_t i = 0; i < after.size(); ++i) {
    if (after[i] == before[i]) continue;
    const double d = distance(after[i], before[i]);
    ++s.moved;
    total += d;
    s.max_displacement = std::max(s.max_displacement, d);
  }
  if (s.moved) s.mean_displacement = total / static_cast<double>(s.moved);
  return s;
}

template <typename T>
EnhanceResult run_enhance(const PipelineConfig& cfg, const PointCloud& cloud,
                          const Proxies& proxies, const Model& model) {
  EnhanceResult result;
  RunReport& report = result.report;
  report.seed = cfg.seed;
  report.config_hash = config_hash(cfg);
  const int threads = cfg.threads;
  const std::uint64_t n_points = cloud.size();
  const ClusterParams cparams = cfg.cluster_params();
  const AttentionOptions attn{cfg.unscaled_logits};

  // Grid prior over the (shrunken) cloud cuboid.
  StageTimer grid_stage(report, "grid_prior");
  GridSpec spec;
  const std::vector<Vec3> centers = in_stage(grid_stage.name(), [&] {
    const Bounds box = bounding_box(cloud);
    spec.counts = cfg.grid_counts;
    spec.bounds_min = box.min;
    spec.bounds_max = box.max;
    spec.offset_bound = offset_bound_scene(cfg, box);
    return grid_prior(spec);
  });
  grid_stage.finish(0);
  report.offset_bound_scene = spec.offset_bound;
  report.clusters_total = centers.size();
  const std::uint64_t n_centers = centers.size();

  StageTimer cluster_stage(report, "cluster");
  const ClusterSet initial = in_stage(cluster_stage.name(), [&] {
    return build_clusters(centers, cloud, cparams, threads);
  });
  cluster_stage.finish(8 * n_points * n_centers);

  StageTimer offset_stage(report, "offsetnet");
  const OffsetField field = in_stage(offset_stage.name(), [&] {
    return offsetnet_forward(model.offsetnet.cast<T>(), initial, cloud,
                             spec.offset_bound, threads);
  });
  offset_stage.finish(n_centers * (2 * cfg.m * 6 * cfg.c_off + 2 * cfg.c_off * 3));
  double offset_total = 0.0;
  for (const Vec3& o : field.offsets) offset_total += norm(o);
  report.mean_offset_norm = offset_total / static_cast<double>(field.size());

  StageTimer recluster_stage(report, "recluster");
  const ClusterSet deformed = in_stage(recluster_stage.name(), [&] {
    const std::vector<Vec3> moved = apply_offsets(centers, field);
    return recluster(moved, cloud, cparams, threads);
  });
  recluster_stage.finish(8 * n_points * n_centers);

  StageTimer drop_stage(report, "drop");
  const ClusterSet kept = in_stage(drop_stage.name(), [&] {
    return drop_clusters(deformed, {cfg.beta, cfg.drop_method,
                                    derive_seed(cfg.seed, kDropStream)});
  });
  drop_stage.finish(0);
  report.clusters_kept = kept.size();
  const std::uint64_t n_kept = kept.size();

  StageTimer pointnet_stage(report, "pointnet");
  const Matrix<T> f0 = in_stage(pointnet_stage.name(), [&] {
    return pointnet_lite(model.pointnet.cast<T>(), kept, cloud, threads);
  });
  pointnet_stage.finish(2 * n_kept * cfg.m * 6 * cfg.width);

  FlopsConfig stack_cfg;
  stack_cfg.n_seq = n_kept;
  stack_cfg.c = cfg.width;
  stack_cfg.ffn_mult = cfg.ffn_mult;
  stack_cfg.layers = cfg.layers;
  stack_cfg.variant = AttentionVariant::kProxy;
  stack_cfg.bias_rows = cfg.kept_clusters();

  StageTimer text_stage(report, "text_stack");
  const Matrix<T> f_text = in_stage(text_stage.name(), [&] {
    const auto blocks = cast_blocks<T>(model.text_blocks);
    return stack_forward<T>(blocks, f0, proxies.text.cast<T>(), attn);
  });
  stack_cfg.n_proxy = proxies.text.rows();
  report.text_stack = flops_count(stack_cfg);
  text_stage.finish(report.text_stack.total.total());

  StageTimer translation_stage(report, "translation_head");
  const Matrix<T> translations = in_stage(translation_stage.name(), [&] {
    return translation_head(f_text, model.heads.cast<T>());
  });
  translation_stage.finish(2 * n_kept * cfg.width * 3);

  StageTimer pool_stage(report, "attention_pool");
  const Matrix<T> image_proxies = in_stage(pool_stage.name(), [&] {
    std::vector<Matrix<T>> views;
    views.reserve(proxies.views.size());
    for (const auto& v : proxies.views) views.push_back(v.cast<T>());
    return pool_views<T>(model.view_score.cast<T>(), views);
  });
  std::uint64_t pool_flops = 0;
  for (const auto& v : proxies.views) pool_flops += 4 * v.rows() * v.cols();
  pool_stage.finish(pool_flops);

  StageTimer image_stage(report, "image_stack");
  const Matrix<T> f_image = in_stage(image_stage.name(), [&] {
    const auto blocks = cast_blocks<T>(model.image_blocks);
    return stack_forward<T>(blocks, f0, image_proxies, attn);
  });
  stack_cfg.n_proxy = image_proxies.rows();
  report.image_stack = flops_count(stack_cfg);
  image_stage.finish(report.image_stack.total.total());

  StageTimer transform_stage(report, "transform_head");
  const Matrix<T> matrices = in_stage(transform_stage.name(), [&] {
    return transform_head(f_image, model.heads.cast<T>(),
                          cfg.literal_transform_head);
  });
  transform_stage.finish(2 * n_kept * cfg.width * 9);

  StageTimer reshape_stage(report, "reshape");
  std::uint64_t assigned = 0;
  result.cloud = in_stage(reshape_stage.name(), [&] {
    TransformSet ts;
    ts.matrices = rows_to_matrices(matrices.template cast<double>());
    ts.translations = rows_to_vectors(translations.template cast<double>());
    for (const auto& owner : assign_points(kept, cloud)) assigned += owner ? 1 : 0;
    return apply_all(kept, ts, cloud, threads);
  });
  reshape_stage.finish(18 * assigned);

  report.stats = cloud_stats(cloud, result.cloud);
  return result;
}

}  // namespace

void PipelineConfig::validate() const {
  for (int c : grid_counts) {
    if (c <= 0) fail(ErrorCode::kInvalidConfig, "grid counts must be > 0");
  }
  if (!(offset_bound >= 0.0) || !std::isfinite(offset_bound)) {
    fail(ErrorCode::kInvalidConfig, "offset_bound must be finite and >= 0");
  }
  if (!(beta >= 0.0 && beta < 1.0)) fail(ErrorCode::kInvalidConfig, "beta must lie in [0, 1)");
  if (m == 0) fail(ErrorCode::kInvalidConfig, "m must be > 0");
  if (gamma == Gamma::kBall && !(radius && *radius > 0.0)) {
    fail(ErrorCode::kInvalidConfig, "ball query needs radius > 0");
  }
  if (gamma == Gamma::kKnn && radius) {
    fail(ErrorCode::kInvalidConfig, "radius is only valid with gamma = ball");
  }
  bias_geometry(width);
  if (c_off == 0 || ffn_mult == 0) fail(ErrorCode::kInvalidConfig, "c_off and ffn_mult must be > 0");
  if (n_text_proxies == 0 || n_views == 0 || tokens_per_view == 0) {
    fail(ErrorCode::kInvalidConfig, "proxy counts must be > 0");
  }
  if (threads < 1) fail(ErrorCode::kInvalidConfig, "threads must be >= 1");
  if (!(head_init_std >= 0.0)) fail(ErrorCode::kInvalidConfig, "head_init_std must be >= 0");
  scene.validate();
}

std::uint64_t RunReport::total_flops() const {
  std::uint64_t total = 0;
  for (const auto& s : stages) total += s.flops;
  return total;
}

double offset_bound_scene(const PipelineConfig& cfg, const Bounds& bounds) {
  const Vec3 extent = bounds.max - bounds.min;
  const double unit = std::min({extent.x / cfg.grid_counts[0],
                                extent.y / cfg.grid_counts[1],
                                extent.z / cfg.grid_counts[2]}) /
                      4.0;
  return cfg.offset_bound * unit;
}

Model init_model(const PipelineConfig& cfg) {
  cfg.validate();
  Model model;
  model.offsetnet = offsetnet_init<double>(derive_seed(cfg.seed, kOffsetNetStream), cfg.c_off);

  Rng pointnet_rng(derive_seed(cfg.seed, kPointNetStream));
  model.pointnet = zero_linear<double>(6, cfg.width, true);
  const double pn_bound = 1.0 / std::sqrt(6.0);
  for (double& v : model.pointnet.weight.data()) v = pointnet_rng.uniform(-pn_bound, pn_bound);

  BlockInit init;
  init.width = cfg.width;
  init.ffn_mult = cfg.ffn_mult;
  init.bias_rows = cfg.kept_clusters();
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    model.text_blocks.push_back(
        proxy_block_init<double>(derive_seed(cfg.seed, kTextBlockStream + l), init));
    model.image_blocks.push_back(
        proxy_block_init<double>(derive_seed(cfg.seed, kImageBlockStream + l), init));
  }

  Rng score_rng(derive_seed(cfg.seed, kViewScoreStream));
  model.view_score = zero_linear<double>(cfg.width, 1, false);
  const double score_bound = 1.0 / std::sqrt(static_cast<double>(cfg.width));
  for (double& v : model.view_score.weight.data()) v = score_rng.uniform(-score_bound, score_bound);

  model.heads = zero_heads<double>(cfg.width);
  if (cfg.head_init_std > 0.0) {
    Rng head_rng(derive_seed(cfg.seed, kHeadStream));
    for (double& v : model.heads.u_text.weight.data()) v = head_rng.normal(0.0, cfg.head_init_std);
    for (double& v : model.heads.u_image.weight.data()) v = head_rng.normal(0.0, cfg.head_init_std);
  }
  return model;
}

Proxies default_proxies(const PipelineConfig& cfg) {
  return synth_proxies(derive_seed(cfg.seed, kProxyStream), cfg.n_text_proxies,
                       cfg.n_views, cfg.tokens_per_view, cfg.width);
}

EnhanceResult enhance(const PipelineConfig& cfg, const PointCloud& cloud,
                      const Proxies& proxies, const Model& model) {
  cfg.validate();
  if (cloud.empty()) fail(ErrorCode::kEmptyInput, "enhance: empty cloud");
  if (cfg.precision == Precision::kFloat64) {
    return run_enhance<double>(cfg, cloud, proxies, model);
  }
  return run_enhance<float>(cfg, cloud, proxies, model);
}

EnhanceResult enhance(const PipelineConfig& cfg, const PointCloud& cloud) {
  return enhance(cfg, cloud, default_proxies(cfg), init_model(cfg));
}

VariantComparison flops_report(const PipelineConfig& cfg, std::size_t n_proxy) {
  FlopsConfig base;
  base.n_seq = cfg.kept_clusters();
  base.n_proxy = n_proxy;
  base.c = cfg.width;
  base.ffn_mult = cfg.ffn_mult;
  base.layers = cfg.layers;
  base.bias_rows = cfg.kept_clusters();
  return compare_variants(base);
}

}  // namespace proxyform
