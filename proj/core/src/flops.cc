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

#include "proxyform/flops.h"

#include <cmath>

#include "proxyform/error.h"
#include "proxyform/proxy.h"

namespace proxyform {
namespace {

void check_dims(const FlopsConfig& cfg) {
  if (cfg.n_seq == 0 || cfg.c == 0 || cfg.ffn_mult == 0) {
    fail(ErrorCode::kInvalidArgument, "flops: n_seq, C and ffn_mult must be > 0");
  }
  if (cfg.variant != AttentionVariant::kSelf && cfg.n_proxy == 0) {
    fail(ErrorCode::kInvalidArgument, "flops: cross/proxy variants need n_proxy > 0");
  }
}

std::optional<ParamBreakdown> block_params(const FlopsConfig& cfg) {
  const std::uint64_t c = cfg.c;
  ParamBreakdown p;
  p.projections = 4 * c * c;
  p.ffn = 2 * cfg.ffn_mult * c * c + cfg.ffn_mult * c + c;
  if (cfg.variant == AttentionVariant::kProxy) {
    p.projections += c * c;
    BiasGeometry geo;
    try {
      geo = bias_geometry(c);
    } catch (const Error&) {
      return std::nullopt;
    }
    const std::uint64_t rows = cfg.bias_rows ? cfg.bias_rows : cfg.n_seq;
    p.bias = rows * geo.params_per_row();
  }
  return p;
}

}  // namespace

std::string_view to_string(AttentionVariant v) {
  switch (v) {
    case AttentionVariant::kSelf: return "self";
    case AttentionVariant::kCross: return "cross";
    case AttentionVariant::kProxy: return "proxy";
  }
  return "unknown";
}

std::optional<AttentionVariant> parse_variant(std::string_view name) {
  if (name == "self") return AttentionVariant::kSelf;
  if (name == "cross") return AttentionVariant::kCross;
  if (name == "proxy") return AttentionVariant::kProxy;
  return std::nullopt;
}

FlopsReport flops_count(const FlopsConfig& cfg) {
  FlopsReport report;
  report.config = cfg;
  if (cfg.layers == 0) {
    report.params_per_block = ParamBreakdown{};
    report.params = 0;
    return report;
  }
  check_dims(cfg);
  const std::uint64_t n = cfg.n_seq;
  const std::uint64_t np = cfg.n_proxy;
  const std::uint64_t c = cfg.c;

  FlopsBreakdown& b = report.per_block;
  b.projections = 8 * n * c * c;
  b.ffn = 4 * cfg.ffn_mult * n * c * c;
  switch (cfg.variant) {
    case AttentionVariant::kSelf:
      b.attention_core = 4 * n * n * c;
      break;
    case AttentionVariant::kCross:
      b.attention_core = 4 * n * np * c;
      break;
    case AttentionVariant::kProxy:
      b.projections += 2 * np * c * c;
      b.attention_core = 8 * n * np * c;
      b.bias = n * c;
      break;
  }
  report.total = {b.projections * cfg.layers, b.attention_core * cfg.layers,
                  b.ffn * cfg.layers, b.bias * cfg.layers};

  report.params_per_block = block_params(cfg);
  if (report.params_per_block) {
    report.params = report.params_per_block->total() * cfg.layers;
  }
  return report;
}

std::uint64_t param_count(const FlopsConfig& cfg) {
  const FlopsReport r = flops_count(cfg);
  if (!r.params) {
    fail(ErrorCode::kInvalidConfig,
         "param_count: proxy-bias width must be a fourth power");
  }
  return *r.params;
}

double VariantComparison::block_reduction() const {
  return 1.0 - static_cast<double>(proxy.total.total()) /
                   static_cast<double>(self.total.total());
}

double VariantComparison::core_reduction() const {
  return 1.0 - static_cast<double>(proxy.total.attention_core) /
                   static_cast<double>(self.total.attention_core);
}

VariantComparison compare_variants(FlopsConfig base) {
  VariantComparison cmp;
  base.variant = AttentionVariant::kSelf;
  cmp.self = flops_count(base);
  base.variant = AttentionVariant::kCross;
  cmp.cross = flops_count(base);
  base.variant = AttentionVariant::kProxy;
  cmp.proxy = flops_count(base);
  return cmp;
}

std::vector<SweepPoint> overhead_sweep(std::uint64_t layers) {
  std::vector<SweepPoint> sweep;
  for (std::uint64_t n_seq = 512; n_seq <= 2048; n_seq += 128) {
    for (std::uint64_t c : {128u, 256u}) {
      for (std::uint64_t np : {16u, 32u, 64u, 128u}) {
        for (std::uint64_t f : {2u, 4u}) {
          FlopsConfig cfg;
          cfg.n_seq = n_seq;
          cfg.n_proxy = np;
          cfg.c = c;
          cfg.ffn_mult = f;
          cfg.layers = layers;
          sweep.push_back({cfg, compare_variants(cfg).block_reduction()});
        }
      }
    }
  }
  return sweep;
}

SweepPoint closest_sweep_point(const std::vector<SweepPoint>& sweep, double target) {
  if (sweep.empty()) fail(ErrorCode::kEmptyInput, "closest_sweep_point: empty sweep");
  const SweepPoint* best = &sweep.front();
  for (const auto& point : sweep) {
    if (std::abs(point.block_reduction - target) <
        std::abs(best->block_reduction - target)) {
      best = &point;
    }
  }
  return *best;
}

}  // namespace proxyform
