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

#ifndef PROXYFORM_FLOPS_H_
#define PROXYFORM_FLOPS_H_

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace proxyform {

enum class AttentionVariant { kSelf, kCross, kProxy };

std::string_view to_string(AttentionVariant v);
std::optional<AttentionVariant> parse_variant(std::string_view name);

struct FlopsConfig {
  std::uint64_t n_seq = 691;
  std::uint64_t n_proxy = 32;
  std::uint64_t c = 256;
  std::uint64_t ffn_mult = 4;
  std::uint64_t layers = 3;
  AttentionVariant variant = AttentionVariant::kProxy;
  // Proxy-bias row capacity; 0 means n_seq.
  std::uint64_t bias_rows = 0;
};

// FLOPs count 2 per multiply-add.
struct FlopsBreakdown {
  std::uint64_t projections = 0;
  std::uint64_t attention_core = 0;
  std::uint64_t ffn = 0;
  std::uint64_t bias = 0;

  std::uint64_t total() const { return projections + attention_core + ffn + bias; }

  friend bool operator==(const FlopsBreakdown&, const FlopsBreakdown&) = default;
};

struct ParamBreakdown {
  std::uint64_t projections = 0;
  std::uint64_t ffn = 0;
  std::uint64_t bias = 0;

  std::uint64_t total() const { return projections + ffn + bias; }

  friend bool operator==(const ParamBreakdown&, const ParamBreakdown&) = default;
};

struct FlopsReport {
  FlopsConfig config;
  FlopsBreakdown per_block;
  FlopsBreakdown total;
  // Empty when the proxy variant is asked for a width that is not a valid
  // proxy-bias width (C must be D^4).
  std::optional<ParamBreakdown> params_per_block;
  std::optional<std::uint64_t> params;
};

// Closed-form counts per block:
//   projections    8 N C^2, plus 2 n C^2 for the proxy projection
//   attention core 4 N^2 C (self), 4 N n C (cross), 8 N n C (proxy)
//   ffn            4 f N C^2
//   bias           N C (proxy only)
// summed over layers.
FlopsReport flops_count(const FlopsConfig& cfg);

// Throws kInvalidConfig for a proxy variant whose width is not D^4.
std::uint64_t param_count(const FlopsConfig& cfg);

struct VariantComparison {
  FlopsReport self;
  FlopsReport cross;
  FlopsReport proxy;

  // 1 - proxy/self for whole blocks and for the attention core alone.
  double block_reduction() const;
  double core_reduction() const;
};

VariantComparison compare_variants(FlopsConfig base);

struct SweepPoint {
  FlopsConfig config;
  double block_reduction = 0.0;
};

// Grid over n_seq in {512, 640, ..., 2048}, C in {128, 256},
// n_proxy in {16, 32, 64, 128}, ffn_mult in {2, 4} at the given depth.
std::vector<SweepPoint> overhead_sweep(std::uint64_t layers = 3);

// Point of the sweep closest to `target` block reduction; ties keep the
// earlier point.
SweepPoint closest_sweep_point(const std::vector<SweepPoint>& sweep, double target);

}  // namespace proxyform

#endif  // PROXYFORM_FLOPS_H_
