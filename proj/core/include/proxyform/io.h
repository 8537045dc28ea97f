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

#ifndef PROXYFORM_IO_H_
#define PROXYFORM_IO_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "proxyform/flops.h"
#include "proxyform/geom.h"
#include "proxyform/pipeline.h"

namespace proxyform {

enum class CloudFormat { kPly, kCsv };

// Picks the format from the file extension (.ply / .csv). Throws
// kInvalidArgument for anything else.
CloudFormat format_from_path(const std::filesystem::path& path);

// ASCII PLY ("format ascii 1.0", float x/y/z) and "x,y,z" CSV. Coordinates
// are written with 9 significant digits.
std::string format_ply(const PointCloud& cloud);
std::string format_csv(const PointCloud& cloud);
PointCloud parse_ply(std::string_view text);
PointCloud parse_csv(std::string_view text);

void export_cloud(const PointCloud& cloud, const std::filesystem::path& path,
                  CloudFormat format);
void export_cloud(const PointCloud& cloud, const std::filesystem::path& path);
PointCloud import_cloud(const std::filesystem::path& path);

void export_labels(const std::vector<int>& labels,
                   const std::filesystem::path& path);

// Config JSON. Missing keys keep their defaults; unknown keys are rejected.
// Parse errors throw kParse with the line and column.
PipelineConfig config_from_json(std::string_view text);
std::string config_to_json(const PipelineConfig& cfg);
PipelineConfig load_config(const std::filesystem::path& path);
void save_config(const PipelineConfig& cfg, const std::filesystem::path& path);

// Overrides cfg.seed from PROXYFORM_SEED when it is set.
void apply_env_overrides(PipelineConfig& cfg);

// FNV-1a over the canonical config JSON, 16 hex digits.
std::string config_hash(const PipelineConfig& cfg);

std::string flops_report_to_json(const FlopsReport& report);
std::string comparison_to_json(const VariantComparison& cmp);

// Timings are the only run-to-run varying fields; include_timing = false
// gives a reproducible document.
std::string report_to_json(const RunReport& report, bool include_timing = true);
void save_report(const RunReport& report, const std::filesystem::path& path,
                 bool include_timing = true);

std::string offsetnet_to_json(const OffsetNetParams<double>& params);
std::string checkpoint_to_json(const Model& model);
Model checkpoint_from_json(std::string_view text);
void save_checkpoint(const Model& model, const std::filesystem::path& path);
Model load_checkpoint(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace proxyform

#endif  // PROXYFORM_IO_H_
