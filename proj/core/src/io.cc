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

#include "proxyform/io.h"

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "proxyform/error.h"

namespace proxyform {
namespace {

using nlohmann::json;

std::string format_coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(pos, end - pos));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    pos = end + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

double parse_number(const std::string& token, std::size_t line_no) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (token.empty() || end != token.c_str() + token.size() || !std::isfinite(v)) {
    fail(ErrorCode::kParse, "line " + std::to_string(line_no) +
                                ": invalid number '" + token + "'");
  }
  return v;
}

json vec_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) {
    fail(ErrorCode::kInvalidConfig, "expected a 3-element array");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json matrix_to_json(const Matrix<double>& m) {
  return {{"rows", m.rows()},
          {"cols", m.cols()},
          {"data", std::vector<double>(m.data().begin(), m.data().end())}};
}

Matrix<double> matrix_from_json(const json& j) {
  return Matrix<double>(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                        j.at("data").get<std::vector<double>>());
}

json linear_to_json(const LinearParams<double>& p) {
  json j = {{"weight", matrix_to_json(p.weight)}};
  if (p.has_bias()) j["bias"] = matrix_to_json(p.bias);
  return j;
}

LinearParams<double> linear_from_json(const json& j) {
  LinearParams<double> p;
  p.weight = matrix_from_json(j.at("weight"));
  if (j.contains("bias")) p.bias = matrix_from_json(j.at("bias"));
  return p;
}

json offsetnet_json(const OffsetNetParams<double>& p) {
  // The output layer is bias-free; only its weight is stored.
  return {{"w1", linear_to_json(p.w1)}, {"w2", {{"weight", matrix_to_json(p.w2)}}}};
}

json block_to_json(const ProxyBlockParams<double>& b) {
  return {{"wq", linear_to_json(b.wq)},
          {"wk", linear_to_json(b.wk)},
          {"wv", linear_to_json(b.wv)},
          {"wp", linear_to_json(b.wp)},
          {"ffn1", linear_to_json(b.ffn1)},
          {"ffn2", linear_to_json(b.ffn2)},
          {"bias",
           {{"c", b.bias.geo.c},
            {"bd", matrix_to_json(b.bias.bd)},
            {"bc", matrix_to_json(b.bias.bc)},
            {"br", matrix_to_json(b.bias.br)}}}};
}

ProxyBlockParams<double> block_from_json(const json& j) {
  ProxyBlockParams<double> b;
  b.wq = linear_from_json(j.at("wq"));
  b.wk = linear_from_json(j.at("wk"));
  b.wv = linear_from_json(j.at("wv"));
  b.wp = linear_from_json(j.at("wp"));
  b.ffn1 = linear_from_json(j.at("ffn1"));
  b.ffn2 = linear_from_json(j.at("ffn2"));
  const json& bias = j.at("bias");
  b.bias.geo = bias_geometry(bias.at("c").get<std::size_t>());
  b.bias.bd = matrix_from_json(bias.at("bd"));
  b.bias.bc = matrix_from_json(bias.at("bc"));
  b.bias.br = matrix_from_json(bias.at("br"));
  return b;
}

json breakdown_json(const FlopsBreakdown& b) {
  return {{"projections", b.projections},
          {"attention_core", b.attention_core},
          {"ffn", b.ffn},
          {"bias", b.bias},
          {"total", b.total()}};
}

json flops_json(const FlopsReport& r) {
  json j = {{"variant", std::string(to_string(r.config.variant))},
            {"n_seq", r.config.n_seq},
            {"n_proxy", r.config.n_proxy},
            {"c", r.config.c},
            {"ffn_mult", r.config.ffn_mult},
            {"layers", r.config.layers},
            {"per_block", breakdown_json(r.per_block)},
            {"total", breakdown_json(r.total)}};
  if (r.params) {
    j["params"] = *r.params;
    j["params_per_block"] = {{"projections", r.params_per_block->projections},
                             {"ffn", r.params_per_block->ffn},
                             {"bias", r.params_per_block->bias}};
  } else {
    j["params"] = nullptr;
  }
  return j;
}

json scene_to_json(const SceneSpec& s) {
  json blobs = json::array();
  for (const Blob& b : s.blobs) {
    blobs.push_back({{"center", vec_to_json(b.center)}, {"sigma", b.sigma},
                     {"points", b.points}});
  }
  return {{"total_points", s.total_points}, {"blobs", blobs},
          {"slab_min", vec_to_json(s.slab_min)}, {"slab_max", vec_to_json(s.slab_max)},
          {"noise_sigma", s.noise_sigma}};
}

SceneSpec scene_from_json(const json& j) {
  static const char* kKeys[] = {"total_points", "blobs", "slab_min", "slab_max",
                                "noise_sigma"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys)) {
      fail(ErrorCode::kInvalidConfig, "unknown scene key '" + key + "'");
    }
  }
  SceneSpec s;
  if (j.contains("total_points")) s.total_points = j["total_points"].get<std::size_t>();
  if (j.contains("blobs")) {
    s.blobs.clear();
    for (const json& b : j["blobs"]) {
      s.blobs.push_back({vec_from_json(b.at("center")), b.at("sigma").get<double>(),
                         b.at("points").get<std::size_t>()});
    }
  } else {
    s.blobs = SceneSpec::desk(s.total_points).blobs;
  }
  if (j.contains("slab_min")) s.slab_min = vec_from_json(j["slab_min"]);
  if (j.contains("slab_max")) s.slab_max = vec_from_json(j["slab_max"]);
  if (j.contains("noise_sigma")) s.noise_sigma = j["noise_sigma"].get<double>();
  return s;
}

json config_json(const PipelineConfig& c) {
  return {{"grid_counts", c.grid_counts},
          {"offset_bound", c.offset_bound},
          {"beta", c.beta},
          {"drop_method", c.drop_method == DropMethod::kFps ? "fps" : "random"},
          {"gamma", c.gamma == Gamma::kBall ? "ball" : "knn"},
          {"m", c.m},
          {"radius", c.radius ? json(*c.radius) : json(nullptr)},
          {"width", c.width},
          {"c_off", c.c_off},
          {"ffn_mult", c.ffn_mult},
          {"layers", c.layers},
          {"n_text_proxies", c.n_text_proxies},
          {"n_views", c.n_views},
          {"tokens_per_view", c.tokens_per_view},
          {"seed", c.seed},
          {"precision", c.precision == Precision::kFloat64 ? "f64" : "f32"},
          {"unscaled_logits", c.unscaled_logits},
          {"literal_transform_head", c.literal_transform_head},
          {"threads", c.threads},
          {"head_init_std", c.head_init_std},
          {"scene", scene_to_json(c.scene)}};
}

PipelineConfig config_from(const json& j) {
  if (!j.is_object()) fail(ErrorCode::kInvalidConfig, "config must be a JSON object");
  const json defaults = config_json(PipelineConfig{});
  for (const auto& [key, _] : j.items()) {
    if (!defaults.contains(key)) fail(ErrorCode::kInvalidConfig, "unknown config key '" + key + "'");
  }
  PipelineConfig c;
  auto get = [&](const char* key, auto& out) {
    if (j.contains(key)) out = j[key].get<std::decay_t<decltype(out)>>();
  };
  get("grid_counts", c.grid_counts);
  get("offset_bound", c.offset_bound);
  get("beta", c.beta);
  if (j.contains("drop_method")) {
    const auto v = j["drop_method"].get<std::string>();
    if (v != "random" && v != "fps") fail(ErrorCode::kInvalidConfig, "drop_method must be random or fps");
    c.drop_method = v == "fps" ? DropMethod::kFps : DropMethod::kRandom;
  }
  if (j.contains("gamma")) {
    const auto v = j["gamma"].get<std::string>();
    if (v != "knn" && v != "ball") fail(ErrorCode::kInvalidConfig, "gamma must be knn or ball");
    c.gamma = v == "ball" ? Gamma::kBall : Gamma::kKnn;
  }
  get("m", c.m);
  if (j.contains("radius") && !j["radius"].is_null()) c.radius = j["radius"].get<double>();
  get("width", c.width);
  get("c_off", c.c_off);
  get("ffn_mult", c.ffn_mult);
  get("layers", c.layers);
  get("n_text_proxies", c.n_text_proxies);
  get("n_views", c.n_views);
  get("tokens_per_view", c.tokens_per_view);
  get("seed", c.seed);
  if (j.contains("precision")) {
    const auto v = j["precision"].get<std::string>();
    if (v != "f32" && v != "f64") fail(ErrorCode::kInvalidConfig, "precision must be f32 or f64");
    c.precision = v == "f64" ? Precision::kFloat64 : Precision::kFloat32;
  }
  get("unscaled_logits", c.unscaled_logits);
  get("literal_transform_head", c.literal_transform_head);
  get("threads", c.threads);
  get("head_init_std", c.head_init_std);
  if (j.contains("scene")) c.scene = scene_from_json(j["scene"]);
  c.validate();
  return c;
}

json parse_json(std::string_view text, const std::string& origin) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kParse, origin + ": " + e.what());
  }
}

}  // namespace

CloudFormat format_from_path(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".ply" || ext == ".PLY") return CloudFormat::kPly;
  if (ext == ".csv" || ext == ".CSV") return CloudFormat::kCsv;
  fail(ErrorCode::kInvalidArgument, "cannot infer cloud format from '" + path.string() + "'");
}

std::string format_ply(const PointCloud& cloud) {
  std::string out;
  out += "ply\nformat ascii 1.0\n";
  out += "element vertex " + std::to_string(cloud.size()) + "\n";
  out += "property float x\nproperty float y\nproperty float z\nend_header\n";
  for (const Vec3& p : cloud.points) {
    out += format_coord(p.x) + " " + format_coord(p.y) + " " + format_coord(p.z) + "\n";
  }
  return out;
}

std::string format_csv(const PointCloud& cloud) {
  std::string out = "x,y,z\n";
  for (const Vec3& p : cloud.points) {
    out += format_coord(p.x) + "," + format_coord(p.y) + "," + format_coord(p.z) + "\n";
  }
  return out;
}

PointCloud parse_ply(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty() || lines[0] != "ply") fail(ErrorCode::kParse, "line 1: missing 'ply' magic");
  std::size_t i = 1;
  std::size_t count = 0;
  bool in_vertex = false;
  bool seen_format = false;
  std::vector<std::string> props;
  for (; i < lines.size(); ++i) {
    std::istringstream ss(lines[i]);
    std::string word;
    ss >> word;
    if (word == "end_header") break;
    if (word == "comment" || word == "obj_info" || word.empty()) continue;
    if (word == "format") {
      std::string kind, version;
      ss >> kind >> version;
      if (kind != "ascii") {
        fail(ErrorCode::kParse, "line " + std::to_string(i + 1) + ": only ascii PLY is supported");
      }
      seen_format = true;
    } else if (word == "element") {
      std::string name;
      ss >> name >> count;
      in_vertex = name == "vertex";
      if (!in_vertex && props.empty()) {
        fail(ErrorCode::kParse, "line " + std::to_string(i + 1) + ": vertex element must come first");
      }
    } else if (word == "property") {
      if (!in_vertex) continue;
      std::string type, name;
      ss >> type >> name;
      if (type == "list") {
        fail(ErrorCode::kParse, "line " + std::to_string(i + 1) + ": list vertex properties unsupported");
      }
      props.push_back(name);
    } else {
      fail(ErrorCode::kParse, "line " + std::to_string(i + 1) + ": unexpected '" + word + "'");
    }
  }
  if (i == lines.size()) fail(ErrorCode::kParse, "missing end_header");
  if (!seen_format) fail(ErrorCode::kParse, "missing format line");
  auto column = [&](const char* name) {
    const auto it = std::find(props.begin(), props.end(), name);
    if (it == props.end()) fail(ErrorCode::kParse, std::string("missing vertex property ") + name);
    return static_cast<std::size_t>(it - props.begin());
  };
  const std::size_t cx = column("x"), cy = column("y"), cz = column("z");
  // Re-read the vertex count: `count` may have been overwritten by a later
  // element declaration.
  std::size_t vertices = 0;
  for (std::size_t h = 1; h < i; ++h) {
    std::istringstream ss(lines[h]);
    std::string word, name;
    ss >> word >> name;
    if (word == "element" && name == "vertex") ss >> vertices;
  }
  if (lines.size() < i + 1 + vertices) fail(ErrorCode::kParse, "fewer vertex rows than declared");
  PointCloud cloud;
  cloud.points.reserve(vertices);
  for (std::size_t v = 0; v < vertices; ++v) {
    const std::size_t line_no = i + 2 + v;
    std::istringstream ss(lines[i + 1 + v]);
    std::vector<std::string> tokens;
    std::string tok;
    while (ss >> tok) tokens.push_back(tok);
    if (tokens.size() != props.size()) {
      fail(ErrorCode::kParse, "line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(props.size()) + " values");
    }
    cloud.points.push_back({parse_number(tokens[cx], line_no), parse_number(tokens[cy], line_no),
                            parse_number(tokens[cz], line_no)});
  }
  return cloud;
}

PointCloud parse_csv(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty() || lines[0] != "x,y,z") fail(ErrorCode::kParse, "line 1: expected header 'x,y,z'");
  PointCloud cloud;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::vector<std::string> cells;
    std::stringstream ss(lines[i]);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 3) {
      fail(ErrorCode::kParse, "line " + std::to_string(i + 1) + ": expected 3 columns");
    }
    cloud.points.push_back({parse_number(cells[0], i + 1), parse_number(cells[1], i + 1),
                            parse_number(cells[2], i + 1)});
  }
  return cloud;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) fail(ErrorCode::kIo, "read failed for '" + path.string() + "'");
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) fail(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

void export_cloud(const PointCloud& cloud, const std::filesystem::path& path,
                  CloudFormat format) {
  write_text_file(path, format == CloudFormat::kPly ? format_ply(cloud) : format_csv(cloud));
}

void export_cloud(const PointCloud& cloud, const std::filesystem::path& path) {
  export_cloud(cloud, path, format_from_path(path));
}

PointCloud import_cloud(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return format_from_path(path) == CloudFormat::kPly ? parse_ply(text) : parse_csv(text);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void export_labels(const std::vector<int>& labels, const std::filesystem::path& path) {
  std::string out = "index,label\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out += std::to_string(i) + "," + std::to_string(labels[i]) + "\n";
  }
  write_text_file(path, out);
}

PipelineConfig config_from_json(std::string_view text) {
  const json j = parse_json(text, "config");
  try {
    return config_from(j);
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidConfig, std::string("config: ") + e.what());
  }
}

std::string config_to_json(const PipelineConfig& cfg) {
  return config_json(cfg).dump(2) + "\n";
}

PipelineConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return config_from_json(text);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void save_config(const PipelineConfig& cfg, const std::filesystem::path& path) {
  write_text_file(path, config_to_json(cfg));
}

void apply_env_overrides(PipelineConfig& cfg) {
  const char* raw = std::getenv("PROXYFORM_SEED");
  if (raw == nullptr) return;
  const std::string text(raw);
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (text.empty() || text[0] == '-' || end != text.c_str() + text.size() || errno == ERANGE) {
    fail(ErrorCode::kInvalidConfig, "PROXYFORM_SEED must be an unsigned 64-bit integer");
  }
  cfg.seed = v;
}

std::string config_hash(const PipelineConfig& cfg) {
  const std::string canonical = config_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

std::string flops_report_to_json(const FlopsReport& report) {
  return flops_json(report).dump(2) + "\n";
}

std::string comparison_to_json(const VariantComparison& cmp) {
  json j = {{"self", flops_json(cmp.self)},
            {"cross", flops_json(cmp.cross)},
            {"proxy", flops_json(cmp.proxy)},
            {"block_reduction", cmp.block_reduction()},
            {"core_reduction", cmp.core_reduction()}};
  return j.dump(2) + "\n";
}

std::string report_to_json(const RunReport& r, bool include_timing) {
  json stages = json::array();
  json timing = json::object();
  for (const auto& s : r.stages) {
    stages.push_back({{"name", s.name}, {"flops", s.flops}});
    timing[s.name] = s.millis;
  }
  json j = {{"seed", r.seed},
            {"config_hash", r.config_hash},
            {"clusters_total", r.clusters_total},
            {"clusters_kept", r.clusters_kept},
            {"offset_bound_scene", r.offset_bound_scene},
            {"mean_offset_norm", r.mean_offset_norm},
            {"cloud",
             {{"points", r.stats.points},
              {"moved", r.stats.moved},
              {"mean_displacement", r.stats.mean_displacement},
              {"max_displacement", r.stats.max_displacement},
              {"bounds_min", vec_to_json(r.stats.bounds.min)},
              {"bounds_max", vec_to_json(r.stats.bounds.max)}}},
            {"stages", stages},
            {"total_flops", r.total_flops()},
            {"text_stack", flops_json(r.text_stack)},
            {"image_stack", flops_json(r.image_stack)}};
  if (include_timing) j["timing_ms"] = timing;
  return j.dump(2) + "\n";
}

void save_report(const RunReport& report, const std::filesystem::path& path,
                 bool include_timing) {
  write_text_file(path, report_to_json(report, include_timing));
}

std::string offsetnet_to_json(const OffsetNetParams<double>& params) {
  return offsetnet_json(params).dump();
}

std::string checkpoint_to_json(const Model& model) {
  json text = json::array();
  json image = json::array();
  for (const auto& b : model.text_blocks) text.push_back(block_to_json(b));
  for (const auto& b : model.image_blocks) image.push_back(block_to_json(b));
  json j = {{"format", "proxyform-checkpoint"},
            {"version", 1},
            {"offsetnet", offsetnet_json(model.offsetnet)},
            {"pointnet", linear_to_json(model.pointnet)},
            {"text_blocks", text},
            {"image_blocks", image},
            {"view_score", linear_to_json(model.view_score)},
            {"heads",
             {{"u_text", linear_to_json(model.heads.u_text)},
              {"u_image", linear_to_json(model.heads.u_image)}}}};
  return j.dump() + "\n";
}

Model checkpoint_from_json(std::string_view text) {
  const json j = parse_json(text, "checkpoint");
  try {
    if (j.at("format") != "proxyform-checkpoint" || j.at("version") != 1) {
      fail(ErrorCode::kInvalidConfig, "checkpoint: unsupported format or version");
    }
    Model m;
    const json& on = j.at("offsetnet");
    m.offsetnet.w1 = linear_from_json(on.at("w1"));
    if (on.at("w2").contains("bias")) {
      fail(ErrorCode::kInvalidConfig, "checkpoint: offset output layer must not carry a bias");
    }
    m.offsetnet.w2 = matrix_from_json(on.at("w2").at("weight"));
    m.pointnet = linear_from_json(j.at("pointnet"));
    for (const json& b : j.at("text_blocks")) m.text_blocks.push_back(block_from_json(b));
    for (const json& b : j.at("image_blocks")) m.image_blocks.push_back(block_from_json(b));
    m.view_score = linear_from_json(j.at("view_score"));
    m.heads.u_text = linear_from_json(j.at("heads").at("u_text"));
    m.heads.u_image = linear_from_json(j.at("heads").at("u_image"));
    return m;
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidConfig, std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Model& model, const std::filesystem::path& path) {
  write_text_file(path, checkpoint_to_json(model));
}

Model load_checkpoint(const std::filesystem::path& path) {
  return checkpoint_from_json(read_text_file(path));
}

}  // namespace proxyform
