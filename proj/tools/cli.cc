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

#include "cli.h"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "proxyform/error.h"
#include "proxyform/flops.h"
#include "proxyform/gradcheck_suite.h"
#include "proxyform/io.h"
#include "proxyform/pipeline.h"
#include "proxyform/scene.h"

namespace proxyform::cli {
namespace {

constexpr double kReferenceReduction = (8.36 - 4.97) / 8.36;

struct ConfigFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;

  void add_to(CLI::App* app) {
    app->add_option("--config", config, "pipeline config JSON")->check(CLI::ExistingFile);
    app->add_option("--seed", seed, "seed; overrides PROXYFORM_SEED and the config");
    app->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  }

  // Config file, then PROXYFORM_SEED, then explicit flags.
  PipelineConfig resolve() const {
    PipelineConfig cfg = config.empty() ? PipelineConfig{} : load_config(config);
    apply_env_overrides(cfg);
    if (seed) cfg.seed = *seed;
    if (threads) cfg.threads = *threads;
    cfg.validate();
    return cfg;
  }
};

std::string gflops(std::uint64_t flops) {
  return fmt::format("{:.4f}", static_cast<double>(flops) * 1e-9);
}

void print_comparison(std::ostream& out, const VariantComparison& cmp) {
  out << fmt::format("n_seq={} n_proxy={} C={} ffn_mult={} layers={}\n",
                     cmp.proxy.config.n_seq, cmp.proxy.config.n_proxy, cmp.proxy.config.c,
                     cmp.proxy.config.ffn_mult, cmp.proxy.config.layers);
  out << fmt::format("{:<8}{:>14}{:>14}{:>14}{:>14}{:>14}{:>12}\n", "variant", "proj GF",
                     "core GF", "ffn GF", "bias GF", "total GF", "params");
  for (const FlopsReport* r : {&cmp.self, &cmp.cross, &cmp.proxy}) {
    out << fmt::format("{:<8}{:>14}{:>14}{:>14}{:>14}{:>14}{:>12}\n",
                       to_string(r->config.variant), gflops(r->total.projections),
                       gflops(r->total.attention_core), gflops(r->total.ffn),
                       gflops(r->total.bias), gflops(r->total.total()),
                       r->params ? std::to_string(*r->params) : std::string("n/a"));
  }
  out << fmt::format("block reduction (proxy vs self): {:.3f}%\n", 100.0 * cmp.block_reduction());
  out << fmt::format("attention-core reduction:        {:.3f}%\n", 100.0 * cmp.core_reduction());
}

int cmd_gen_scene(const ConfigFlags& flags, std::optional<std::size_t> points,
                  const std::string& out_path, const std::string& labels_path,
                  std::ostream& out) {
  const PipelineConfig cfg = flags.resolve();
  SceneSpec spec = cfg.scene;
  if (points) spec = SceneSpec::desk(*points);
  const Scene scene = gen_scene(spec, cfg.seed);
  export_cloud(scene.cloud, out_path);
  if (!labels_path.empty()) export_labels(scene.labels, labels_path);
  out << fmt::format("wrote {} points to {}\n", scene.cloud.size(), out_path);
  return kExitOk;
}

struct EnhanceFlags {
  std::string in;
  std::string out;
  std::string report;
  std::string precision;
  bool no_timing = false;
};

int cmd_enhance(const ConfigFlags& flags, const EnhanceFlags& e, std::ostream& out) {
  PipelineConfig cfg = flags.resolve();
  if (e.precision == "f64") cfg.precision = Precision::kFloat64;
  if (e.precision == "f32") cfg.precision = Precision::kFloat32;
  const PointCloud cloud = e.in.empty() ? gen_scene(cfg.scene, cfg.seed).cloud : import_cloud(e.in);
  const EnhanceResult result = enhance(cfg, cloud);
  export_cloud(result.cloud, e.out);
  if (!e.report.empty()) save_report(result.report, e.report, !e.no_timing);
  const RunReport& r = result.report;
  out << fmt::format("enhanced {} points: kept {}/{} clusters, moved {}, {} GFLOPs\n",
                     r.stats.points, r.clusters_kept, r.clusters_total, r.stats.moved,
                     gflops(r.total_flops()));
  return kExitOk;
}

struct FlopsFlags {
  int grid = 12;
  double beta = 0.6;
  std::uint64_t c = 256;
  std::uint64_t proxies = 32;
  std::uint64_t layers = 3;
  std::uint64_t ffn_mult = 4;
  std::optional<std::uint64_t> seq;
  bool json = false;
  bool sweep = false;
};

int cmd_flops(const FlopsFlags& f, std::ostream& out) {
  if (f.sweep) {
    const auto sweep = overhead_sweep(f.layers);
    const SweepPoint best = closest_sweep_point(sweep, kReferenceReduction);
    if (f.json) {
      out << comparison_to_json(compare_variants(best.config));
      return kExitOk;
    }
    out << fmt::format("{:>6}{:>6}{:>8}{:>6}{:>12}\n", "n_seq", "C", "n_proxy", "ffn",
                       "reduction");
    for (const SweepPoint& p : sweep) {
      out << fmt::format("{:>6}{:>6}{:>8}{:>6}{:>11.3f}%\n", p.config.n_seq, p.config.c,
                         p.config.n_proxy, p.config.ffn_mult, 100.0 * p.block_reduction);
    }
    out << fmt::format("closest to {:.3f}%:\n", 100.0 * kReferenceReduction);
    print_comparison(out, compare_variants(best.config));
    return kExitOk;
  }
  FlopsConfig base;
  const auto cells = static_cast<std::uint64_t>(f.grid) * f.grid * f.grid;
  base.n_seq = f.seq ? *f.seq : kept_count(cells, f.beta);
  base.n_proxy = f.proxies;
  base.c = f.c;
  base.ffn_mult = f.ffn_mult;
  base.layers = f.layers;
  const VariantComparison cmp = compare_variants(base);
  if (f.json) {
    out << comparison_to_json(cmp);
  } else {
    print_comparison(out, cmp);
  }
  return kExitOk;
}

int cmd_gradcheck(const GradCheckSuiteOptions& opts, double tolerance, std::ostream& out,
                  std::ostream& err) {
  const GradCheckSuiteResult result = run_gradcheck_suite(opts);
  out << fmt::format("{:<18}{:>10}{:>12}{:>14}{:>10}\n", "group", "instances", "coords",
                     "max rel err", "seconds");
  for (const GradCheckGroup& g : result.groups) {
    out << fmt::format("{:<18}{:>10}{:>12}{:>14.3e}{:>10.2f}\n", g.name, g.instances,
                       g.coordinates, g.max_rel_error, g.seconds);
  }
  if (!result.passed(tolerance)) {
    err << fmt::format("gradcheck failed: max relative error {:.3e} > {:.1e}\n",
                       result.max_rel_error(), tolerance);
    return kExitRuntime;
  }
  out << fmt::format("ok: max relative error {:.3e} <= {:.1e}\n", result.max_rel_error(),
                     tolerance);
  return kExitOk;
}

struct BenchFlags {
  std::optional<std::size_t> points;
  std::optional<std::size_t> width;
  std::optional<std::size_t> layers;
  int repeats = 3;
};

int cmd_bench(const ConfigFlags& flags, const BenchFlags& b, std::ostream& out) {
  PipelineConfig cfg = flags.resolve();
  if (b.points) cfg.scene = SceneSpec::desk(*b.points);
  if (b.width) cfg.width = *b.width;
  if (b.layers) cfg.layers = *b.layers;
  cfg.validate();
  const PointCloud cloud = gen_scene(cfg.scene, cfg.seed).cloud;
  const Proxies proxies = default_proxies(cfg);
  const Model model = init_model(cfg);

  std::vector<RunReport> runs;
  std::vector<double> totals;
  for (int r = 0; r < b.repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    runs.push_back(enhance(cfg, cloud, proxies, model).report);
    totals.push_back(std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - start)
                         .count());
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };
  out << fmt::format("points={} C={} layers={} threads={} repeats={}\n", cloud.size(),
                     cfg.width, cfg.layers, cfg.threads, b.repeats);
  out << fmt::format("{:<18}{:>12}{:>14}\n", "stage", "median ms", "GFLOPs");
  for (std::size_t s = 0; s < runs.front().stages.size(); ++s) {
    std::vector<double> ms;
    for (const RunReport& r : runs) ms.push_back(r.stages[s].millis);
    const StageStats& st = runs.front().stages[s];
    out << fmt::format("{:<18}{:>12.2f}{:>14}\n", st.name, median(ms), gflops(st.flops));
  }
  out << fmt::format("{:<18}{:>12.2f}{:>14}\n", "total", median(totals),
                     gflops(runs.front().total_flops()));
  return kExitOk;
}

struct ExportFlags {
  std::string in;
  std::string out;
  std::string checkpoint;
  std::string config_out;
};

int cmd_export(const ConfigFlags& flags, const ExportFlags& e, std::ostream& out) {
  if (e.in.empty() != e.out.empty()) {
    throw CLI::ValidationError("export", "--in and --out must be given together");
  }
  if (e.in.empty() && e.checkpoint.empty() && e.config_out.empty()) {
    throw CLI::ValidationError("export", "nothing to export; pass --in/--out, --checkpoint or --config-out");
  }
  if (!e.in.empty()) {
    const PointCloud cloud = import_cloud(e.in);
    export_cloud(cloud, e.out);
    out << fmt::format("converted {} points: {} -> {}\n", cloud.size(), e.in, e.out);
  }
  if (!e.checkpoint.empty() || !e.config_out.empty()) {
    const PipelineConfig cfg = flags.resolve();
    if (!e.config_out.empty()) {
      save_config(cfg, e.config_out);
      out << fmt::format("wrote config {} (hash {})\n", e.config_out, config_hash(cfg));
    }
    if (!e.checkpoint.empty()) {
      save_checkpoint(init_model(cfg), e.checkpoint);
      out << fmt::format("wrote initial checkpoint {}\n", e.checkpoint);
    }
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"proxyform: proxy-guided point cloud enhancement", "proxyform"};
  app.require_subcommand(1);

  ConfigFlags gen_cfg;
  std::optional<std::size_t> gen_points;
  std::string gen_out, gen_labels;
  auto* gen = app.add_subcommand("gen-scene", "generate a synthetic desk scene");
  gen_cfg.add_to(gen);
  gen->add_option("--points", gen_points, "total points (desk layout)")->check(CLI::PositiveNumber);
  gen->add_option("--out", gen_out, "output cloud (.ply or .csv)")->required();
  gen->add_option("--labels", gen_labels, "optional per-point label CSV");

  ConfigFlags enh_cfg;
  EnhanceFlags enh;
  auto* enh_cmd = app.add_subcommand("enhance", "run the enhancement pipeline");
  enh_cfg.add_to(enh_cmd);
  enh_cmd->add_option("--in", enh.in, "input cloud; defaults to the config scene")
      ->check(CLI::ExistingFile);
  enh_cmd->add_option("--out", enh.out, "enhanced cloud (.ply or .csv)")->required();
  enh_cmd->add_option("--report", enh.report, "run report JSON");
  enh_cmd->add_option("--precision", enh.precision, "f32 or f64")
      ->check(CLI::IsMember({"f32", "f64"}));
  enh_cmd->add_flag("--no-timing", enh.no_timing, "omit wall-clock timings from the report");

  FlopsFlags fl;
  auto* fl_cmd = app.add_subcommand("flops", "compare self/cross/proxy attention cost");
  fl_cmd->add_option("--grid", fl.grid, "grid cells per axis")->check(CLI::PositiveNumber);
  fl_cmd->add_option("--beta", fl.beta, "drop ratio")->check(CLI::Range(0.0, 0.999999));
  fl_cmd->add_option("--c", fl.c, "feature width")->check(CLI::PositiveNumber);
  fl_cmd->add_option("--proxies", fl.proxies, "proxy count")->check(CLI::PositiveNumber);
  fl_cmd->add_option("--layers", fl.layers, "blocks per stack")->check(CLI::PositiveNumber);
  fl_cmd->add_option("--ffn-mult", fl.ffn_mult, "FFN expansion")->check(CLI::PositiveNumber);
  fl_cmd->add_option("--seq", fl.seq, "sequence length; overrides grid/beta");
  fl_cmd->add_flag("--json", fl.json, "emit JSON");
  fl_cmd->add_flag("--sweep", fl.sweep, "search the documented sweep grid");

  GradCheckSuiteOptions gc;
  double gc_tol = 1e-5;
  auto* gc_cmd = app.add_subcommand("gradcheck", "verify analytic gradients");
  gc_cmd->add_option("--seed", gc.seed, "seed");
  gc_cmd->add_option("--instances", gc.instances, "instances per group")
      ->check(CLI::PositiveNumber);
  gc_cmd->add_option("--step", gc.step, "finite-difference step")->check(CLI::PositiveNumber);
  gc_cmd->add_option("--tol", gc_tol, "maximum relative error")->check(CLI::PositiveNumber);

  ConfigFlags bench_cfg;
  BenchFlags bench;
  auto* bench_cmd = app.add_subcommand("bench", "time the pipeline stage by stage");
  bench_cfg.add_to(bench_cmd);
  bench_cmd->add_option("--points", bench.points, "scene size")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--width", bench.width, "feature width C");
  bench_cmd->add_option("--layers", bench.layers, "blocks per stack");
  bench_cmd->add_option("--repeats", bench.repeats, "timed runs")->check(CLI::PositiveNumber);

  ConfigFlags exp_cfg;
  ExportFlags exp;
  auto* exp_cmd = app.add_subcommand("export", "convert clouds, write configs or checkpoints");
  exp_cfg.add_to(exp_cmd);
  exp_cmd->add_option("--in", exp.in, "cloud to convert")->check(CLI::ExistingFile);
  exp_cmd->add_option("--out", exp.out, "converted cloud");
  exp_cmd->add_option("--checkpoint", exp.checkpoint, "write the initial model as JSON");
  exp_cmd->add_option("--config-out", exp.config_out, "write the resolved config as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    err << "run with --help for usage\n";
    return kExitUsage;
  }

  try {
    if (*gen) return cmd_gen_scene(gen_cfg, gen_points, gen_out, gen_labels, out);
    if (*enh_cmd) return cmd_enhance(enh_cfg, enh, out);
    if (*fl_cmd) return cmd_flops(fl, out);
    if (*gc_cmd) return cmd_gradcheck(gc, gc_tol, out, err);
    if (*bench_cmd) return cmd_bench(bench_cfg, bench, out);
    if (*exp_cmd) return cmd_export(exp_cfg, exp, out);
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace proxyform::cli
