// Command-line front end for the projected-Newton benchmark harness.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "pnewton/bench.hpp"

using namespace pnewton;
using namespace pnewton::bench;

namespace {

struct Overrides {
  std::string config_path;
  std::string out;
  std::optional<double> youngs;
  std::optional<double> poisson;
  std::string model;
  std::optional<int> max_iters;
  std::optional<int> threads;
  bool no_warp = false;
  std::vector<std::string> strategies;
};

void add_config_flags(CLI::App* cmd, Overrides& o, bool strategies_flag = true) {
  cmd->add_option("--config", o.config_path, "JSON scenario config")->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--E", o.youngs, "Young's modulus");
  cmd->add_option("--nu", o.poisson, "Poisson's ratio");
  cmd->add_option("--model", o.model, "material model: snh, nh_log, arap, sd");
  cmd->add_option("--max-iters", o.max_iters, "Newton iteration cap");
  cmd->add_option("--threads", o.threads, "element-loop threads (0 = auto)");
  cmd->add_flag("--no-warp", o.no_warp, "start free vertices at rest instead of warping them");
  if (strategies_flag)
    cmd->add_option("--strategies", o.strategies, "strategy list, e.g. abs clamp clamp:1e-3 global_shift");
}

BenchConfig resolve(const Overrides& o) {
  BenchConfig cfg;
  if (!o.config_path.empty()) cfg = load_config(o.config_path);
  else cfg.strategies = {ProjectionStrategy{EigAbs{}}, ProjectionStrategy{EigClamp{0.0}}};
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (o.youngs) cfg.material.youngs = *o.youngs;
  if (o.poisson) cfg.material.poisson = *o.poisson;
  if (!o.model.empty()) cfg.material.model = parse_material_model(o.model);
  if (o.max_iters) cfg.settings.max_iters = *o.max_iters;
  if (o.threads) cfg.settings.threads = *o.threads;
  if (o.no_warp) cfg.warp_free_vertices = false;
  if (!o.strategies.empty()) {
    cfg.strategies.clear();
    for (const auto& s : o.strategies) cfg.strategies.push_back(parse_strategy(s));
  }
  if (!(cfg.material.youngs > 0.0)) throw ConfigError("material.E", "must be > 0");
  if (!(cfg.material.poisson > 0.0 && cfg.material.poisson < 0.5))
    throw ConfigError("material.nu", "must lie in (0, 0.5)");
  validate(cfg.settings);
  return cfg;
}

void print_summary(const RunSummary& s) {
  std::printf("%-24s %6s  %-20s %s\n", "strategy", "iters", "status", "speedup");
  for (const auto& row : s.rows)
    std::printf("%-24s %6d  %-20s %s\n", row.strategy.c_str(), row.iterations, row.status.c_str(),
                row.speedup ? std::to_string(*row.speedup).c_str() : "-");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Projected-Newton quasi-static solver with per-element eigenvalue filtering"};
  app.require_subcommand(1);

  Overrides run_o, cmp_o, sweep_o, info_o;
  std::string run_strategy;
  auto* run = app.add_subcommand("run", "solve one strategy and write <out>/<strategy>.csv");
  add_config_flags(run, run_o, false);
  run->add_option("--strategy", run_strategy, "strategy (default: first in config)");

  auto* compare = app.add_subcommand("compare", "run every strategy on the same scenario");
  add_config_flags(compare, cmp_o);

  std::string toy_strategy = "abs", toy_out;
  std::optional<double> toy_eps;
  double toy_tol = 1e-10;
  int toy_iters = 200;
  auto* toy = app.add_subcommand("toy2d", "two-variable example trajectory as CSV");
  toy->add_option("--strategy", toy_strategy, "abs, clamp, local_shift or none");
  toy->add_option("--eps", toy_eps, "clamp threshold");
  toy->add_option("--tol", toy_tol, "decrement tolerance");
  toy->add_option("--max-iters", toy_iters, "iteration cap");
  toy->add_option("--out", toy_out, "CSV path (default: stdout)");

  std::string sweep_axis;
  std::vector<double> sweep_values;
  auto* sweep = app.add_subcommand("sweep", "compare strategies across nu, stretch_factor or resolution");
  add_config_flags(sweep, sweep_o);
  sweep->add_option("--axis", sweep_axis, "nu | stretch_factor | resolution")->required();
  sweep->add_option("--values", sweep_values, "strictly increasing values")->required();

  std::array<int, 3> gen_cells{2, 2, 6};
  std::array<double, 3> gen_dims{1.0, 1.0, 3.0};
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-mesh", "write a beam as TetGen .node/.ele");
  gen->add_option("--cells", gen_cells, "cells along x y z");
  gen->add_option("--dims", gen_dims, "extent along x y z");
  gen->add_option("--out", gen_out, "output stem (writes <stem>.node and <stem>.ele)")->required();

  std::string info_mesh;
  auto* info = app.add_subcommand("mesh-info", "print mesh statistics");
  info->add_option("--mesh", info_mesh, "TetGen stem");
  info->add_option("--config", info_o.config_path, "JSON scenario config")->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      BenchConfig cfg = resolve(run_o);
      const Strategy strategy = run_strategy.empty() ? cfg.strategies.front() : parse_strategy(run_strategy);
      RunOutcome outcome;
      const int code = cmd_run(cfg, strategy, &outcome);
      if (outcome.report)
        std::printf("%s: %s after %d iterations, energy %.9g\n", outcome.strategy.c_str(),
                    outcome.status().c_str(), outcome.report->iterations(), outcome.report->final_energy);
      else
        std::fprintf(stderr, "%s: %s\n", outcome.strategy.c_str(), outcome.error.c_str());
      return code;
    }
    if (*compare) {
      const RunSummary s = cmd_compare(resolve(cmp_o));
      print_summary(s);
      return 0;
    }
    if (*toy) {
      ProjectionStrategy strategy;
      if (toy_strategy == "clamp") strategy = EigClamp{toy_eps.value_or(1e-3)};
      else {
        const Strategy parsed = parse_strategy(toy_strategy);
        if (!std::holds_alternative<ProjectionStrategy>(parsed))
          throw std::invalid_argument("toy2d supports per-element strategies only");
        strategy = std::get<ProjectionStrategy>(parsed);
      }
      toy2d::ToyRun r;
      if (toy_out.empty()) {
        r = cmd_toy2d(strategy, std::cout, toy_tol, toy_iters);
      } else {
        std::ofstream f(toy_out);
        if (!f) throw std::runtime_error("cannot write " + toy_out);
        r = cmd_toy2d(strategy, f, toy_tol, toy_iters);
        std::printf("%s: %s after %d iterations\n", describe(strategy).c_str(),
                    std::string(to_string(r.status)).c_str(), r.iterations());
      }
      return exit_code(r.status);
    }
    if (*sweep) {
      BenchConfig cfg = resolve(sweep_o);
      const auto rows = cmd_sweep(cfg, parse_sweep_axis(sweep_axis), sweep_values);
      write_sweep_csv(std::cout, rows);
      return 0;
    }
    if (*gen) {
      const TetMesh mesh = generate_beam(gen_cells[0], gen_cells[1], gen_cells[2],
                                         Vec3(gen_dims[0], gen_dims[1], gen_dims[2]));
      const TetgenText text = write_tetgen(mesh);
      std::ofstream(gen_out + ".node") << text.node;
      std::ofstream(gen_out + ".ele") << text.ele;
      std::printf("wrote %s.node/.ele: %zu vertices, %zu tets\n", gen_out.c_str(), mesh.num_vertices(),
                  mesh.num_tets());
      return 0;
    }
    if (*info) {
      TetMesh mesh;
      if (!info_mesh.empty()) mesh = load_tetgen_files(info_mesh);
      else mesh = build_mesh(resolve(info_o));
      const auto [lo, hi] = mesh.bounds();
      double vmin = mesh.num_tets() ? mesh.rest_volume().front() : 0.0;
      for (double v : mesh.rest_volume()) vmin = std::min(vmin, v);
      std::printf("vertices %zu\ntets %zu\nvolume %.12g\nmin_tet_volume %.6g\nbounds [%g %g %g] - [%g %g %g]\n",
                  mesh.num_vertices(), mesh.num_tets(), mesh.total_volume(), vmin, lo.x(), lo.y(), lo.z(),
                  hi.x(), hi.y(), hi.z());
      return 0;
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
