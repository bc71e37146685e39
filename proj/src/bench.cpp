#include "pnewton/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pnewton/util.hpp"

namespace pnewton::bench {

using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void check_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  for (const auto& [key, _] : obj.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError(path.empty() ? key : path + "." + key, "unknown field");
}

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

double get_number(const json& obj, const std::string& path, std::string_view key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(std::string(key));
  if (!v.is_number()) throw ConfigError(join(path, key), "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(join(path, key), "must be finite");
  return d;
}

int get_int(const json& obj, const std::string& path, std::string_view key, int fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(std::string(key));
  if (!v.is_number_integer()) throw ConfigError(join(path, key), "expected an integer");
  return v.get<int>();
}

bool get_bool(const json& obj, const std::string& path, std::string_view key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(std::string(key));
  if (!v.is_boolean()) throw ConfigError(join(path, key), "expected a boolean");
  return v.get<bool>();
}

int parse_axis(const json& v, const std::string& path) {
  if (v.is_number_integer()) {
    const int a = v.get<int>();
    if (a >= 0 && a <= 2) return a;
  } else if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "x") return 0;
    if (s == "y") return 1;
    if (s == "z") return 2;
  }
  throw ConfigError(path, "expected an axis (\"x\", \"y\", \"z\" or 0-2)");
}

int get_axis(const json& obj, const std::string& path, std::string_view key, int fallback) {
  return obj.contains(key) ? parse_axis(obj.at(std::string(key)), join(path, key)) : fallback;
}

Vec3 parse_vec3(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3) throw ConfigError(path, "expected an array of 3 numbers");
  Vec3 out;
  for (int i = 0; i < 3; ++i) {
    if (!v[i].is_number()) throw ConfigError(path, "expected an array of 3 numbers");
    out[i] = v[i].get<double>();
  }
  if (!out.allFinite()) throw ConfigError(path, "must be finite");
  return out;
}

MeshSource parse_mesh(const json& obj, const std::string& path) {
  if (obj.contains("file")) {
    check_keys(obj, path, {"file"});
    if (!obj["file"].is_string()) throw ConfigError(join(path, "file"), "expected a string");
    return FileSource{obj["file"].get<std::string>()};
  }
  check_keys(obj, path, {"generator", "cells", "dims"});
  if (obj.contains("generator") && obj["generator"] != "beam")
    throw ConfigError(join(path, "generator"), "only \"beam\" is supported");
  BeamSource beam;
  if (obj.contains("cells")) {
    const json& c = obj["cells"];
    if (!c.is_array() || c.size() != 3) throw ConfigError(join(path, "cells"), "expected 3 integers");
    for (int i = 0; i < 3; ++i) {
      if (!c[i].is_number_integer() || c[i].get<int>() < 1)
        throw ConfigError(join(path, "cells"), "cell counts must be integers >= 1");
      beam.cells[i] = c[i].get<int>();
    }
  }
  if (obj.contains("dims")) {
    beam.dims = parse_vec3(obj["dims"], join(path, "dims"));
    if (!(beam.dims.array() > 0.0).all()) throw ConfigError(join(path, "dims"), "extents must be > 0");
  }
  return beam;
}

std::pair<DeformationTransform, PivotChoice> parse_transform(const json& obj, const std::string& path) {
  if (!obj.is_object() || !obj.contains("type") || !obj["type"].is_string())
    throw ConfigError(join(path, "type"), "transform needs a string \"type\"");
  const std::string type = obj["type"].get<std::string>();
  PivotChoice pivot;
  auto read_pivot = [&] {
    if (!obj.contains("pivot")) return;
    const json& p = obj["pivot"];
    if (p == "center") pivot.kind = PivotChoice::Kind::Center;
    else if (p == "origin") pivot.kind = PivotChoice::Kind::Origin;
    else {
      pivot.kind = PivotChoice::Kind::Point;
      pivot.point = parse_vec3(p, join(path, "pivot"));
    }
  };
  auto factor = [&](std::string_view key) {
    const double f = get_number(obj, path, key, 1.0);
    if (!(f > 0.0)) throw ConfigError(join(path, key), "must be > 0");
    return f;
  };

  DeformationTransform t;
  if (type == "stretch") {
    check_keys(obj, path, {"type", "axis", "factor"});
    t = Stretch{get_axis(obj, path, "axis", 2), factor("factor")};
  } else if (type == "compress") {
    check_keys(obj, path, {"type", "axis", "factor"});
    t = Compress{get_axis(obj, path, "axis", 2), factor("factor")};
  } else if (type == "shear") {
    check_keys(obj, path, {"type", "shear_axis", "along_axis", "amount"});
    t = Shear{get_axis(obj, path, "shear_axis", 0), get_axis(obj, path, "along_axis", 2),
              get_number(obj, path, "amount", 0.0)};
  } else if (type == "twist") {
    check_keys(obj, path, {"type", "axis", "angle", "pivot"});
    read_pivot();
    t = Twist{get_axis(obj, path, "axis", 2), get_number(obj, path, "angle", 0.0), Vec3::Zero()};
  } else if (type == "bend") {
    check_keys(obj, path, {"type", "axis", "bend_axis", "angle", "pivot"});
    read_pivot();
    t = Bend{get_axis(obj, path, "axis", 2), get_axis(obj, path, "bend_axis", 0),
             get_number(obj, path, "angle", 0.0), Vec3::Zero()};
  } else if (type == "translate") {
    check_keys(obj, path, {"type", "offset"});
    t = Translate{obj.contains("offset") ? parse_vec3(obj["offset"], join(path, "offset")) : Vec3::Zero()};
  } else if (type == "identity") {
    check_keys(obj, path, {"type", "axis"});
    t = Stretch{get_axis(obj, path, "axis", 2), 1.0};
  } else {
    throw ConfigError(join(path, "type"), "unknown transform '" + type + "'");
  }
  try {
    validate(t);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
  return {t, pivot};
}

VertexPredicate parse_predicate(const json& obj, const std::string& path) {
  check_keys(obj, path, {"axis", "cmp", "fraction"});
  VertexPredicate p;
  p.axis = get_axis(obj, path, "axis", 2);
  const std::string cmp = obj.value("cmp", std::string(">="));
  if (cmp == "<=") p.cmp = Comparison::LessEqual;
  else if (cmp == ">=") p.cmp = Comparison::GreaterEqual;
  else throw ConfigError(join(path, "cmp"), "expected \"<=\" or \">=\"");
  p.fraction = get_number(obj, path, "fraction", 1.0);
  if (!(p.fraction >= 0.0 && p.fraction <= 1.0)) throw ConfigError(join(path, "fraction"), "must lie in [0, 1]");
  return p;
}

Strategy parse_strategy_json(const json& v, const std::string& path) {
  if (v.is_string()) {
    try {
      return parse_strategy(v.get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(path, e.what());
    }
  }
  if (!v.is_object() || !v.contains("type") || !v["type"].is_string())
    throw ConfigError(path, "expected a strategy name or an object with \"type\"");
  const std::string type = v["type"].get<std::string>();
  if (type == "clamp") {
    check_keys(v, path, {"type", "eps"});
    const double eps = get_number(v, path, "eps", 0.0);
    if (!(eps >= 0.0)) throw ConfigError(join(path, "eps"), "must be >= 0");
    return ProjectionStrategy{EigClamp{eps}};
  }
  if (type == "global_shift") {
    check_keys(v, path, {"type", "beta0", "growth"});
    GlobalShift g;
    g.beta0 = get_number(v, path, "beta0", g.beta0);
    g.growth = get_number(v, path, "growth", g.growth);
    if (!(g.beta0 > 0.0)) throw ConfigError(join(path, "beta0"), "must be > 0");
    if (!(g.growth > 1.0)) throw ConfigError(join(path, "growth"), "must be > 1");
    return GlobalStrategy{g};
  }
  if (type == "on_demand") {
    check_keys(v, path, {"type", "fallback"});
    OnDemand o;
    if (v.contains("fallback")) {
      const Strategy fb = parse_strategy_json(v["fallback"], join(path, "fallback"));
      if (!std::holds_alternative<ProjectionStrategy>(fb))
        throw ConfigError(join(path, "fallback"), "fallback must be a per-element strategy");
      o.fallback = std::get<ProjectionStrategy>(fb);
    }
    return GlobalStrategy{o};
  }
  check_keys(v, path, {"type"});
  try {
    return parse_strategy(type);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(join(path, "type"), e.what());
  }
}

void parse_settings(const json& obj, const std::string& path, SolveSettings& s) {
  check_keys(obj, path,
             {"max_iters", "tol_scale", "ls_c", "ls_shrink", "ls_max_backtracks", "global_abs_dof_cap", "threads"});
  s.max_iters = get_int(obj, path, "max_iters", s.max_iters);
  s.tol_scale = get_number(obj, path, "tol_scale", s.tol_scale);
  s.ls_c = get_number(obj, path, "ls_c", s.ls_c);
  s.ls_shrink = get_number(obj, path, "ls_shrink", s.ls_shrink);
  s.ls_max_backtracks = get_int(obj, path, "ls_max_backtracks", s.ls_max_backtracks);
  s.global_abs_dof_cap = get_int(obj, path, "global_abs_dof_cap", s.global_abs_dof_cap);
  s.threads = get_int(obj, path, "threads", s.threads);
  if (s.max_iters < 1) throw ConfigError(join(path, "max_iters"), "must be >= 1");
  if (!(s.tol_scale >= 0.0)) throw ConfigError(join(path, "tol_scale"), "must be >= 0");
  if (!(s.ls_c > 0.0 && s.ls_c < 1.0)) throw ConfigError(join(path, "ls_c"), "must lie in (0, 1)");
  if (!(s.ls_shrink > 0.0 && s.ls_shrink < 1.0)) throw ConfigError(join(path, "ls_shrink"), "must lie in (0, 1)");
  if (s.ls_max_backtracks < 0) throw ConfigError(join(path, "ls_max_backtracks"), "must be >= 0");
  if (s.global_abs_dof_cap < 0) throw ConfigError(join(path, "global_abs_dof_cap"), "must be >= 0");
  if (s.threads < 0) throw ConfigError(join(path, "threads"), "must be >= 0");
}

int transform_axis(const DeformationTransform& t) {
  return std::visit(Overloaded{
                        [](const Stretch& s) { return s.axis; },
                        [](const Compress& c) { return c.axis; },
                        [](const Shear& s) { return s.along_axis; },
                        [](const Twist& t) { return t.axis; },
                        [](const Bend& b) { return b.axis; },
                        [](const Translate&) { return 2; },
                    },
                    t);
}

DeformationTransform with_pivot(DeformationTransform t, const Vec3& pivot) {
  if (auto* tw = std::get_if<Twist>(&t)) tw->pivot = pivot;
  if (auto* b = std::get_if<Bend>(&t)) b->pivot = pivot;
  return t;
}

std::optional<double> median(std::vector<double> v) {
  if (v.empty()) return std::nullopt;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string opt_num(const std::optional<double>& v, bool full = true) {
  if (!v || !std::isfinite(*v)) return "";
  return full ? num(*v) : short_num(*v);
}

void open_for_write(std::ofstream& out, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out.open(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

Strategy parse_strategy(std::string_view text) {
  const std::string s(text);
  if (s == "abs") return ProjectionStrategy{EigAbs{}};
  if (s == "none" || s == "newton") return ProjectionStrategy{NoProjection{}};
  if (s == "local_shift") return ProjectionStrategy{LocalShift{}};
  if (s == "clamp") return ProjectionStrategy{EigClamp{0.0}};
  if (s.rfind("clamp:", 0) == 0) {
    const std::string arg = s.substr(6);
    char* end = nullptr;
    const double eps = std::strtod(arg.c_str(), &end);
    if (arg.empty() || end != arg.c_str() + arg.size() || !(eps >= 0.0) || !std::isfinite(eps))
      throw std::invalid_argument("clamp threshold must be a number >= 0 in '" + s + "'");
    return ProjectionStrategy{EigClamp{eps}};
  }
  if (s == "global_shift") return GlobalStrategy{GlobalShift{}};
  if (s == "global_abs") return GlobalStrategy{GlobalAbs{}};
  if (s == "on_demand") return GlobalStrategy{OnDemand{}};
  if (s.rfind("on_demand:", 0) == 0) {
    const Strategy fb = parse_strategy(s.substr(10));
    if (!std::holds_alternative<ProjectionStrategy>(fb))
      throw std::invalid_argument("on_demand fallback must be a per-element strategy");
    return GlobalStrategy{OnDemand{std::get<ProjectionStrategy>(fb)}};
  }
  throw std::invalid_argument("unknown strategy '" + s + "'");
}

std::string strategy_slug(const Strategy& strategy) {
  std::string out;
  for (char c : describe(strategy)) {
    if (c == '(') out += '_';
    else if (c != ')') out += c;
  }
  return out;
}

BenchConfig parse_config(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  check_keys(root, "",
             {"mesh", "transform", "handles", "material", "strategies", "settings", "output", "warp_free_vertices",
              "seed"});
  BenchConfig cfg;
  if (root.contains("mesh")) cfg.mesh = parse_mesh(root["mesh"], "mesh");
  if (root.contains("transform")) std::tie(cfg.transform, cfg.pivot) = parse_transform(root["transform"], "transform");
  if (root.contains("handles")) {
    const json& h = root["handles"];
    if (!h.is_array()) throw ConfigError("handles", "expected an array of predicates");
    for (std::size_t i = 0; i < h.size(); ++i)
      cfg.handles.push_back(parse_predicate(h[i], "handles[" + std::to_string(i) + "]"));
  }
  if (root.contains("material")) {
    const json& m = root["material"];
    check_keys(m, "material", {"E", "nu", "model"});
    cfg.material.youngs = get_number(m, "material", "E", cfg.material.youngs);
    cfg.material.poisson = get_number(m, "material", "nu", cfg.material.poisson);
    if (m.contains("model")) {
      if (!m["model"].is_string()) throw ConfigError("material.model", "expected a string");
      try {
        cfg.material.model = parse_material_model(m["model"].get<std::string>());
      } catch (const std::invalid_argument& e) {
        throw ConfigError("material.model", e.what());
      }
    }
  }
  if (!(cfg.material.youngs > 0.0)) throw ConfigError("material.E", "must be > 0");
  if (!(cfg.material.poisson > 0.0 && cfg.material.poisson < 0.5))
    throw ConfigError("material.nu", "must lie in (0, 0.5)");

  if (!root.contains("strategies")) throw ConfigError("strategies", "required");
  const json& strategies = root["strategies"];
  if (!strategies.is_array() || strategies.empty()) throw ConfigError("strategies", "expected a non-empty array");
  for (std::size_t i = 0; i < strategies.size(); ++i)
    cfg.strategies.push_back(parse_strategy_json(strategies[i], "strategies[" + std::to_string(i) + "]"));

  if (root.contains("settings")) parse_settings(root["settings"], "settings", cfg.settings);
  if (root.contains("output")) {
    if (!root["output"].is_string()) throw ConfigError("output", "expected a string");
    cfg.output_dir = root["output"].get<std::string>();
  }
  cfg.warp_free_vertices = get_bool(root, "", "warp_free_vertices", true);
  if (root.contains("seed")) {
    if (!root["seed"].is_number_unsigned()) throw ConfigError("seed", "expected a non-negative integer");
    cfg.seed = root["seed"].get<std::uint64_t>();
  }
  return cfg;
}

BenchConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

TetMesh build_mesh(const BenchConfig& config) {
  return std::visit(Overloaded{
                        [](const BeamSource& b) {
                          return generate_beam(b.cells[0], b.cells[1], b.cells[2], b.dims);
                        },
                        [](const FileSource& f) { return load_tetgen_files(f.stem); },
                    },
                    config.mesh);
}

std::vector<VertexPredicate> effective_handles(const BenchConfig& config) {
  if (!config.handles.empty()) return config.handles;
  const int axis = transform_axis(config.transform);
  return {{axis, Comparison::LessEqual, 0.0}, {axis, Comparison::GreaterEqual, 1.0}};
}

Scenario build_scenario(const BenchConfig& config, const Strategy& strategy) {
  TetMesh mesh = build_mesh(config);
  const std::vector<int> handles = select_vertices(mesh, effective_handles(config));
  const auto [lo, hi] = mesh.bounds();
  Vec3 pivot = Vec3::Zero();
  if (config.pivot.kind == PivotChoice::Kind::Center) pivot = 0.5 * (lo + hi);
  if (config.pivot.kind == PivotChoice::Kind::Point) pivot = config.pivot.point;

  const Lame lame = lame_from_young_poisson(config.material.youngs, config.material.poisson);
  SolveSettings settings = config.settings;
  settings.strategy = strategy;
  return make_scenario(std::move(mesh), handles, with_pivot(config.transform, pivot),
                       MaterialParams::make(lame.mu, lame.lambda, config.material.model), settings,
                       config.warp_free_vertices);
}

void write_iteration_csv(std::ostream& out, const SolveReport& report) {
  out << "iter,energy,decrement,step_size,negative_elements,wall_ms\n";
  for (const IterationRecord& r : report.records) {
    if (!std::isfinite(r.energy) || !std::isfinite(r.decrement) || !std::isfinite(r.step_size)) {
      out << "# iter=" << r.iter << " non-finite record\n";
      continue;
    }
    out << r.iter << ',' << num(r.energy) << ',' << num(r.decrement) << ',' << num(r.step_size) << ','
        << r.negative_element_count << ',' << short_num(r.wall_ms) << '\n';
  }
  out << "# status=" << to_string(report.status) << '\n';
}

int exit_code(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return 0;
    case SolveStatus::MaxIters: return 2;
    case SolveStatus::LineSearchFailure:
    case SolveStatus::FactorizationFailure: return 3;
  }
  return 3;
}

std::string RunOutcome::status() const {
  return report ? std::string(to_string(report->status)) : error.substr(0, error.find(':'));
}

namespace {

RunOutcome solve_one(const BenchConfig& config, const Strategy& strategy) {
  RunOutcome out;
  out.strategy = describe(strategy);
  try {
    out.report = run_quasistatic(build_scenario(config, strategy));
  } catch (const std::invalid_argument& e) {
    out.error = std::string("invalid-argument: ") + e.what();
  } catch (const std::exception& e) {
    out.error = std::string("error: ") + e.what();
  }
  return out;
}

void write_outcome_csv(const std::filesystem::path& path, const RunOutcome& outcome) {
  std::ofstream f;
  open_for_write(f, path);
  if (outcome.report) {
    write_iteration_csv(f, *outcome.report);
  } else {
    f << "iter,energy,decrement,step_size,negative_elements,wall_ms\n";
    f << "# status=" << outcome.error << '\n';
  }
}

SummaryRow summarize(const RunOutcome& outcome) {
  SummaryRow row;
  row.strategy = outcome.strategy;
  row.status = outcome.status();
  if (outcome.report) {
    row.iterations = outcome.report->iterations();
    if (std::isfinite(outcome.report->final_energy)) row.final_energy = outcome.report->final_energy;
    row.wall_ms = outcome.report->total_wall_ms;
  }
  return row;
}

std::vector<std::string> unique_slugs(const std::vector<Strategy>& strategies) {
  std::vector<std::string> slugs;
  std::set<std::string> seen;
  for (const auto& s : strategies) {
    std::string slug = strategy_slug(s);
    for (int k = 2; seen.count(slug); ++k) slug = strategy_slug(s) + "_" + std::to_string(k);
    seen.insert(slug);
    slugs.push_back(slug);
  }
  return slugs;
}

RunSummary compare_into(const BenchConfig& config, const std::filesystem::path& dir) {
  const std::vector<std::string> slugs = unique_slugs(config.strategies);
  RunSummary summary;
  for (std::size_t i = 0; i < config.strategies.size(); ++i) {
    const RunOutcome outcome = solve_one(config, config.strategies[i]);
    write_outcome_csv(dir / (slugs[i] + ".csv"), outcome);
    summary.rows.push_back(summarize(outcome));
  }
  std::vector<double> speedups;
  const SummaryRow& base = summary.rows.front();
  for (std::size_t i = 0; i < summary.rows.size(); ++i) {
    SummaryRow& row = summary.rows[i];
    row.speedup = speedup(base, row);
    if (row.speedup && base.wall_ms > 0.0 && row.wall_ms > 0.0) row.wall_speedup = base.wall_ms / row.wall_ms;
    if (i > 0 && row.speedup) speedups.push_back(*row.speedup);
  }
  if (!speedups.empty()) {
    double sum = 0.0;
    for (double s : speedups) sum += s;
    summary.mean_speedup = sum / static_cast<double>(speedups.size());
    summary.median_speedup = median(speedups);
  }

  std::ofstream f;
  open_for_write(f, dir / "summary.csv");
  write_summary_csv(f, summary);
  std::ofstream timing;
  open_for_write(timing, dir / "timing.csv");
  timing << "strategy,wall_ms,wall_speedup\n";
  for (const SummaryRow& row : summary.rows)
    timing << row.strategy << ',' << short_num(row.wall_ms) << ',' << opt_num(row.wall_speedup, false) << '\n';
  return summary;
}

}  // namespace

int cmd_run(const BenchConfig& config, const Strategy& strategy, RunOutcome* outcome) {
  RunOutcome result = solve_one(config, strategy);
  write_outcome_csv(config.output_dir / (strategy_slug(strategy) + ".csv"), result);
  const int code = result.report ? exit_code(result.report->status) : 1;
  if (outcome) *outcome = std::move(result);
  return code;
}

std::optional<double> speedup(const SummaryRow& baseline, const SummaryRow& candidate) {
  if (baseline.status != "Converged" || candidate.status != "Converged") return std::nullopt;
  if (candidate.iterations == 0) return baseline.iterations == 0 ? std::optional<double>(1.0) : std::nullopt;
  return static_cast<double>(baseline.iterations) / candidate.iterations;
}

RunSummary cmd_compare(const BenchConfig& config) {
  if (config.strategies.size() < 2) throw std::invalid_argument("compare needs at least two strategies");
  return compare_into(config, config.output_dir);
}

void write_summary_csv(std::ostream& out, const RunSummary& summary) {
  out << "strategy,iterations,status,final_energy,speedup\n";
  for (const SummaryRow& row : summary.rows)
    out << row.strategy << ',' << row.iterations << ',' << row.status << ',' << opt_num(row.final_energy) << ','
        << opt_num(row.speedup, false) << '\n';
  out << "# baseline=" << (summary.rows.empty() ? "" : summary.rows.front().strategy) << '\n';
  out << "# mean_speedup=" << opt_num(summary.mean_speedup, false) << '\n';
  out << "# median_speedup=" << opt_num(summary.median_speedup, false) << '\n';
}

toy2d::ToyRun cmd_toy2d(const ProjectionStrategy& strategy, std::ostream& csv, double tol, int max_iters,
                        toy2d::ToyState start) {
  const toy2d::ToyRun run = toy2d::run_toy_newton(start, strategy, tol, max_iters);
  csv << "iter,x,y,f\n";
  for (const auto& pt : run.trajectory) {
    if (!std::isfinite(pt.p.x) || !std::isfinite(pt.p.y) || !std::isfinite(pt.f)) {
      csv << "# iter=" << pt.iter << " non-finite state\n";
      continue;
    }
    csv << pt.iter << ',' << num(pt.p.x) << ',' << num(pt.p.y) << ',' << num(pt.f) << '\n';
  }
  csv << "# status=" << to_string(run.status) << '\n';
  return run;
}

SweepAxis parse_sweep_axis(std::string_view name) {
  if (name == "nu") return SweepAxis::Nu;
  if (name == "stretch_factor") return SweepAxis::StretchFactor;
  if (name == "resolution") return SweepAxis::Resolution;
  throw std::invalid_argument("unknown sweep axis '" + std::string(name) + "'");
}

namespace {
std::string_view axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::Nu: return "nu";
    case SweepAxis::StretchFactor: return "stretch_factor";
    case SweepAxis::Resolution: return "resolution";
  }
  return "?";
}

BenchConfig with_axis_value(const BenchConfig& base, SweepAxis axis, double value) {
  BenchConfig cfg = base;
  switch (axis) {
    case SweepAxis::Nu:
      if (!(value > 0.0 && value < 0.5)) throw std::invalid_argument("nu sweep values must lie in (0, 0.5)");
      cfg.material.poisson = value;
      break;
    case SweepAxis::StretchFactor:
      if (!(value > 0.0)) throw std::invalid_argument("stretch factors must be > 0");
      if (auto* s = std::get_if<Stretch>(&cfg.transform)) s->factor = value;
      else if (auto* c = std::get_if<Compress>(&cfg.transform)) c->factor = value;
      else throw std::invalid_argument("stretch_factor sweep needs a stretch or compress transform");
      break;
    case SweepAxis::Resolution: {
      auto* beam = std::get_if<BeamSource>(&cfg.mesh);
      if (!beam) throw std::invalid_argument("resolution sweep needs a generated beam");
      const int r = static_cast<int>(std::lround(value));
      if (r < 1 || std::abs(value - r) > 1e-12) throw std::invalid_argument("resolution values must be integers >= 1");
      for (int& c : beam->cells) c *= r;
      break;
    }
  }
  return cfg;
}
}  // namespace

std::vector<SweepRow> cmd_sweep(const BenchConfig& config, SweepAxis axis, const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("sweep needs at least one value");
  for (std::size_t i = 1; i < values.size(); ++i)
    if (!(values[i] > values[i - 1])) throw std::invalid_argument("sweep values must be strictly increasing");

  std::vector<SweepRow> rows;
  for (double value : values) {
    const BenchConfig cfg = with_axis_value(config, axis, value);
    const std::filesystem::path dir = config.output_dir / (std::string(axis_name(axis)) + "_" + short_num(value));
    const RunSummary summary = compare_into(cfg, dir);
    for (const SummaryRow& row : summary.rows)
      rows.push_back({value, row.strategy, row.iterations, row.status, row.final_energy});
  }
  std::ofstream f;
  open_for_write(f, config.output_dir / ("sweep_" + std::string(axis_name(axis)) + ".csv"));
  write_sweep_csv(f, rows);
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "axis_value,strategy,iterations,status,final_energy\n";
  for (const SweepRow& r : rows)
    out << short_num(r.axis_value) << ',' << r.strategy << ',' << r.iterations << ',' << r.status << ','
        << opt_num(r.final_energy) << '\n';
}

}  // namespace pnewton::bench
