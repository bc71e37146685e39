#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pnewton/scenario.hpp"
#include "pnewton/solver.hpp"
#include "pnewton/toy2d.hpp"

namespace pnewton::bench {

/// Raised for malformed or out-of-range configuration. `path` names the
/// offending field, e.g. "material.nu".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct BeamSource {
  std::array<int, 3> cells{2, 2, 6};
  Vec3 dims{1.0, 1.0, 3.0};
};
struct FileSource {
  std::string stem;  // reads <stem>.node and <stem>.ele
};
using MeshSource = std::variant<BeamSource, FileSource>;

struct MaterialConfig {
  double youngs = 1e8;
  double poisson = 0.495;
  MaterialModel model = MaterialModel::StableNeoHookean;
};

/// Twist/bend pivot: the rest bounding-box center unless given explicitly.
struct PivotChoice {
  enum class Kind { Center, Origin, Point } kind = Kind::Center;
  Vec3 point = Vec3::Zero();
};

struct BenchConfig {
  MeshSource mesh = BeamSource{};
  DeformationTransform transform = Stretch{2, 3.0};
  PivotChoice pivot;
  std::vector<VertexPredicate> handles;  // empty: both end faces along the transform axis
  MaterialConfig material;
  std::vector<Strategy> strategies;
  SolveSettings settings;
  std::filesystem::path output_dir = "out";
  bool warp_free_vertices = true;
  std::uint64_t seed = 0;
};

/// Parses and validates a JSON config. Unknown fields are rejected.
BenchConfig parse_config(std::string_view json_text);
BenchConfig load_config(const std::filesystem::path& path);

/// Strategy descriptors: "abs", "clamp" (eps 0), "clamp:1e-3", "local_shift",
/// "none", "global_shift", "global_abs", "on_demand", "on_demand:clamp:0".
Strategy parse_strategy(std::string_view text);
std::string strategy_slug(const Strategy& strategy);

TetMesh build_mesh(const BenchConfig& config);
/// Handle predicates actually used (the defaults when none are configured).
std::vector<VertexPredicate> effective_handles(const BenchConfig& config);
Scenario build_scenario(const BenchConfig& config, const Strategy& strategy);

/// Per-iteration CSV: header, one row per record, trailing `# status=...`.
void write_iteration_csv(std::ostream& out, const SolveReport& report);

int exit_code(SolveStatus status);

struct RunOutcome {
  std::string strategy;
  std::optional<SolveReport> report;  // empty when the run was rejected
  std::string error;                  // e.g. "invalid-argument: ..."
  std::string status() const;
};

/// Solves one strategy and writes `<out>/<slug>.csv`. Returns the exit code
/// contract: 0 Converged, 2 MaxIters, 3 LineSearch/Factorization failure.
int cmd_run(const BenchConfig& config, const Strategy& strategy, RunOutcome* outcome = nullptr);

struct SummaryRow {
  std::string strategy;
  int iterations = 0;
  std::string status;
  std::optional<double> final_energy;
  double wall_ms = 0.0;
  std::optional<double> speedup;       // iterations(baseline) / iterations(this)
  std::optional<double> wall_speedup;  // reported only, hardware dependent
};

struct RunSummary {
  std::vector<SummaryRow> rows;  // rows[0] is the baseline
  std::optional<double> mean_speedup;    // over non-baseline rows with a speedup
  std::optional<double> median_speedup;
};

/// Speedup of a candidate over the baseline, defined only when both
/// converged; two zero-iteration runs count as 1.0.
std::optional<double> speedup(const SummaryRow& baseline, const SummaryRow& candidate);

/// Runs every strategy on the same scenario; writes per-strategy CSVs,
/// `summary.csv` (deterministic) and `timing.csv` (wall clock).
RunSummary cmd_compare(const BenchConfig& config);

void write_summary_csv(std::ostream& out, const RunSummary& summary);

/// Writes `iter,x,y,f` rows of the toy trajectory.
toy2d::ToyRun cmd_toy2d(const ProjectionStrategy& strategy, std::ostream& csv, double tol = 1e-10,
                        int max_iters = 200, toy2d::ToyState start = toy2d::kWhitePoint);

enum class SweepAxis { Nu, StretchFactor, Resolution };
SweepAxis parse_sweep_axis(std::string_view name);

struct SweepRow {
  double axis_value;
  std::string strategy;
  int iterations;
  std::string status;
  std::optional<double> final_energy;
};

/// One comparison per value; writes `<out>/sweep_<axis>.csv` in long form
/// (`axis_value,strategy,iterations,status,final_energy`).
std::vector<SweepRow> cmd_sweep(const BenchConfig& config, SweepAxis axis, const std::vector<double>& values);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace pnewton::bench
