#pragma once

#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Sparse>

#include "pnewton/scenario.hpp"

namespace pnewton {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Maps the 3n position coordinates to free (non-handle) DOF indices.
class DofMap {
 public:
  DofMap(std::size_t num_vertices, const std::vector<int>& handles);

  int num_free() const { return num_free_; }
  /// Free index of coordinate `coord` (3 * vertex + axis), or -1 if pinned.
  int free_index(int coord) const { return free_index_[coord]; }

  Eigen::VectorXd restrict(const Eigen::VectorXd& full) const;
  /// Adds `free` into the free coordinates of `full`.
  void add_to(Eigen::VectorXd& full, const Eigen::VectorXd& free) const;

 private:
  std::vector<int> free_index_;
  int num_free_ = 0;
};

/// Sum over tets of rest_volume * psi(F). +inf propagates.
double total_energy(const Scenario& scenario, const Eigen::VectorXd& positions, int threads = 1);

/// Energy gradient restricted to the free DOFs.
Eigen::VectorXd total_gradient(const Scenario& scenario, const Eigen::VectorXd& positions,
                               int threads = 1);

struct AssembledHessian {
  SparseMatrix matrix;          // free DOFs only, full symmetric storage
  int negative_element_count = 0;  // elements whose raw Hessian was indefinite
};

/// Scatter-adds per-element Hessians filtered by `strategy`. Throws
/// std::runtime_error naming the element when a block is non-finite.
AssembledHessian assemble_projected_hessian(const Scenario& scenario,
                                            const Eigen::VectorXd& positions,
                                            const ProjectionStrategy& strategy, int threads = 1);

struct DirectionResult {
  Eigen::VectorXd direction;
  bool ok = false;
  int factorizations = 0;
  double shift = 0.0;  // diagonal boost that made the factorization succeed
};

/// Solves H d = -g by sparse Cholesky. On failure retries with
/// H + beta * mean(diag) * I, beta = 1e-10 doubling up to 1e-2.
DirectionResult newton_direction(const SparseMatrix& H, const Eigen::VectorXd& g);

struct LineSearchResult {
  bool ok = false;
  double alpha = 0.0;
  double energy = 0.0;
  int evaluations = 0;
};

/// Armijo backtracking over alpha in {1, s, s^2, ...}. Non-finite trial
/// energies and steps that do not strictly lower the energy (for example
/// when x + alpha d rounds back to x) are rejected; a direction
/// with g^T d >= 0 fails without evaluating the energy.
LineSearchResult backtracking_line_search(const std::function<double(const Eigen::VectorXd&)>& energy,
                                          const Eigen::VectorXd& x, const Eigen::VectorXd& d,
                                          const Eigen::VectorXd& g, double energy_at_x,
                                          const SolveSettings& settings);

enum class SolveStatus { Converged, MaxIters, LineSearchFailure, FactorizationFailure };
std::string_view to_string(SolveStatus status);

struct IterationRecord {
  int iter = 0;
  double energy = 0.0;     // after the accepted step
  double decrement = 0.0;  // -0.5 d^T g of the step taken
  double step_size = 0.0;
  int negative_element_count = 0;
  double wall_ms = 0.0;
};

struct SolveReport {
  std::vector<IterationRecord> records;
  SolveStatus status = SolveStatus::MaxIters;
  Eigen::VectorXd final_positions;
  double initial_energy = 0.0;
  double final_energy = 0.0;
  double final_decrement = 0.0;  // decrement at final_positions, NaN if not computed
  double tolerance = 0.0;
  int factorizations = 0;
  double total_wall_ms = 0.0;

  int iterations() const { return static_cast<int>(records.size()); }
};

/// Projected-Newton solve with the scenario's settings. Dispatches to
/// run_global_strategy for global strategies.
SolveReport run_quasistatic(const Scenario& scenario);

/// Global-level variants (GlobalShift, GlobalAbs, OnDemand). Throws
/// std::invalid_argument when GlobalAbs exceeds global_abs_dof_cap or the
/// strategy is not global.
SolveReport run_global_strategy(const Scenario& scenario);

}  // namespace pnewton
