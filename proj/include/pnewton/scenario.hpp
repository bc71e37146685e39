#pragma once

#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "pnewton/deformation.hpp"
#include "pnewton/material.hpp"
#include "pnewton/mesh.hpp"
#include "pnewton/projection.hpp"

namespace pnewton {

/// Add beta * mean(diag) * I to the unprojected global Hessian, growing
/// beta until the factorization succeeds (beta = 0 is tried first).
struct GlobalShift {
  double beta0 = 1e-6;
  double growth = 10.0;
};
/// Dense eigendecomposition of the global Hessian with |lambda| filtering.
struct GlobalAbs {};
/// Use the exact Hessian whenever it factorizes, else per-element fallback.
struct OnDemand {
  ProjectionStrategy fallback = EigAbs{};
};

using GlobalStrategy = std::variant<GlobalShift, GlobalAbs, OnDemand>;
using Strategy = std::variant<ProjectionStrategy, GlobalStrategy>;

std::string describe(const GlobalStrategy& strategy);
std::string describe(const Strategy& strategy);

struct SolveSettings {
  int max_iters = 200;
  double tol_scale = 1e-5;  // converged when -0.5 d^T g < tol_scale * lambda
  double ls_c = 1e-4;
  double ls_shrink = 0.5;
  int ls_max_backtracks = 64;
  Strategy strategy = ProjectionStrategy{EigAbs{}};
  int global_abs_dof_cap = 3000;
  int threads = 1;  // 0 = hardware concurrency
};

/// Throws std::invalid_argument when a setting is out of range.
void validate(const SolveSettings& settings);

/// A mesh with pinned handle vertices and a warm-start configuration.
struct Scenario {
  TetMesh mesh;
  std::vector<int> handles;            // sorted, unique
  std::vector<Vec3> handle_targets;    // parallel to handles
  std::vector<Vec3> initial_positions; // one per vertex
  MaterialParams material = MaterialParams::make(1.0, 1.0);
  SolveSettings settings;
};

/// Builds and validates a scenario: selects handles, applies the transform.
Scenario make_scenario(TetMesh mesh, const std::vector<int>& handles,
                       const DeformationTransform& transform, const MaterialParams& material,
                       const SolveSettings& settings, bool warp_free_vertices = true);

/// Checks the scenario invariants (non-empty handles, targets consistent
/// with initial positions). Throws std::invalid_argument.
void validate(const Scenario& scenario);

/// Initial positions flattened to a 3n vector.
Eigen::VectorXd initial_vector(const Scenario& scenario);

}  // namespace pnewton
