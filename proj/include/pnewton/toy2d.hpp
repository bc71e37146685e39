#pragma once

#include <vector>

#include <Eigen/Core>

#include "pnewton/projection.hpp"
#include "pnewton/scenario.hpp"
#include "pnewton/solver.hpp"

namespace pnewton::toy2d {

// f(x, y) = (|p - (-1, 0)| - 1)^2 + (|p - (1, 0)| - 1)^2
// Both circles pass through the origin, the unique global minimum. The
// distance terms are not differentiable at the centers (+-1, 0).

struct ToyState {
  double x = 0.0;
  double y = 0.0;
};

double toy_f(const ToyState& p);
/// Throws std::invalid_argument at a circle center.
Eigen::Vector2d toy_grad(const ToyState& p);
Eigen::Matrix2d toy_hess(const ToyState& p);

/// The point (1 - 1e-6, 1e-8), next to a circle center, where the Hessian
/// has a huge negative eigenvalue.
inline constexpr ToyState kWhitePoint{1.0 - 1e-6, 1e-8};

struct TrajectoryPoint {
  int iter = 0;
  ToyState p;
  double f = 0.0;
};

struct ToyRun {
  std::vector<TrajectoryPoint> trajectory;  // row 0 is the start
  SolveStatus status = SolveStatus::MaxIters;
  int iterations() const { return static_cast<int>(trajectory.size()) - 1; }
};

/// Projected Newton on the toy objective using the same line search and
/// decrement test as the FE solver; converged when -0.5 d^T g < tol.
ToyRun run_toy_newton(const ToyState& start, const ProjectionStrategy& strategy, double tol,
                      int max_iters, const SolveSettings& settings = {});

}  // namespace pnewton::toy2d
