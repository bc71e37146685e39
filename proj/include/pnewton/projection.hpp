#pragma once

#include <string>
#include <variant>

#include <Eigen/Core>

namespace pnewton {

/// Clamp eigenvalues to at least eps (eps >= 0).
struct EigClamp {
  double eps = 0.0;
};
/// Replace each eigenvalue by its absolute value.
struct EigAbs {};
/// Add max(0, -lambda_min) * I.
struct LocalShift {};
/// Leave the matrix untouched.
struct NoProjection {};

using ProjectionStrategy = std::variant<EigClamp, EigAbs, LocalShift, NoProjection>;

/// Short descriptor, e.g. "abs", "clamp(0.001)".
std::string describe(const ProjectionStrategy& strategy);

/// Throws std::invalid_argument on a negative clamp threshold.
void validate(const ProjectionStrategy& strategy);

struct ProjectionReport {
  int negative_count = 0;  // eigenvalues < -1e-12 * ||H|| before filtering
  double min_eig_before = 0.0;
  double min_eig_after = 0.0;
};

struct ProjectionResult {
  Eigen::MatrixXd matrix;
  ProjectionReport report;
};

/// Filters the spectrum of the symmetric part (H + H^T)/2.
/// Throws std::invalid_argument on non-finite input.
ProjectionResult project_symmetric(const Eigen::MatrixXd& H, const ProjectionStrategy& strategy);

/// Number of eigenvalues below -1e-12 * ||H||_F.
int count_negative_eigenvalues(const Eigen::MatrixXd& H);

}  // namespace pnewton
