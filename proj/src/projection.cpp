#include "pnewton/projection.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "pnewton/util.hpp"

namespace pnewton {

std::string describe(const ProjectionStrategy& strategy) {
  return std::visit(Overloaded{
                        [](const EigClamp& c) {
                          std::ostringstream ss;
                          ss << "clamp(" << c.eps << ")";
                          return ss.str();
                        },
                        [](const EigAbs&) { return std::string("abs"); },
                        [](const LocalShift&) { return std::string("local_shift"); },
                        [](const NoProjection&) { return std::string("none"); },
                    },
                    strategy);
}

void validate(const ProjectionStrategy& strategy) {
  if (const auto* c = std::get_if<EigClamp>(&strategy))
    if (!(c->eps >= 0.0) || !std::isfinite(c->eps))
      throw std::invalid_argument("clamp threshold must be >= 0");
}

namespace {
int count_below(const Eigen::VectorXd& eigenvalues, double norm) {
  int n = 0;
  for (double v : eigenvalues)
    if (v < -1e-12 * norm) ++n;
  return n;
}
}  // namespace

ProjectionResult project_symmetric(const Eigen::MatrixXd& H, const ProjectionStrategy& strategy) {
  validate(strategy);
  if (H.rows() != H.cols()) throw std::invalid_argument("project_symmetric: matrix must be square");
  if (!H.allFinite()) throw std::invalid_argument("project_symmetric: non-finite entries");

  const Eigen::MatrixXd S = 0.5 * (H + H.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
  const Eigen::VectorXd& lambda = eig.eigenvalues();  // ascending
  const Eigen::MatrixXd& U = eig.eigenvectors();

  ProjectionResult out;
  out.report.negative_count = count_below(lambda, S.norm());
  out.report.min_eig_before = lambda.size() ? lambda(0) : 0.0;

  Eigen::VectorXd filtered = lambda;
  std::visit(Overloaded{
                 [&](const EigClamp& c) {
                   filtered = lambda.cwiseMax(c.eps);
                   out.matrix = U * filtered.asDiagonal() * U.transpose();
                 },
                 [&](const EigAbs&) {
                   filtered = lambda.cwiseAbs();
                   out.matrix = U * filtered.asDiagonal() * U.transpose();
                 },
                 [&](const LocalShift&) {
                   const double tau = lambda.size() ? std::max(0.0, -lambda(0)) : 0.0;
                   filtered = lambda.array() + tau;
                   out.matrix = S;
                   out.matrix.diagonal().array() += tau;
                 },
                 [&](const NoProjection&) { out.matrix = H; },
             },
             strategy);
  if (!std::holds_alternative<NoProjection>(strategy))
    out.matrix = 0.5 * (out.matrix + out.matrix.transpose()).eval();
  out.report.min_eig_after = filtered.size() ? filtered.minCoeff() : 0.0;
  return out;
}

int count_negative_eigenvalues(const Eigen::MatrixXd& H) {
  if (!H.allFinite()) throw std::invalid_argument("count_negative_eigenvalues: non-finite entries");
  const Eigen::MatrixXd S = 0.5 * (H + H.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S, Eigen::EigenvaluesOnly);
  return count_below(eig.eigenvalues(), S.norm());
}

}  // namespace pnewton
