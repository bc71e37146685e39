#include "pnewton/toy2d.hpp"

#include <cmath>
#include <stdexcept>

namespace pnewton::toy2d {

namespace {

const Eigen::Vector2d kCenters[2] = {Eigen::Vector2d(-1.0, 0.0), Eigen::Vector2d(1.0, 0.0)};

Eigen::Vector2d to_vec(const ToyState& p) { return {p.x, p.y}; }

void require_off_center(const ToyState& p) {
  for (const auto& c : kCenters)
    if ((to_vec(p) - c).norm() == 0.0)
      throw std::invalid_argument("toy2d: derivatives are undefined at a circle center");
}

}  // namespace

double toy_f(const ToyState& p) {
  double f = 0.0;
  for (const auto& c : kCenters) {
    const double r = (to_vec(p) - c).norm() - 1.0;
    f += r * r;
  }
  return f;
}

Eigen::Vector2d toy_grad(const ToyState& p) {
  require_off_center(p);
  Eigen::Vector2d g = Eigen::Vector2d::Zero();
  for (const auto& c : kCenters) {
    const Eigen::Vector2d q = to_vec(p) - c;
    const double r = q.norm();
    g += 2.0 * (r - 1.0) * q / r;
  }
  return g;
}

Eigen::Matrix2d toy_hess(const ToyState& p) {
  require_off_center(p);
  Eigen::Matrix2d H = Eigen::Matrix2d::Zero();
  for (const auto& c : kCenters) {
    const Eigen::Vector2d q = to_vec(p) - c;
    const double r = q.norm();
    const Eigen::Vector2d n = q / r;
    const Eigen::Matrix2d nn = n * n.transpose();
    // d2/dp2 (r - 1)^2 = 2 [n n^T + (1 - 1/r)(I - n n^T)]
    H += 2.0 * (nn + (1.0 - 1.0 / r) * (Eigen::Matrix2d::Identity() - nn));
  }
  return H;
}

ToyRun run_toy_newton(const ToyState& start, const ProjectionStrategy& strategy, double tol,
                      int max_iters, const SolveSettings& settings) {
  ToyRun run;
  Eigen::VectorXd x(2);
  x << start.x, start.y;
  double f = toy_f(start);
  run.trajectory.push_back({0, start, f});

  auto energy = [](const Eigen::VectorXd& v) { return toy_f({v(0), v(1)}); };
  for (int iter = 0;; ++iter) {
    const ToyState p{x(0), x(1)};
    const Eigen::VectorXd g = toy_grad(p);
    if (g.cwiseAbs().maxCoeff() == 0.0) {
      run.status = SolveStatus::Converged;
      return run;
    }
    const Eigen::MatrixXd H = project_symmetric(toy_hess(p), strategy).matrix;
    const DirectionResult dir = newton_direction(H.sparseView(), g);
    if (!dir.ok) {
      run.status = SolveStatus::FactorizationFailure;
      return run;
    }
    const double slope = g.dot(dir.direction);
    const double decrement = -0.5 * slope;
    if (decrement >= 0.0 && decrement < tol) {
      run.status = SolveStatus::Converged;
      return run;
    }
    if (iter == max_iters) {
      run.status = SolveStatus::MaxIters;
      return run;
    }
    if (!(slope < 0.0)) {
      run.status = SolveStatus::LineSearchFailure;
      return run;
    }
    const LineSearchResult ls = backtracking_line_search(energy, x, dir.direction, g, f, settings);
    if (!ls.ok) {
      run.status = SolveStatus::LineSearchFailure;
      return run;
    }
    x += ls.alpha * dir.direction;
    f = ls.energy;
    run.trajectory.push_back({iter + 1, {x(0), x(1)}, f});
  }
}

}  // namespace pnewton::toy2d
