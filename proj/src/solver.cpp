#include "pnewton/solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include "pnewton/util.hpp"

namespace pnewton {

DofMap::DofMap(std::size_t num_vertices, const std::vector<int>& handles)
    : free_index_(3 * num_vertices, 0) {
  for (int h : handles)
    for (int a = 0; a < 3; ++a) free_index_[3 * h + a] = -1;
  for (int& idx : free_index_)
    if (idx == 0) idx = num_free_++;
}

Eigen::VectorXd DofMap::restrict(const Eigen::VectorXd& full) const {
  Eigen::VectorXd out(num_free_);
  for (std::size_t c = 0; c < free_index_.size(); ++c)
    if (free_index_[c] >= 0) out(free_index_[c]) = full(static_cast<Eigen::Index>(c));
  return out;
}

void DofMap::add_to(Eigen::VectorXd& full, const Eigen::VectorXd& free) const {
  for (std::size_t c = 0; c < free_index_.size(); ++c)
    if (free_index_[c] >= 0) full(static_cast<Eigen::Index>(c)) += free(free_index_[c]);
}

double total_energy(const Scenario& scenario, const Eigen::VectorXd& positions, int threads) {
  const TetMesh& mesh = scenario.mesh;
  std::vector<double> energies(mesh.num_tets());
  parallel_for(mesh.num_tets(), threads, [&](std::size_t t) {
    energies[t] = element_energy(element_state(mesh, t, positions), scenario.material);
  });
  double total = 0.0;
  for (double e : energies) total += e;
  return total;
}

Eigen::VectorXd total_gradient(const Scenario& scenario, const Eigen::VectorXd& positions,
                               int threads) {
  const TetMesh& mesh = scenario.mesh;
  std::vector<Vec12> grads(mesh.num_tets());
  parallel_for(mesh.num_tets(), threads, [&](std::size_t t) {
    grads[t] = element_gradient(element_state(mesh, t, positions), scenario.material);
  });
  Eigen::VectorXd full = Eigen::VectorXd::Zero(positions.size());
  for (std::size_t t = 0; t < mesh.num_tets(); ++t) {
    const Tet& tet = mesh.tets()[t];
    for (int a = 0; a < 4; ++a) full.segment<3>(3 * tet[a]) += grads[t].segment<3>(3 * a);
  }
  return DofMap(mesh.num_vertices(), scenario.handles).restrict(full);
}

AssembledHessian assemble_projected_hessian(const Scenario& scenario,
                                            const Eigen::VectorXd& positions,
                                            const ProjectionStrategy& strategy, int threads) {
  const TetMesh& mesh = scenario.mesh;
  const DofMap dofs(mesh.num_vertices(), scenario.handles);
  std::vector<Mat12> blocks(mesh.num_tets());
  std::vector<int> negative(mesh.num_tets(), 0);
  parallel_for(mesh.num_tets(), threads, [&](std::size_t t) {
    Mat12 H;
    try {
      H = element_hessian(element_state(mesh, t, positions), scenario.material);
    } catch (const std::exception& e) {
      throw std::runtime_error("element " + std::to_string(t) + ": " + e.what());
    }
    if (!H.allFinite()) throw std::runtime_error("element " + std::to_string(t) + ": non-finite Hessian");
    ProjectionResult proj = project_symmetric(H, strategy);
    blocks[t] = proj.matrix;
    negative[t] = proj.report.negative_count > 0 ? 1 : 0;
  });

  AssembledHessian out;
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(mesh.num_tets() * 144);
  for (std::size_t t = 0; t < mesh.num_tets(); ++t) {
    const Tet& tet = mesh.tets()[t];
    out.negative_element_count += negative[t];
    for (int i = 0; i < 12; ++i) {
      const int row = dofs.free_index(3 * tet[i / 3] + i % 3);
      if (row < 0) continue;
      for (int j = 0; j < 12; ++j) {
        const int col = dofs.free_index(3 * tet[j / 3] + j % 3);
        if (col >= 0) triplets.emplace_back(row, col, blocks[t](i, j));
      }
    }
  }
  out.matrix.resize(dofs.num_free(), dofs.num_free());
  out.matrix.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

namespace {

using Cholesky = Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower>;

bool try_solve(const SparseMatrix& H, const Eigen::VectorXd& g, Eigen::VectorXd& d) {
  Cholesky llt(H);
  if (llt.info() != Eigen::Success) return false;
  d = -llt.solve(g);
  return llt.info() == Eigen::Success && d.allFinite();
}

SparseMatrix shifted(const SparseMatrix& H, double shift) {
  SparseMatrix I(H.rows(), H.cols());
  I.setIdentity();
  return H + shift * I;
}

double mean_diagonal(const SparseMatrix& H) {
  if (H.rows() == 0) return 1.0;
  const double m = H.diagonal().mean();
  return m > 0.0 ? m : std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
}

}  // namespace

DirectionResult newton_direction(const SparseMatrix& H, const Eigen::VectorXd& g) {
  DirectionResult out;
  out.factorizations = 1;
  if (try_solve(H, g, out.direction)) {
    out.ok = true;
    return out;
  }
  const double scale = mean_diagonal(H);
  for (double beta = 1e-10; beta <= 1e-2; beta *= 2.0) {
    ++out.factorizations;
    if (try_solve(shifted(H, beta * scale), g, out.direction)) {
      out.ok = true;
      out.shift = beta * scale;
      return out;
    }
  }
  out.direction = Eigen::VectorXd();
  return out;
}

LineSearchResult backtracking_line_search(const std::function<double(const Eigen::VectorXd&)>& energy,
                                          const Eigen::VectorXd& x, const Eigen::VectorXd& d,
                                          const Eigen::VectorXd& g, double energy_at_x,
                                          const SolveSettings& settings) {
  LineSearchResult out;
  const double slope = g.dot(d);
  if (!(slope < 0.0)) return out;
  double alpha = 1.0;
  for (int k = 0; k <= settings.ls_max_backtracks; ++k) {
    const double trial = energy(x + alpha * d);
    ++out.evaluations;
    if (std::isfinite(trial) && trial < energy_at_x && trial <= energy_at_x + settings.ls_c * alpha * slope) {
      out.ok = true;
      out.alpha = alpha;
      out.energy = trial;
      return out;
    }
    alpha *= settings.ls_shrink;
  }
  return out;
}

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::MaxIters: return "MaxIters";
    case SolveStatus::LineSearchFailure: return "LineSearchFailure";
    case SolveStatus::FactorizationFailure: return "FactorizationFailure";
  }
  return "?";
}

namespace {

struct StepDirection {
  Eigen::VectorXd d;  // free DOFs
  bool ok = false;
  int negative_elements = 0;
  int factorizations = 0;
};

using DirectionFn = std::function<StepDirection(const Eigen::VectorXd& x, const Eigen::VectorXd& g)>;

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

// The Newton loop shared by every strategy; only the direction differs.
SolveReport solve_with(const Scenario& scenario, const DirectionFn& direction) {
  validate(scenario);
  const SolveSettings& settings = scenario.settings;
  const DofMap dofs(scenario.mesh.num_vertices(), scenario.handles);
  const auto start = std::chrono::steady_clock::now();

  SolveReport report;
  report.tolerance = settings.tol_scale * scenario.material.lambda();
  report.final_decrement = std::numeric_limits<double>::quiet_NaN();

  Eigen::VectorXd x = initial_vector(scenario);
  auto energy_fn = [&](const Eigen::VectorXd& p) { return total_energy(scenario, p, settings.threads); };
  double energy = energy_fn(x);
  report.initial_energy = energy;

  auto finish = [&](SolveStatus status) {
    report.status = status;
    report.final_positions = x;
    report.final_energy = energy;
    report.total_wall_ms = elapsed_ms(start);
    return report;
  };

  if (!std::isfinite(energy)) return finish(SolveStatus::LineSearchFailure);

  for (int iter = 0;; ++iter) {
    const auto iter_start = std::chrono::steady_clock::now();
    const Eigen::VectorXd g = total_gradient(scenario, x, settings.threads);
    if (g.size() == 0 || g.cwiseAbs().maxCoeff() == 0.0) {
      report.final_decrement = 0.0;
      return finish(SolveStatus::Converged);
    }

    StepDirection dir = direction(x, g);
    report.factorizations += dir.factorizations;
    if (!dir.ok) return finish(SolveStatus::FactorizationFailure);

    const double slope = g.dot(dir.d);
    const double decrement = -0.5 * slope;
    report.final_decrement = decrement;
    if (decrement >= 0.0 && decrement < report.tolerance) return finish(SolveStatus::Converged);
    if (iter == settings.max_iters) return finish(SolveStatus::MaxIters);
    if (!(slope < 0.0)) return finish(SolveStatus::LineSearchFailure);

    Eigen::VectorXd d_full = Eigen::VectorXd::Zero(x.size());
    dofs.add_to(d_full, dir.d);
    Eigen::VectorXd g_full = Eigen::VectorXd::Zero(x.size());
    dofs.add_to(g_full, g);
    const LineSearchResult ls = backtracking_line_search(energy_fn, x, d_full, g_full, energy, settings);
    if (!ls.ok) return finish(SolveStatus::LineSearchFailure);

    x += ls.alpha * d_full;
    energy = ls.energy;
    report.records.push_back(
        {iter + 1, energy, decrement, ls.alpha, dir.negative_elements, elapsed_ms(iter_start)});
  }
}

StepDirection local_direction(const Scenario& scenario, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& g, const ProjectionStrategy& strategy) {
  const AssembledHessian H = assemble_projected_hessian(scenario, x, strategy, scenario.settings.threads);
  const DirectionResult r = newton_direction(H.matrix, g);
  return {r.direction, r.ok, H.negative_element_count, r.factorizations};
}

}  // namespace

SolveReport run_quasistatic(const Scenario& scenario) {
  if (std::holds_alternative<GlobalStrategy>(scenario.settings.strategy)) return run_global_strategy(scenario);
  const ProjectionStrategy strategy = std::get<ProjectionStrategy>(scenario.settings.strategy);
  return solve_with(scenario, [&](const Eigen::VectorXd& x, const Eigen::VectorXd& g) {
    return local_direction(scenario, x, g, strategy);
  });
}

SolveReport run_global_strategy(const Scenario& scenario) {
  const auto* global = std::get_if<GlobalStrategy>(&scenario.settings.strategy);
  if (!global) throw std::invalid_argument("run_global_strategy: strategy is not a global strategy");
  const int threads = scenario.settings.threads;

  return std::visit(
      Overloaded{
          [&](const GlobalShift& shift) {
            return solve_with(scenario, [&](const Eigen::VectorXd& x, const Eigen::VectorXd& g) {
              const AssembledHessian H = assemble_projected_hessian(scenario, x, NoProjection{}, threads);
              StepDirection out;
              out.negative_elements = H.negative_element_count;
              out.factorizations = 1;
              if (try_solve(H.matrix, g, out.d)) {
                out.ok = true;
                return out;
              }
              const double scale = mean_diagonal(H.matrix);
              double beta = shift.beta0;
              for (int attempt = 0; attempt < 64 && std::isfinite(beta * scale); ++attempt) {
                ++out.factorizations;
                if (try_solve(shifted(H.matrix, beta * scale), g, out.d)) {
                  out.ok = true;
                  return out;
                }
                beta *= shift.growth;
              }
              return out;
            });
          },
          [&](const GlobalAbs&) {
            const DofMap dofs(scenario.mesh.num_vertices(), scenario.handles);
            if (dofs.num_free() > scenario.settings.global_abs_dof_cap)
              throw std::invalid_argument("global_abs: " + std::to_string(dofs.num_free()) +
                                          " free DOFs exceed the cap of " +
                                          std::to_string(scenario.settings.global_abs_dof_cap));
            return solve_with(scenario, [&](const Eigen::VectorXd& x, const Eigen::VectorXd& g) {
              const AssembledHessian H = assemble_projected_hessian(scenario, x, NoProjection{}, threads);
              const Eigen::MatrixXd dense(H.matrix);
              Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dense);
              StepDirection out;
              out.negative_elements = H.negative_element_count;
              if (eig.info() != Eigen::Success) return out;
              Eigen::VectorXd mag = eig.eigenvalues().cwiseAbs();
              const double floor = 1e-12 * std::max(mag.maxCoeff(), 1e-300);
              mag = mag.cwiseMax(floor);
              const Eigen::MatrixXd& U = eig.eigenvectors();
              out.d = -(U * (U.transpose() * g).cwiseQuotient(mag));
              out.ok = out.d.allFinite();
              return out;
            });
          },
          [&](const OnDemand& on_demand) {
            return solve_with(scenario, [&](const Eigen::VectorXd& x, const Eigen::VectorXd& g) {
              const AssembledHessian H = assemble_projected_hessian(scenario, x, NoProjection{}, threads);
              StepDirection out;
              out.negative_elements = H.negative_element_count;
              out.factorizations = 1;
              if (try_solve(H.matrix, g, out.d)) {
                out.ok = true;
                return out;
              }
              StepDirection fallback = local_direction(scenario, x, g, on_demand.fallback);
              fallback.factorizations += out.factorizations;
              return fallback;
            });
          },
      },
      *global);
}

}  // namespace pnewton
