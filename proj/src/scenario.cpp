#include "pnewton/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "pnewton/util.hpp"

namespace pnewton {

std::string describe(const GlobalStrategy& strategy) {
  return std::visit(Overloaded{
                        [](const GlobalShift&) { return std::string("global_shift"); },
                        [](const GlobalAbs&) { return std::string("global_abs"); },
                        [](const OnDemand& o) { return "on_demand(" + describe(o.fallback) + ")"; },
                    },
                    strategy);
}

std::string describe(const Strategy& strategy) {
  return std::visit([](const auto& s) { return describe(s); }, strategy);
}

void validate(const SolveSettings& s) {
  if (s.max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  if (!(s.tol_scale >= 0.0) || !std::isfinite(s.tol_scale)) throw std::invalid_argument("tol_scale must be >= 0");
  if (!(s.ls_c > 0.0 && s.ls_c < 1.0)) throw std::invalid_argument("ls_c must lie in (0, 1)");
  if (!(s.ls_shrink > 0.0 && s.ls_shrink < 1.0)) throw std::invalid_argument("ls_shrink must lie in (0, 1)");
  if (s.ls_max_backtracks < 0) throw std::invalid_argument("ls_max_backtracks must be >= 0");
  if (s.global_abs_dof_cap < 0) throw std::invalid_argument("global_abs_dof_cap must be >= 0");
  if (s.threads < 0) throw std::invalid_argument("threads must be >= 0");
  std::visit(Overloaded{
                 [](const ProjectionStrategy& p) { validate(p); },
                 [](const GlobalStrategy& g) {
                   if (const auto* shift = std::get_if<GlobalShift>(&g)) {
                     if (!(shift->beta0 > 0.0)) throw std::invalid_argument("global_shift: beta0 must be > 0");
                     if (!(shift->growth > 1.0)) throw std::invalid_argument("global_shift: growth must be > 1");
                   }
                   if (const auto* od = std::get_if<OnDemand>(&g)) validate(od->fallback);
                 },
             },
             s.strategy);
}

Scenario make_scenario(TetMesh mesh, const std::vector<int>& handles,
                       const DeformationTransform& transform, const MaterialParams& material,
                       const SolveSettings& settings, bool warp_free_vertices) {
  std::vector<int> sorted = handles;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  auto init = apply_initial_deformation(mesh, transform, sorted, warp_free_vertices);
  Scenario s{std::move(mesh), std::move(sorted), std::move(init.handle_targets),
             std::move(init.initial_positions), material, settings};
  validate(s);
  return s;
}

void validate(const Scenario& s) {
  if (s.handles.empty()) throw std::invalid_argument("scenario: at least one handle vertex is required");
  if (s.handle_targets.size() != s.handles.size())
    throw std::invalid_argument("scenario: one target per handle is required");
  if (s.initial_positions.size() != s.mesh.num_vertices())
    throw std::invalid_argument("scenario: one initial position per vertex is required");
  if (!std::is_sorted(s.handles.begin(), s.handles.end()) ||
      std::adjacent_find(s.handles.begin(), s.handles.end()) != s.handles.end())
    throw std::invalid_argument("scenario: handles must be sorted and unique");
  for (std::size_t i = 0; i < s.handles.size(); ++i) {
    const int h = s.handles[i];
    if (h < 0 || static_cast<std::size_t>(h) >= s.mesh.num_vertices())
      throw std::invalid_argument("scenario: handle index out of range");
    if (s.initial_positions[h] != s.handle_targets[i])
      throw std::invalid_argument("scenario: initial position of handle " + std::to_string(h) +
                                  " differs from its target");
  }
  for (const Vec3& p : s.initial_positions)
    if (!p.allFinite()) throw std::invalid_argument("scenario: non-finite initial position");
  validate(s.settings);
}

Eigen::VectorXd initial_vector(const Scenario& scenario) {
  Eigen::VectorXd x(3 * scenario.initial_positions.size());
  for (std::size_t v = 0; v < scenario.initial_positions.size(); ++v)
    x.segment<3>(3 * v) = scenario.initial_positions[v];
  return x;
}

}  // namespace pnewton
