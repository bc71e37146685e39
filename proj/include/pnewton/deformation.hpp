#pragma once

#include <variant>
#include <vector>

#include <Eigen/Core>

#include "pnewton/mesh.hpp"

namespace pnewton {

// Every transform that depends on a normalized coordinate t uses the rest
// bounding box of the mesh: t = (p[axis] - lo[axis]) / (hi[axis] - lo[axis]).

/// Scales the axis coordinate about the bounding-box minimum.
struct Stretch {
  int axis = 0;
  double factor = 1.0;
};

/// Same map as Stretch; kept separate so configs read naturally.
struct Compress {
  int axis = 0;
  double factor = 1.0;
};

/// p[shear_axis] += amount * (p[along_axis] - lo[along_axis]).
struct Shear {
  int shear_axis = 0;
  int along_axis = 2;
  double amount = 0.0;
};

/// Rotation about the line through `pivot` parallel to `axis` by t * angle.
struct Twist {
  int axis = 2;
  double angle_deg = 0.0;
  Vec3 pivot = Vec3::Zero();
};

/// Rotation about the line through `pivot` parallel to `bend_axis` by
/// t * angle, with t measured along `axis`.
struct Bend {
  int axis = 2;
  int bend_axis = 0;
  double angle_deg = 0.0;
  Vec3 pivot = Vec3::Zero();
};

struct Translate {
  Vec3 offset = Vec3::Zero();
};

using DeformationTransform = std::variant<Stretch, Compress, Shear, Twist, Bend, Translate>;

/// Throws std::invalid_argument for bad axes, non-positive factors or
/// non-finite angles.
void validate(const DeformationTransform& transform);

/// Maps every point through the transform; `lo`/`hi` define the
/// normalization box.
std::vector<Vec3> apply_transform(const DeformationTransform& transform,
                                  const std::vector<Vec3>& points,
                                  const Vec3& lo, const Vec3& hi);

struct InitialDeformation {
  std::vector<Vec3> initial_positions;
  std::vector<Vec3> handle_targets;  // parallel to the handle list
};

/// Transforms the handles (and, when `warp_free_vertices` is set, every
/// other vertex too) relative to the mesh's rest bounding box.
InitialDeformation apply_initial_deformation(const TetMesh& mesh,
                                             const DeformationTransform& transform,
                                             const std::vector<int>& handles,
                                             bool warp_free_vertices = true);

}  // namespace pnewton
