#include "pnewton/deformation.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <Eigen/Geometry>

#include "pnewton/util.hpp"

namespace pnewton {

namespace {

void check_axis(int axis, const char* what) {
  if (axis < 0 || axis > 2) throw std::invalid_argument(std::string(what) + ": axis must be 0, 1 or 2");
}

double normalized(const Vec3& p, int axis, const Vec3& lo, const Vec3& hi) {
  const double extent = hi[axis] - lo[axis];
  return extent > 0.0 ? (p[axis] - lo[axis]) / extent : 0.0;
}

Vec3 rotate_about(const Vec3& p, const Vec3& pivot, int axis, double angle_rad) {
  const Eigen::AngleAxisd rot(angle_rad, Vec3::Unit(axis));
  return pivot + rot * (p - pivot);
}

constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

}  // namespace

void validate(const DeformationTransform& transform) {
  std::visit(Overloaded{
                 [](const Stretch& s) {
                   check_axis(s.axis, "stretch");
                   if (!(s.factor > 0.0) || !std::isfinite(s.factor))
                     throw std::invalid_argument("stretch: factor must be > 0");
                 },
                 [](const Compress& c) {
                   check_axis(c.axis, "compress");
                   if (!(c.factor > 0.0) || !std::isfinite(c.factor))
                     throw std::invalid_argument("compress: factor must be > 0");
                 },
                 [](const Shear& s) {
                   check_axis(s.shear_axis, "shear");
                   check_axis(s.along_axis, "shear");
                   if (s.shear_axis == s.along_axis)
                     throw std::invalid_argument("shear: shear_axis and along_axis must differ");
                   if (!std::isfinite(s.amount)) throw std::invalid_argument("shear: amount must be finite");
                 },
                 [](const Twist& t) {
                   check_axis(t.axis, "twist");
                   if (!std::isfinite(t.angle_deg) || !t.pivot.allFinite())
                     throw std::invalid_argument("twist: angle and pivot must be finite");
                 },
                 [](const Bend& b) {
                   check_axis(b.axis, "bend");
                   check_axis(b.bend_axis, "bend");
                   if (!std::isfinite(b.angle_deg) || !b.pivot.allFinite())
                     throw std::invalid_argument("bend: angle and pivot must be finite");
                 },
                 [](const Translate& t) {
                   if (!t.offset.allFinite()) throw std::invalid_argument("translate: offset must be finite");
                 },
             },
             transform);
}

std::vector<Vec3> apply_transform(const DeformationTransform& transform,
                                  const std::vector<Vec3>& points, const Vec3& lo,
                                  const Vec3& hi) {
  validate(transform);
  auto scale = [&](int axis, double factor) {
    std::vector<Vec3> out = points;
    // Written as an increment so factor == 1 is bit-exact identity.
    for (Vec3& p : out) p[axis] += (factor - 1.0) * (p[axis] - lo[axis]);
    return out;
  };
  return std::visit(
      Overloaded{
          [&](const Stretch& s) { return scale(s.axis, s.factor); },
          [&](const Compress& c) { return scale(c.axis, c.factor); },
          [&](const Shear& s) {
            std::vector<Vec3> out = points;
            for (Vec3& p : out) p[s.shear_axis] += s.amount * (p[s.along_axis] - lo[s.along_axis]);
            return out;
          },
          [&](const Twist& t) {
            std::vector<Vec3> out;
            out.reserve(points.size());
            for (const Vec3& p : points)
              out.push_back(rotate_about(p, t.pivot, t.axis,
                                         normalized(p, t.axis, lo, hi) * deg2rad(t.angle_deg)));
            return out;
          },
          [&](const Bend& b) {
            std::vector<Vec3> out;
            out.reserve(points.size());
            for (const Vec3& p : points)
              out.push_back(rotate_about(p, b.pivot, b.bend_axis,
                                         normalized(p, b.axis, lo, hi) * deg2rad(b.angle_deg)));
            return out;
          },
          [&](const Translate& t) {
            std::vector<Vec3> out = points;
            for (Vec3& p : out) p += t.offset;
            return out;
          },
      },
      transform);
}

InitialDeformation apply_initial_deformation(const TetMesh& mesh,
                                             const DeformationTransform& transform,
                                             const std::vector<int>& handles,
                                             bool warp_free_vertices) {
  for (int h : handles)
    if (h < 0 || static_cast<std::size_t>(h) >= mesh.num_vertices())
      throw std::invalid_argument("handle index " + std::to_string(h) + " out of range");
  const auto [lo, hi] = mesh.bounds();
  const std::vector<Vec3> mapped = apply_transform(transform, mesh.rest_positions(), lo, hi);

  InitialDeformation out;
  out.initial_positions = warp_free_vertices ? mapped : mesh.rest_positions();
  out.handle_targets.reserve(handles.size());
  for (int h : handles) {
    out.handle_targets.push_back(mapped[h]);
    out.initial_positions[h] = mapped[h];
  }
  return out;
}

}  // namespace pnewton
