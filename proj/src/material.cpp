#include "pnewton/material.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/SVD>

namespace pnewton {

std::string_view to_string(MaterialModel model) {
  switch (model) {
    case MaterialModel::StableNeoHookean: return "snh";
    case MaterialModel::NeoHookeanLog: return "nh_log";
    case MaterialModel::ArapVolume: return "arap";
    case MaterialModel::SymmetricDirichletVolume: return "sd";
  }
  return "?";
}

MaterialModel parse_material_model(std::string_view name) {
  if (name == "snh" || name == "StableNeoHookean" || name == "stable_neo_hookean")
    return MaterialModel::StableNeoHookean;
  if (name == "nh_log" || name == "NeoHookeanLog" || name == "neo_hookean")
    return MaterialModel::NeoHookeanLog;
  if (name == "arap" || name == "ArapVolume") return MaterialModel::ArapVolume;
  if (name == "sd" || name == "SymmetricDirichletVolume" || name == "symmetric_dirichlet")
    return MaterialModel::SymmetricDirichletVolume;
  throw std::invalid_argument("unknown material model '" + std::string(name) + "'");
}

MaterialParams MaterialParams::make(double mu, double lambda, MaterialModel model) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw std::invalid_argument("material: mu must be > 0");
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("material: lambda must be > 0");
  return MaterialParams(mu, lambda, model);
}

Lame lame_from_young_poisson(double youngs, double poisson, bool allow_zero_lambda) {
  if (!(youngs > 0.0) || !std::isfinite(youngs)) throw std::invalid_argument("E must be > 0");
  if (!(poisson >= 0.0 && poisson < 0.5)) throw std::invalid_argument("nu must lie in [0, 0.5)");
  const double mu = youngs / (2.0 * (1.0 + poisson));
  const double lambda = 2.0 * poisson / (1.0 - 2.0 * poisson) * mu;
  if (lambda == 0.0 && !allow_zero_lambda)
    throw std::invalid_argument("nu = 0 gives lambda = 0, which removes the volume term");
  return {mu, lambda};
}

SignedSvd signed_svd(const Mat3& F) {
  Eigen::JacobiSVD<Mat3> svd(F, Eigen::ComputeFullU | Eigen::ComputeFullV);
  SignedSvd out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
  if (out.U.determinant() < 0.0) {
    out.U.col(2) *= -1.0;
    out.sigma(2) *= -1.0;
  }
  if (out.V.determinant() < 0.0) {
    out.V.col(2) *= -1.0;
    out.sigma(2) *= -1.0;
  }
  return out;
}

FInvariants invariants(const Mat3& F) {
  return {F, signed_svd(F).sigma, F.squaredNorm(), F.determinant()};
}

Vec9 flatten(const Mat3& M) { return Eigen::Map<const Vec9>(M.data()); }

Mat3 unflatten(const Vec9& v) { return Eigen::Map<const Mat3>(v.data()); }

Mat3 deformation_gradient(const Mat3& deformed_edges, const Mat3& rest_shape_inv) {
  return deformed_edges * rest_shape_inv;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool needs_positive_J(MaterialModel model) {
  return model == MaterialModel::NeoHookeanLog || model == MaterialModel::SymmetricDirichletVolume;
}

// dJ/dF
Mat3 cofactor(const Mat3& F) {
  Mat3 C;
  C.col(0) = F.col(1).cross(F.col(2));
  C.col(1) = F.col(2).cross(F.col(0));
  C.col(2) = F.col(0).cross(F.col(1));
  return C;
}

Mat3 cross_matrix(const Eigen::Vector3d& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

// d2J/dF2, linear in F.
Mat9 det_hessian(const Mat3& F) {
  const Mat3 f0 = cross_matrix(F.col(0));
  const Mat3 f1 = cross_matrix(F.col(1));
  const Mat3 f2 = cross_matrix(F.col(2));
  Mat9 H = Mat9::Zero();
  H.block<3, 3>(0, 3) = -f2;
  H.block<3, 3>(0, 6) = f1;
  H.block<3, 3>(3, 0) = f2;
  H.block<3, 3>(3, 6) = -f0;
  H.block<3, 3>(6, 0) = -f1;
  H.block<3, 3>(6, 3) = f0;
  return H;
}

void check_state(const Mat3& F, const MaterialParams& m) {
  if (!F.allFinite()) throw InvalidStateError("non-finite deformation gradient");
  if (needs_positive_J(m.model()) && !(F.determinant() > 0.0))
    throw InvalidStateError(std::string(to_string(m.model())) + ": derivative requested at J <= 0");
}

// Volume term lambda/2 (J - target)^2: gradient and Hessian contributions.
void add_volume_terms(const Mat3& F, double lambda, double target, Mat3* P, Mat9* H) {
  const double J = F.determinant();
  const Mat3 C = cofactor(F);
  if (P) *P += lambda * (J - target) * C;
  if (H) {
    const Vec9 g = flatten(C);
    *H += lambda * g * g.transpose() + lambda * (J - target) * det_hessian(F);
  }
}

}  // namespace

double psi(const Mat3& F, const MaterialParams& m) {
  const double mu = m.mu(), lambda = m.lambda();
  const double J = F.determinant();
  const double Ic = F.squaredNorm();
  switch (m.model()) {
    case MaterialModel::StableNeoHookean: {
      const double r = J - m.alpha();
      return 0.5 * mu * (Ic - 3.0) + 0.5 * lambda * r * r;
    }
    case MaterialModel::NeoHookeanLog:
      if (!(J > 0.0)) return kInf;
      return 0.5 * mu * (Ic - 3.0) - mu * std::log(J) + 0.5 * lambda * (J - 1.0) * (J - 1.0);
    case MaterialModel::ArapVolume: {
      const Eigen::Vector3d s = signed_svd(F).sigma;
      return 0.5 * mu * (s.array() - 1.0).square().sum() + 0.5 * lambda * (J - 1.0) * (J - 1.0);
    }
    case MaterialModel::SymmetricDirichletVolume:
      if (!(J > 0.0)) return kInf;
      return 0.25 * mu * (Ic + F.inverse().squaredNorm() - 6.0) + 0.5 * lambda * (J - 1.0) * (J - 1.0);
  }
  return kInf;
}

Mat3 dpsi_dF(const Mat3& F, const MaterialParams& m) {
  check_state(F, m);
  const double mu = m.mu(), lambda = m.lambda();
  Mat3 P;
  switch (m.model()) {
    case MaterialModel::StableNeoHookean:
      P = mu * F;
      add_volume_terms(F, lambda, m.alpha(), &P, nullptr);
      break;
    case MaterialModel::NeoHookeanLog:
      P = mu * F - (mu / F.determinant()) * cofactor(F);
      add_volume_terms(F, lambda, 1.0, &P, nullptr);
      break;
    case MaterialModel::ArapVolume: {
      const SignedSvd svd = signed_svd(F);
      P = mu * (F - svd.U * svd.V.transpose());
      add_volume_terms(F, lambda, 1.0, &P, nullptr);
      break;
    }
    case MaterialModel::SymmetricDirichletVolume: {
      const Mat3 G = F.inverse();
      P = 0.5 * mu * (F - G.transpose() * G * G.transpose());
      add_volume_terms(F, lambda, 1.0, &P, nullptr);
      break;
    }
  }
  return P;
}

Mat9 d2psi_dF2(const Mat3& F, const MaterialParams& m) {
  check_state(F, m);
  const double mu = m.mu(), lambda = m.lambda();
  Mat9 H = Mat9::Zero();
  switch (m.model()) {
    case MaterialModel::StableNeoHookean:
      H = mu * Mat9::Identity();
      add_volume_terms(F, lambda, m.alpha(), nullptr, &H);
      break;
    case MaterialModel::NeoHookeanLog: {
      const double J = F.determinant();
      const Vec9 g = flatten(cofactor(F));
      H = mu * Mat9::Identity() + (mu / (J * J)) * g * g.transpose() - (mu / J) * det_hessian(F);
      add_volume_terms(F, lambda, 1.0, nullptr, &H);
      break;
    }
    case MaterialModel::ArapVolume: {
      // dR/dF = sum_{i<j} 2/(s_i + s_j) t_ij t_ij^T,
      // t_ij = vec(U (e_i e_j^T - e_j e_i^T) V^T) / sqrt(2).
      const SignedSvd svd = signed_svd(F);
      Mat9 dR = Mat9::Zero();
      static constexpr int kPairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
      for (const auto& pr : kPairs) {
        const int i = pr[0], j = pr[1];
        Mat3 T = svd.U.col(i) * svd.V.col(j).transpose() - svd.U.col(j) * svd.V.col(i).transpose();
        const Vec9 t = flatten(T) / std::sqrt(2.0);
        double denom = svd.sigma(i) + svd.sigma(j);
        if (std::abs(denom) < 1e-12) denom = std::copysign(1e-12, denom);
        dR += (2.0 / denom) * t * t.transpose();
      }
      H = mu * (Mat9::Identity() - dR);
      add_volume_terms(F, lambda, 1.0, nullptr, &H);
      break;
    }
    case MaterialModel::SymmetricDirichletVolume: {
      // Hessian of |F^-1|^2 applied to a basis direction E:
      // 2 (G^T E^T G^T G G^T + G^T G E G G^T + G^T G G^T E^T G^T), G = F^-1.
      const Mat3 G = F.inverse();
      const Mat3 GtG = G.transpose() * G;
      const Mat3 GGt = G * G.transpose();
      const Mat3 GtGGt = GtG * G.transpose();
      for (int col = 0; col < 9; ++col) {
        Mat3 E = Mat3::Zero();
        E(col % 3, col / 3) = 1.0;
        const Mat3 dP = 2.0 * (G.transpose() * E.transpose() * GtGGt + GtG * E * GGt +
                               GtGGt * E.transpose() * G.transpose());
        H.col(col) = 0.25 * mu * flatten(dP);
      }
      H += 0.5 * mu * Mat9::Identity();
      add_volume_terms(F, lambda, 1.0, nullptr, &H);
      break;
    }
  }
  return 0.5 * (H + H.transpose());
}

Mat9x12 dF_dx(const Mat3& B) {
  Mat9x12 D = Mat9x12::Zero();
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      const int row = a + 3 * b;
      double sum = 0.0;
      for (int k = 0; k < 3; ++k) {
        D(row, 3 * (k + 1) + a) = B(k, b);
        sum += B(k, b);
      }
      D(row, a) = -sum;
    }
  return D;
}

ElementState element_state(const TetMesh& mesh, std::size_t tet, const Eigen::VectorXd& x) {
  const Tet& t = mesh.tets()[tet];
  ElementState e;
  for (int a = 0; a < 4; ++a) e.positions[a] = x.segment<3>(3 * t[a]);
  e.rest_shape_inv = mesh.rest_shape_inv()[tet];
  e.rest_volume = mesh.rest_volume()[tet];
  return e;
}

namespace {
Mat3 element_F(const ElementState& e) {
  return deformation_gradient(edge_matrix(e.positions[0], e.positions[1], e.positions[2], e.positions[3]),
                              e.rest_shape_inv);
}
}  // namespace

double element_energy(const ElementState& e, const MaterialParams& m) {
  return e.rest_volume * psi(element_F(e), m);
}

Vec12 element_gradient(const ElementState& e, const MaterialParams& m) {
  return e.rest_volume * dF_dx(e.rest_shape_inv).transpose() * flatten(dpsi_dF(element_F(e), m));
}

Mat12 element_hessian(const ElementState& e, const MaterialParams& m) {
  const Mat9x12 D = dF_dx(e.rest_shape_inv);
  const Mat12 H = e.rest_volume * D.transpose() * d2psi_dF2(element_F(e), m) * D;
  return 0.5 * (H + H.transpose());
}

std::array<double, 6> snh_twist_flip_eigenvalues(const Eigen::Vector3d& sigma, double mu,
                                                 double lambda) {
  const double sx = sigma(0), sy = sigma(1), sz = sigma(2);
  const double J = sx * sy * sz;
  const double k = lambda * (J - 1.0) - mu;
  return {mu + sz * k, mu + sx * k, mu + sy * k, mu - sz * k, mu - sx * k, mu - sy * k};
}

}  // namespace pnewton
