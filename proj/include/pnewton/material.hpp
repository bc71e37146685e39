#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "pnewton/mesh.hpp"

namespace pnewton {

using Mat9 = Eigen::Matrix<double, 9, 9>;
using Vec9 = Eigen::Matrix<double, 9, 1>;
using Mat12 = Eigen::Matrix<double, 12, 12>;
using Vec12 = Eigen::Matrix<double, 12, 1>;
using Mat9x12 = Eigen::Matrix<double, 9, 12>;

enum class MaterialModel { StableNeoHookean, NeoHookeanLog, ArapVolume, SymmetricDirichletVolume };

std::string_view to_string(MaterialModel model);
/// Accepts "snh", "nh_log", "arap", "sd" and the enum spellings.
MaterialModel parse_material_model(std::string_view name);

/// Lamé pair plus model tag. Constructed through `make` so the positivity
/// invariants always hold.
class MaterialParams {
 public:
  static MaterialParams make(double mu, double lambda,
                             MaterialModel model = MaterialModel::StableNeoHookean);

  double mu() const { return mu_; }
  double lambda() const { return lambda_; }
  MaterialModel model() const { return model_; }
  /// 1 + mu/lambda, the rest-stability offset of the stable Neo-Hookean.
  double alpha() const { return 1.0 + mu_ / lambda_; }

 private:
  MaterialParams(double mu, double lambda, MaterialModel model)
      : mu_(mu), lambda_(lambda), model_(model) {}
  double mu_;
  double lambda_;
  MaterialModel model_;
};

struct Lame {
  double mu;
  double lambda;
};

/// mu = E / (2(1 + nu)), lambda = 2 nu / (1 - 2 nu) * mu.
/// nu >= 0.5 is rejected; nu == 0 (lambda == 0) only with allow_zero_lambda.
Lame lame_from_young_poisson(double youngs, double poisson, bool allow_zero_lambda = false);

/// Thrown when a derivative is requested at a state where the energy is
/// +inf (J <= 0 for log/inverse-based models).
class InvalidStateError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Rotation-variant SVD with det(U) = det(V) = +1; sigma is sorted so that
/// sigma(0) >= sigma(1) >= |sigma(2)| and only sigma(2) may be negative.
struct SignedSvd {
  Mat3 U;
  Eigen::Vector3d sigma;
  Mat3 V;
};
SignedSvd signed_svd(const Mat3& F);

struct FInvariants {
  Mat3 F;
  Eigen::Vector3d sigma;
  double I_C;
  double J;
};
FInvariants invariants(const Mat3& F);

/// Column-major flattening of a 3x3 matrix (index a + 3b).
Vec9 flatten(const Mat3& M);
Mat3 unflatten(const Vec9& v);

Mat3 deformation_gradient(const Mat3& deformed_edges, const Mat3& rest_shape_inv);

/// Energy density. Returns +inf for NeoHookeanLog and
/// SymmetricDirichletVolume when J <= 0; never throws for finite F.
double psi(const Mat3& F, const MaterialParams& m);

/// dPsi/dF. Throws InvalidStateError where psi is +inf.
Mat3 dpsi_dF(const Mat3& F, const MaterialParams& m);

/// d2Psi/dF2 over the column-major flattening of F.
Mat9 d2psi_dF2(const Mat3& F, const MaterialParams& m);

/// 9x12 Jacobian of vec(F) with respect to the four vertex positions.
Mat9x12 dF_dx(const Mat3& rest_shape_inv);

struct ElementState {
  std::array<Vec3, 4> positions;
  Mat3 rest_shape_inv;
  double rest_volume;
};

ElementState element_state(const TetMesh& mesh, std::size_t tet, const Eigen::VectorXd& x);

double element_energy(const ElementState& e, const MaterialParams& m);
Vec12 element_gradient(const ElementState& e, const MaterialParams& m);
Mat12 element_hessian(const ElementState& e, const MaterialParams& m);

/// Closed-form twist/flip eigenvalues of the stable Neo-Hookean F-space
/// Hessian, ordered (L3, L4, L5, L6, L7, L8) where
///   L3,4,5 = mu + s_{z,x,y} (lambda (J - 1) - mu)
///   L6,7,8 = mu - s_{z,x,y} (lambda (J - 1) - mu),  J = sx sy sz.
std::array<double, 6> snh_twist_flip_eigenvalues(const Eigen::Vector3d& sigma, double mu,
                                                 double lambda);

}  // namespace pnewton
