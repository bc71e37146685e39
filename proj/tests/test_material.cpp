#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>

#include "pnewton/material.hpp"
#include "test_support.hpp"

using namespace pnewton;
using testing_support::fd_gradient;
using testing_support::fd_jacobian;
using testing_support::random_F;
using testing_support::random_rotation;
using testing_support::rel_err;

namespace {

constexpr MaterialModel kModels[] = {MaterialModel::StableNeoHookean, MaterialModel::NeoHookeanLog,
                                     MaterialModel::ArapVolume, MaterialModel::SymmetricDirichletVolume};

bool allows_inversion(MaterialModel m) { return m == MaterialModel::StableNeoHookean; }

Eigen::VectorXd vec(const Mat3& F) { return flatten(F); }
Mat3 mat(const Eigen::VectorXd& v) { return unflatten(Vec9(v)); }

// Closest eigenvalue of `spectrum` to `value`, as a relative distance.
double spectrum_distance(const Eigen::VectorXd& spectrum, double value) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < spectrum.size(); ++i)
    best = std::min(best, std::abs(spectrum(i) - value) / std::max(std::abs(value), 1.0));
  return best;
}

ElementState random_element(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  ElementState e;
  Mat3 Dm;
  do {
    for (int c = 0; c < 3; ++c) Dm.col(c) = Vec3(u(rng), u(rng), u(rng));
  } while (Dm.determinant() < 0.2);
  e.rest_shape_inv = Dm.inverse();
  e.rest_volume = Dm.determinant() / 6.0;
  const Mat3 F = random_F(rng, 0.6, 1.5);
  const Vec3 origin(u(rng), u(rng), u(rng));
  e.positions[0] = origin;
  for (int c = 0; c < 3; ++c) e.positions[c + 1] = origin + F * Dm.col(c);
  return e;
}

Eigen::VectorXd element_vector(const ElementState& e) {
  Eigen::VectorXd x(12);
  for (int k = 0; k < 4; ++k) x.segment<3>(3 * k) = e.positions[k];
  return x;
}

ElementState with_positions(ElementState e, const Eigen::VectorXd& x) {
  for (int k = 0; k < 4; ++k) e.positions[k] = x.segment<3>(3 * k);
  return e;
}

}  // namespace

TEST_CASE("lame_from_young_poisson") {
  // The double nearest 0.495 sits just below it, so the ratio is 99 only up
  // to the representation of the input; compare against exact arithmetic.
  const Lame a = lame_from_young_poisson(1e8, 0.495);
  CHECK(a.lambda / a.mu == testing_support::exact_lame_ratio(0.495));
  CHECK(std::abs(a.lambda / a.mu - 99.0) <= 1e-12 * 99.0);
  CHECK(a.mu == doctest::Approx(1e8 / 2.99).epsilon(1e-15));
  const Lame b = lame_from_young_poisson(1e8, 0.4999);
  CHECK(b.lambda / b.mu == testing_support::exact_lame_ratio(0.4999));
  CHECK(std::abs(b.lambda / b.mu - 4999.0) <= 1e-12 * 4999.0);
  CHECK_THROWS_AS(lame_from_young_poisson(1.0, 0.0), std::invalid_argument);
  const Lame z = lame_from_young_poisson(1.0, 0.0, true);
  CHECK(z.mu == 0.5);
  CHECK(z.lambda == 0.0);
  CHECK_THROWS_AS(lame_from_young_poisson(1.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(lame_from_young_poisson(1.0, 0.7), std::invalid_argument);
  CHECK_THROWS_AS(lame_from_young_poisson(-1.0, 0.3), std::invalid_argument);
}

TEST_CASE("MaterialParams invariants") {
  CHECK_THROWS_AS(MaterialParams::make(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(MaterialParams::make(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(MaterialParams::make(1.0, std::nan("")), std::invalid_argument);
  const auto m = MaterialParams::make(3.0, 7.0);
  CHECK(m.alpha() == doctest::Approx(1.0 + 3.0 / 7.0).epsilon(1e-12));
  for (MaterialModel model : kModels) CHECK(parse_material_model(to_string(model)) == model);
  CHECK_THROWS_AS(parse_material_model("mooney"), std::invalid_argument);
}

TEST_CASE("signed SVD and invariants") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const Mat3 F = random_F(rng, 0.3, 2.0, true);
    const SignedSvd s = signed_svd(F);
    CHECK(s.U.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.V.determinant() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((s.U * s.sigma.asDiagonal() * s.V.transpose() - F).norm() < 1e-12 * F.norm());
    CHECK(s.sigma(0) >= s.sigma(1));
    CHECK(s.sigma(1) >= std::abs(s.sigma(2)));
    const FInvariants inv = invariants(F);
    CHECK(inv.J == doctest::Approx(F.determinant()).epsilon(1e-10));
    CHECK(inv.J == doctest::Approx(inv.sigma.prod()).epsilon(1e-10));
    CHECK(inv.I_C == doctest::Approx(inv.sigma.squaredNorm()).epsilon(1e-10));
    CHECK(inv.I_C == doctest::Approx((F.transpose() * F).trace()).epsilon(1e-10));
  }
}

TEST_CASE("flatten is column-major") {
  Mat3 M;
  M << 1, 2, 3, 4, 5, 6, 7, 8, 9;
  const Vec9 v = flatten(M);
  CHECK(v(0) == 1);
  CHECK(v(1) == 4);
  CHECK(v(3) == 2);
  CHECK(unflatten(v) == M);
}

TEST_CASE("psi examples") {
  const auto snh = MaterialParams::make(1.0, 10.0);
  CHECK(psi(Mat3::Identity(), snh) == doctest::Approx(1.0 / 20.0).epsilon(1e-14));
  CHECK(psi(2.0 * Mat3::Identity(), snh) == doctest::Approx(242.55).epsilon(1e-13));
  for (double mu : {0.3, 1.0, 7.0})
    for (double lambda : {2.0, 99.0, 4999.0}) {
      const auto m = MaterialParams::make(mu, lambda);
      CHECK(psi(Mat3::Identity(), m) == doctest::Approx(mu * mu / (2 * lambda)).epsilon(1e-12));
    }
  Mat3 inverted = Mat3::Identity();
  inverted(2, 2) = -0.1;
  const auto sd = MaterialParams::make(1.0, 10.0, MaterialModel::SymmetricDirichletVolume);
  const auto nh = MaterialParams::make(1.0, 10.0, MaterialModel::NeoHookeanLog);
  const auto arap = MaterialParams::make(1.0, 10.0, MaterialModel::ArapVolume);
  CHECK(std::isinf(psi(inverted, sd)));
  CHECK(std::isinf(psi(inverted, nh)));
  CHECK(std::isfinite(psi(inverted, snh)));
  CHECK(std::isfinite(psi(inverted, arap)));
  CHECK(psi(Mat3::Identity(), sd) == doctest::Approx(0.0));
  CHECK(psi(Mat3::Identity(), nh) == doctest::Approx(0.0));
  CHECK(psi(Mat3::Identity(), arap) == doctest::Approx(0.0));
  CHECK_THROWS_AS(dpsi_dF(inverted, sd), InvalidStateError);
  CHECK_THROWS_AS(dpsi_dF(inverted, nh), InvalidStateError);
  CHECK_THROWS_AS(d2psi_dF2(inverted, nh), InvalidStateError);
}

TEST_CASE("rest gradients vanish") {
  for (MaterialModel model : kModels) {
    const auto m = MaterialParams::make(1.3, 57.0, model);
    CHECK(dpsi_dF(Mat3::Identity(), m).norm() < 1e-12);
  }
  std::mt19937_64 rng(3);
  const auto arap = MaterialParams::make(2.0, 50.0, MaterialModel::ArapVolume);
  for (int i = 0; i < 50; ++i) CHECK(dpsi_dF(random_rotation(rng), arap).norm() < 1e-10);
}

TEST_CASE("rotation invariance of psi") {
  std::mt19937_64 rng(5);
  for (MaterialModel model : kModels) {
    const auto m = MaterialParams::make(1.0, 20.0, model);
    for (int i = 0; i < 1000; ++i) {
      const Mat3 F = random_F(rng, 0.5, 1.8);
      const Mat3 R = random_rotation(rng);
      const double a = psi(F, m), b = psi(R * F, m);
      CHECK(std::abs(a - b) <= 1e-10 * std::max(std::abs(a), 1e-12));
    }
  }
}

TEST_CASE("dpsi_dF and d2psi_dF2 against finite differences") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> mu_dist(0.5, 2.0);
  for (MaterialModel model : kModels) {
    CAPTURE(to_string(model));
    double worst_g = 0.0, worst_h = 0.0, worst_sym = 0.0;
    for (int i = 0; i < 150; ++i) {
      const double lambda = std::array{5.0, 20.0, 99.0}[i % 3];
      const auto m = MaterialParams::make(mu_dist(rng), lambda, model);
      const Mat3 F = random_F(rng, 0.5, 1.8, allows_inversion(model));
      const double h = 1e-5 * std::max(1.0, F.norm());
      const auto fg = fd_gradient([&](const Eigen::VectorXd& v) { return psi(mat(v), m); }, vec(F), h);
      worst_g = std::max(worst_g, rel_err(vec(dpsi_dF(F, m)), fg));
      const Mat9 H = d2psi_dF2(F, m);
      const auto fh = fd_jacobian([&](const Eigen::VectorXd& v) { return vec(dpsi_dF(mat(v), m)); }, vec(F), h);
      worst_h = std::max(worst_h, rel_err(Eigen::MatrixXd(H), fh));
      worst_sym = std::max(worst_sym, (H - H.transpose()).cwiseAbs().maxCoeff());
    }
    CHECK(worst_g < 1e-6);
    CHECK(worst_h < 1e-4);
    CHECK(worst_sym < 1e-10);
  }
}

TEST_CASE("stable Neo-Hookean rest spectrum") {
  const double mu = 1.7;
  const auto m = MaterialParams::make(mu, 40.0);
  Eigen::SelfAdjointEigenSolver<Mat9> es(d2psi_dF2(Mat3::Identity(), m));
  int zeros = 0, twos = 0;
  for (int i = 0; i < 9; ++i) {
    if (std::abs(es.eigenvalues()(i)) < 1e-10) ++zeros;
    if (std::abs(es.eigenvalues()(i) - 2 * mu) < 1e-10) ++twos;
  }
  CHECK(zeros == 3);
  CHECK(twos >= 3);
}

TEST_CASE("twist/flip eigenvalue formulas") {
  const auto rest = snh_twist_flip_eigenvalues(Eigen::Vector3d(1, 1, 1), 2.0, 30.0);
  for (int k = 0; k < 3; ++k) CHECK(rest[k] == doctest::Approx(0.0));
  for (int k = 3; k < 6; ++k) CHECK(rest[k] == doctest::Approx(4.0));

  const auto scaled = snh_twist_flip_eigenvalues(Eigen::Vector3d(1.2, 1.2, 1.2), 1.0, 99.0);
  for (int k = 0; k < 3; ++k) CHECK(scaled[k] == doctest::Approx(86.2864).epsilon(1e-12));
  for (int k = 3; k < 6; ++k) CHECK(scaled[k] == doctest::Approx(-84.2864).epsilon(1e-12));

  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  double worst = 0.0;
  for (int i = 0; i < 300; ++i) {
    const Eigen::Vector3d s(u(rng), u(rng), u(rng));
    const auto m = MaterialParams::make(1.0, 99.0);
    Eigen::SelfAdjointEigenSolver<Mat9> es(d2psi_dF2(Mat3(s.asDiagonal()), m));
    for (double value : snh_twist_flip_eigenvalues(s, m.mu(), m.lambda()))
      worst = std::max(worst, spectrum_distance(es.eigenvalues(), value));
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("uniform stretch drives the flip eigenvalue down monotonically") {
  double previous = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 45; ++i) {
    const double s = 1.05 + 0.01 * i;
    const auto L = snh_twist_flip_eigenvalues(Eigen::Vector3d(s, s, s), 1.0, 99.0);
    const double lowest = *std::min_element(L.begin(), L.end());
    CHECK(lowest == doctest::Approx(1.0 - s * (99.0 * (s * s * s - 1.0) - 1.0)));
    CHECK(lowest < previous);
    previous = lowest;
  }
}

TEST_CASE("deformation_gradient kinematics") {
  std::mt19937_64 rng(29);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const ElementState e = random_element(rng);
    const Mat3 Dm = e.rest_shape_inv.inverse();
    CHECK((deformation_gradient(Dm, e.rest_shape_inv) - Mat3::Identity()).norm() < 1e-12);
    Mat3 A;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) A(r, c) = n(rng);
    CHECK((deformation_gradient(A * Dm, e.rest_shape_inv) - A).norm() < 1e-12 * std::max(1.0, A.norm()));
    const double s = 1.3;
    const Mat3 Fs = deformation_gradient(s * Dm, e.rest_shape_inv);
    CHECK((Fs - s * Mat3::Identity()).norm() < 1e-12);
    CHECK(Fs.determinant() == doctest::Approx(s * s * s).epsilon(1e-12));
  }
}

TEST_CASE("dF_dx matches finite differences") {
  std::mt19937_64 rng(31);
  const ElementState e = random_element(rng);
  const auto F_of = [&](const Eigen::VectorXd& x) {
    const ElementState s = with_positions(e, x);
    const Mat3 Ds = edge_matrix(s.positions[0], s.positions[1], s.positions[2], s.positions[3]);
    return Eigen::VectorXd(flatten(Ds * e.rest_shape_inv));
  };
  const auto J = fd_jacobian(F_of, element_vector(e), 1e-6);
  CHECK(rel_err(Eigen::MatrixXd(dF_dx(e.rest_shape_inv)), J) < 1e-8);
}

TEST_CASE("element gradient and Hessian against finite differences") {
  std::mt19937_64 rng(37);
  for (MaterialModel model : kModels) {
    CAPTURE(to_string(model));
    const auto m = MaterialParams::make(1.0, 30.0, model);
    double worst_g = 0.0, worst_h = 0.0;
    for (int i = 0; i < 40; ++i) {
      const ElementState e = random_element(rng);
      const Eigen::VectorXd x = element_vector(e);
      const double h = 1e-6 * std::max(1.0, x.norm());
      const auto fg = fd_gradient([&](const Eigen::VectorXd& v) { return element_energy(with_positions(e, v), m); }, x, h);
      worst_g = std::max(worst_g, rel_err(Eigen::VectorXd(element_gradient(e, m)), fg));
      const auto fh = fd_jacobian(
          [&](const Eigen::VectorXd& v) { return Eigen::VectorXd(element_gradient(with_positions(e, v), m)); }, x, h);
      const Mat12 H = element_hessian(e, m);
      worst_h = std::max(worst_h, rel_err(Eigen::MatrixXd(H), fh));
      CHECK((H - H.transpose()).cwiseAbs().maxCoeff() < 1e-10 * H.norm());
    }
    CHECK(worst_g < 1e-5);
    CHECK(worst_h < 1e-4);
  }
}

TEST_CASE("element gradient at rest and under translation") {
  std::mt19937_64 rng(41);
  const auto m = MaterialParams::make(1.0, 99.0);
  for (int i = 0; i < 20; ++i) {
    ElementState e = random_element(rng);
    const Mat3 Dm = e.rest_shape_inv.inverse();
    for (int c = 0; c < 3; ++c) e.positions[c + 1] = e.positions[0] + Dm.col(c);
    CHECK(element_gradient(e, m).norm() < 1e-12);

    ElementState moved = random_element(rng);
    const Vec12 g0 = element_gradient(moved, m);
    for (Vec3& p : moved.positions) p += Vec3(3.0, -1.0, 0.5);
    CHECK((element_gradient(moved, m) - g0).norm() < 1e-9 * std::max(1.0, g0.norm()));
  }
}
