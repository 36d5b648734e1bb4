#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <random>

#include "phs/core.hpp"
#include "phs/models.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using phs::coenergy;
using phs::QuadraticDensityd;

TEST_CASE("coenergy identity and diagonal weights") {
  auto id = QuadraticDensityd::constant(MatrixXd::Identity(2, 2));
  VectorXd x(2);
  x << 3, -1;
  CHECK(coenergy(id, 0.3, x).isApprox(x, 0.0));

  auto diag = QuadraticDensityd::constant((MatrixXd(2, 2) << 2, 0, 0, 5).finished());
  VectorXd ones = VectorXd::Ones(2);
  VectorXd e = coenergy(diag, 0.0, ones);
  CHECK(e(0) == 2.0);
  CHECK(e(1) == 5.0);
}

TEST_CASE("coenergy of Timoshenko momenta recovers velocities") {
  const double rhoA = 2698.9 * 1.2566e-3, rhoI = 2698.9 * 1.2566e-7;
  auto dp = QuadraticDensityd::constant(
      (MatrixXd(2, 2) << 1.0 / rhoA, 0, 0, 1.0 / rhoI).finished());
  const double v = 0.4, omega = -2.5;
  VectorXd p(2);
  p << rhoA * v, rhoI * omega;
  VectorXd e = coenergy(dp, 0.5, p);
  CHECK(e(0) == doctest::Approx(v).epsilon(1e-14));
  CHECK(e(1) == doctest::Approx(omega).epsilon(1e-14));
}

TEST_CASE("coenergy rejects mismatched state length") {
  auto id = QuadraticDensityd::constant(MatrixXd::Identity(2, 2));
  const VectorXd wrong = VectorXd::Ones(3);
  CHECK_THROWS_AS(coenergy(id, 0.0, wrong), std::invalid_argument);
}

TEST_CASE("coenergy is linear and its quadratic form positive definite") {
  std::mt19937 rng(42);
  std::normal_distribution<double> dist;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 4);
    MatrixXd m = MatrixXd::NullaryExpr(n, n, [&] { return dist(rng); });
    MatrixXd spd = m * m.transpose() + 0.1 * MatrixXd::Identity(n, n);
    auto density = QuadraticDensityd::constant(spd);

    VectorXd x = VectorXd::NullaryExpr(n, [&] { return dist(rng); });
    VectorXd y = VectorXd::NullaryExpr(n, [&] { return dist(rng); });
    const double alpha = dist(rng), beta = dist(rng);

    VectorXd lhs = coenergy(density, 0.0, VectorXd(alpha * x + beta * y));
    VectorXd rhs = alpha * coenergy(density, 0.0, x) + beta * coenergy(density, 0.0, y);
    CHECK((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));

    CHECK(0.5 * x.dot(coenergy(density, 0.0, x)) > 0.0);
  }
  auto density = QuadraticDensityd::constant(MatrixXd::Identity(3, 3));
  const VectorXd zero = VectorXd::Zero(3);
  CHECK(0.5 * zero.dot(coenergy(density, 0.0, zero)) == 0.0);
}

TEST_CASE("validate_model accepts the Timoshenko model") {
  auto model = phs::timoshenko<double>(phs::TimoshenkoParams{});
  CHECK(phs::validate_model(model).empty());
}

TEST_CASE("validate_model reports rank deficiency") {
  auto model = phs::wave_1d<double>(1.0, 1.0, 1.0);
  model.coefficients.p1 = MatrixXd::Zero(2, 2);
  model.coefficients.p0 = MatrixXd::Zero(2, 2);
  model.density_p = QuadraticDensityd::constant(MatrixXd::Identity(2, 2));
  model.density_q = QuadraticDensityd::constant(MatrixXd::Identity(2, 2));
  auto violations = phs::validate_model(model);
  REQUIRE(!violations.empty());
  bool found = false;
  for (const auto& v : violations)
    if (v.find("p1 rank-deficient") != std::string::npos) found = true;
  CHECK(found);
}

TEST_CASE("validate_model reports an indefinite density") {
  auto model = phs::wave_1d<double>(1.0, 1.0, 1.0);
  model.density_q = QuadraticDensityd::constant(MatrixXd::Constant(1, 1, -1.0));
  auto violations = phs::validate_model(model);
  REQUIRE(!violations.empty());
  bool found = false;
  for (const auto& v : violations)
    if (v.find("positive definite") != std::string::npos) found = true;
  CHECK(found);
}

TEST_CASE("validate_model reports shape mismatches and bad domains") {
  auto model = phs::wave_1d<double>(1.0, 1.0, 1.0);
  model.coefficients.p0 = MatrixXd::Zero(2, 1);
  CHECK(!phs::validate_model(model).empty());

  auto flipped = phs::wave_1d<double>(1.0, 1.0, 1.0);
  flipped.b = -1.0;
  CHECK(!phs::validate_model(flipped).empty());
}

TEST_CASE("spatially varying density is sampled where asked") {
  QuadraticDensityd density(1, [](const Eigen::Vector2d& xi) {
    return MatrixXd::Constant(1, 1, 2.0 + xi.x());
  });
  VectorXd one = VectorXd::Ones(1);
  CHECK(coenergy(density, 3.0, one)(0) == doctest::Approx(5.0));
}
