#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <random>

#include "phs/assemble1d.hpp"
#include "phs/assemble2d.hpp"
#include "phs/models.hpp"
#include "phs/simulate.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using phs::build_grid_1d;
using phs::Family;
using phs::Signald;

namespace {

phs::DiscreteSystemd rotation_system() {
  phs::DiscreteSystemd sys;
  sys.n_states = 2;
  sys.dimension = 1;
  sys.h1 = 1.0;
  sys.state_meta.push_back({Family::P, {0.0, 0.0}, 0, 1});
  sys.state_meta.push_back({Family::Q, {1.0, 0.0}, 1, 1});
  sys.j_mat.resize(2, 2);
  sys.j_mat.insert(0, 1) = 1.0;
  sys.j_mat.insert(1, 0) = -1.0;
  sys.b_mat.resize(2, 0);
  sys.q_weights.resize(2, 2);
  sys.q_weights.setIdentity();
  return sys;
}

phs::DiscreteSystemd wave_system(int K, phs::ContinuousModeld* model_out = nullptr) {
  auto model = phs::wave_1d<double>(1.0, 1.0, 1.0);
  auto grid = build_grid_1d(0.0, 1.0, K, Family::P);
  model.boundary_1d.at_a = phs::port_kind_of(grid.family_at_a);
  model.boundary_1d.at_b = phs::port_kind_of(grid.family_at_b);
  if (model_out) *model_out = model;
  return phs::assemble_1d(model, grid);
}

}  // namespace

TEST_CASE("midpoint step solves the 2x2 rotation exactly") {
  auto sys = rotation_system();
  VectorXd x(2);
  x << 1.0, 0.0;
  VectorXd next = phs::midpoint_step(sys, x, VectorXd(), 2.0);
  CHECK(next(0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(next(1) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(next.norm() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("zero state stays at rest") {
  auto sys = rotation_system();
  const VectorXd rest = VectorXd::Zero(2);
  VectorXd next = phs::midpoint_step(sys, rest, VectorXd(), 0.5);
  CHECK(next.norm() == 0.0);
}

TEST_CASE("midpoint conserves the Hamiltonian of skew flows per step") {
  auto sys = wave_system(9);
  phs::MidpointSolverd solver(sys, 0.05);
  std::mt19937 rng(1);
  std::normal_distribution<double> dist;
  VectorXd x = VectorXd::NullaryExpr(sys.n_states, [&] { return dist(rng); });
  const double h0 = phs::hamiltonian(sys, x);
  for (int k = 0; k < 200; ++k) {
    x = solver.step(x, VectorXd::Zero(sys.b_mat.cols()));
    CHECK(std::abs(phs::hamiltonian(sys, x) - h0) <= 1e-12 * h0);
  }
}

TEST_CASE("step_release signals switch off at the release time") {
  VectorXd v(2);
  v << 3.0, -1.0;
  auto sig = Signald::step_release(v, 7.0);
  CHECK(sig(6.999, 2) == v);
  CHECK(sig(7.0, 2).norm() == 0.0);
  CHECK(sig(7.5, 2).norm() == 0.0);
  CHECK_THROWS_AS(sig(0.0, 3), std::invalid_argument);
}

TEST_CASE("simulate: zero-input drift stays at rounding level") {
  auto sys = wave_system(11);
  std::mt19937 rng(2);
  std::normal_distribution<double> dist;
  VectorXd x0 = VectorXd::NullaryExpr(sys.n_states, [&] { return dist(rng); });
  std::vector<Signald> signals(sys.port_meta.size());

  auto traj = phs::simulate(sys, signals, 0.01, 10.0, x0);
  const double h0 = traj.hamiltonian.front();
  double drift = 0.0;
  for (double h : traj.hamiltonian) drift = std::max(drift, std::abs(h - h0) / h0);
  CHECK(drift <= 1e-11);
}

TEST_CASE("discrete power balance holds per step with a constant force") {
  phs::ContinuousModeld model;
  auto sys = wave_system(11, &model);
  std::vector<Signald> signals(2);
  signals[1] = Signald::constant(VectorXd::Constant(1, 0.25));  // force at the free end

  const VectorXd rest = VectorXd::Zero(sys.n_states);
  auto traj = phs::simulate(sys, signals, 0.01, 5.0, rest);
  double hmax = 1.0;
  for (double h : traj.hamiltonian) hmax = std::max(hmax, std::abs(h));
  CHECK(traj.max_abs_residual() <= 1e-10 * hmax);

  // the sum telescopes: total energy change equals total injected power
  double sum = 0.0;
  for (double r : traj.residual) sum += r;
  CHECK(std::abs(sum) <= 1e-10 * hmax);

  // something actually happened
  CHECK(traj.hamiltonian.back() > 0.0);
}

TEST_CASE("time reversibility: forward then backward returns the start") {
  auto sys = wave_system(9);
  std::mt19937 rng(4);
  std::normal_distribution<double> dist;
  VectorXd x0 = VectorXd::NullaryExpr(sys.n_states, [&] { return dist(rng); });

  const double dt = 0.02;
  phs::MidpointSolverd fwd(sys, dt), bwd(sys, -dt);
  VectorXd x = x0;
  const int n = 500;
  for (int k = 0; k < n; ++k) x = fwd.step(x, VectorXd::Zero(0));
  for (int k = 0; k < n; ++k) x = bwd.step(x, VectorXd::Zero(0));
  CHECK((x - x0).norm() <= 1e-8 * x0.norm());
}

TEST_CASE("trajectories are linear in the initial state") {
  auto sys = wave_system(7);
  std::mt19937 rng(6);
  std::normal_distribution<double> dist;
  VectorXd x0 = VectorXd::NullaryExpr(sys.n_states, [&] { return dist(rng); });
  std::vector<Signald> signals(sys.port_meta.size());

  const double alpha = -2.5;
  auto t1 = phs::simulate(sys, signals, 0.01, 1.0, x0);
  auto t2 = phs::simulate(sys, signals, 0.01, 1.0, VectorXd(alpha * x0));
  CHECK((t2.x_final - alpha * t1.x_final).norm() <= 1e-11 * t1.x_final.norm() * std::abs(alpha));
}

TEST_CASE("static equilibrium: zero input gives the zero state") {
  auto sys = wave_system(9);
  const VectorXd no_input = VectorXd::Zero(sys.b_mat.cols());
  auto eq = phs::static_equilibrium(sys, no_input);
  CHECK(eq.state.norm() <= 1e-12);
  CHECK(eq.residual_norm <= 1e-12);
}

TEST_CASE("static equilibrium under a constant end force matches a dense oracle") {
  auto sys = wave_system(11);
  VectorXd u = VectorXd::Zero(sys.b_mat.cols());
  u(1) = 0.5;  // constant force at b; velocity input at a stays zero
  auto eq = phs::static_equilibrium(sys, u);
  CHECK(eq.residual_norm <= 1e-10);

  // independent route: SVD least squares on the dense system
  MatrixXd a_dense = MatrixXd(sys.j_mat) * MatrixXd(sys.q_weights);
  VectorXd rhs = -(MatrixXd(sys.b_mat) * u);
  VectorXd oracle = a_dense.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(rhs);
  CHECK((a_dense * eq.state - rhs).norm() <= (a_dense * oracle - rhs).norm() + 1e-10);
}

TEST_CASE("inconsistent constant input is flagged by the residual") {
  // equal end forces inject net momentum; no equilibrium exists
  auto model = phs::wave_1d<double>(1.0, 1.0, 1.0);
  auto grid = build_grid_1d(0.0, 1.0, 10, Family::Q);  // q (force) family at both ends
  model.boundary_1d.at_a = phs::port_kind_of(grid.family_at_a);
  model.boundary_1d.at_b = phs::port_kind_of(grid.family_at_b);
  auto sys = phs::assemble_1d(model, grid);

  VectorXd u(2);
  u << 1.0, 1.0;
  auto eq = phs::static_equilibrium(sys, u);
  CHECK(eq.residual_norm > 1e-3);
}

TEST_CASE("solver rejects nonsense inputs") {
  auto sys = wave_system(9);
  phs::MidpointSolverd solver(sys, 0.01);
  VectorXd bad = VectorXd::Constant(sys.n_states, std::numeric_limits<double>::quiet_NaN());
  CHECK_THROWS_AS(solver.step(bad, VectorXd::Zero(sys.b_mat.cols())), phs::SolverError);
  CHECK_THROWS_AS(solver.step(VectorXd::Zero(3), VectorXd::Zero(0)), phs::SolverError);

  std::vector<Signald> signals(sys.port_meta.size());
  const VectorXd rest = VectorXd::Zero(sys.n_states);
  CHECK_THROWS_AS(phs::simulate(sys, signals, -0.1, 1.0, rest), phs::SolverError);
  CHECK_THROWS_AS(phs::simulate(sys, std::vector<phs::Signald>{}, 0.1, 1.0, rest),
                  phs::SolverError);
}

TEST_CASE("midpoint rule is second order in time against the exact flow") {
  auto sys = wave_system(7);
  const MatrixXd a_dense = MatrixXd(sys.j_mat) * MatrixXd(sys.q_weights);
  Eigen::EigenSolver<MatrixXd> eig(a_dense);
  const auto V = eig.eigenvectors();
  const auto D = eig.eigenvalues();

  std::mt19937 rng(14);
  std::normal_distribution<double> dist;
  const VectorXd x0 = VectorXd::NullaryExpr(sys.n_states, [&] { return dist(rng); });
  const double T = 1.0;
  // exact flow through the eigendecomposition: x(T) = V exp(D T) V^{-1} x0
  Eigen::VectorXcd z = V.partialPivLu().solve(x0.cast<std::complex<double>>());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) *= std::exp(D(i) * T);
  const VectorXd exact = (V * z).real();

  std::vector<double> errors;
  for (double dt : {0.02, 0.01, 0.005}) {
    phs::MidpointSolverd solver(sys, dt);
    VectorXd x = x0;
    const int n = static_cast<int>(std::lround(T / dt));
    for (int k = 0; k < n; ++k) x = solver.step(x, VectorXd::Zero(0));
    errors.push_back((x - exact).norm());
  }
  CHECK(errors[0] / errors[1] == doctest::Approx(4.0).epsilon(0.15));
  CHECK(errors[1] / errors[2] == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("sparse path agrees with a direct dense solve") {
  // above 500 states the solver switches to sparse LU
  auto model = phs::wave_2d<double>(1.0, 1.0, 1.0, 1.0);
  auto grid = phs::build_grid_2d(1.0, 1.0, 28, 28, 1, 1);
  auto sys = phs::assemble_2d(model, grid);
  REQUIRE(sys.n_states >= phs::MidpointSolverd::dense_threshold);

  const double dt = 1e-3;
  phs::MidpointSolverd solver(sys, dt);
  std::mt19937 rng(12);
  std::normal_distribution<double> dist;
  const VectorXd x = VectorXd::NullaryExpr(sys.n_states, [&] { return dist(rng); });
  const VectorXd got = solver.step(x, VectorXd::Zero(sys.b_mat.cols()));

  const MatrixXd a_dense = MatrixXd(sys.j_mat) * MatrixXd(sys.q_weights);
  const MatrixXd m_dense =
      MatrixXd::Identity(sys.n_states, sys.n_states) - (dt / 2) * a_dense;
  const VectorXd rhs = x + (dt / 2) * (a_dense * x);
  const VectorXd want = m_dense.partialPivLu().solve(rhs);
  CHECK((got - want).norm() <= 1e-12 * want.norm());
}

TEST_CASE("a singular midpoint matrix is reported") {
  // not a PH system: symmetric coupling makes I - dt/2 A singular at dt = 2
  phs::DiscreteSystemd sys;
  sys.n_states = 2;
  sys.j_mat.resize(2, 2);
  sys.j_mat.insert(0, 1) = 1.0;
  sys.j_mat.insert(1, 0) = 1.0;
  sys.b_mat.resize(2, 0);
  sys.q_weights.resize(2, 2);
  sys.q_weights.setIdentity();
  sys.state_meta.push_back({Family::P, {0.0, 0.0}, 0, 1});
  sys.state_meta.push_back({Family::Q, {1.0, 0.0}, 1, 1});
  CHECK_THROWS_AS(phs::MidpointSolverd(sys, 2.0), phs::SolverError);
}

TEST_CASE("trajectory recording options") {
  auto sys = wave_system(7);
  std::vector<Signald> signals(sys.port_meta.size());
  phs::SimOptionsd options;
  options.state_stride = 10;
  options.snapshot_steps = {5};
  options.record_ports = false;

  std::mt19937 rng(8);
  std::normal_distribution<double> dist;
  VectorXd x0 = VectorXd::NullaryExpr(sys.n_states, [&] { return dist(rng); });
  auto traj = phs::simulate(sys, signals, 0.01, 0.5, x0, options);

  REQUIRE(traj.times.size() == 51);
  CHECK(traj.inputs.size() == 0);
  // states at steps 0, 5, 10, 20, 30, 40, 50
  REQUIRE(traj.states.size() == 7);
  for (const auto& [step, x] : traj.states)
    CHECK(phs::hamiltonian(sys, x) == doctest::Approx(traj.hamiltonian[step]).epsilon(1e-12));
}
