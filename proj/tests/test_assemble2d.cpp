#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <random>

#include "phs/assemble2d.hpp"
#include "phs/models.hpp"
#include "test_util.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using phs::assemble_2d;
using phs::build_grid_2d;
using phs::Family;
using phs::PortKind;

namespace {

MatrixXd dense(const Eigen::SparseMatrix<double>& m) { return MatrixXd(m); }

phs::ContinuousModeld wave2d_with_edges(std::array<PortKind, 4> kinds) {
  auto model = phs::wave_2d<double>(1.0, 1.0, 3.0, 3.0);
  model.boundary_2d.edge_kind = kinds;
  return model;
}

}  // namespace

TEST_CASE("2D scalar wave on the 3x3 grid: hand-checked stencil row") {
  // offsets (1,0): q owns bottom+right, p owns left+top
  auto model = wave2d_with_edges({PortKind::PEffort, PortKind::QEffort, PortKind::QEffort,
                                  PortKind::PEffort});
  auto grid = build_grid_2d(3.0, 3.0, 3, 3, 1, 0);
  auto sys = assemble_2d(model, grid);
  const double h1 = 1.0, h2 = 1.0, area = 4 * h1 * h2;

  // single interior p at (2,1), single interior q at (1,2)
  REQUIRE(sys.n_states == 1 + 2);
  MatrixXd j = dense(sys.j_mat);
  // q row block for p neighbour at (+h1, -h2) relative to q(1,2):
  // (s1 h2 P1^T + s2 h1 P2^T)/area acting on grad H (extra 1/area)
  const double s1 = 1.0, s2 = -1.0;
  CHECK(j(1, 0) == doctest::Approx(s1 * h2 / (area * area)));
  CHECK(j(2, 0) == doctest::Approx(s2 * h1 / (area * area)));
  // skew partner
  CHECK(j(0, 1) == doctest::Approx(-s1 * h2 / (area * area)));
  CHECK(j(0, 2) == doctest::Approx(-s2 * h1 / (area * area)));

  // structural audit: each interior state row touches 4 neighbour blocks
  // (j_mat blocks + b_mat blocks)
  MatrixXd b = dense(sys.b_mat);
  int p_blocks = 0;
  for (const auto& port : sys.port_meta)
    if (b.block(0, port.offset, 1, port.size).cwiseAbs().maxCoeff() > 0) ++p_blocks;
  CHECK(p_blocks + 1 == 4);  // p row: 1 interior q neighbour + 3 port columns

  // force ports enter with identity / area
  for (const auto& port : sys.port_meta) {
    if (port.kind != PortKind::QEffort) continue;
    const MatrixXd col = b.block(0, port.offset, 1, port.size);
    if (col.cwiseAbs().maxCoeff() > 0) CHECK(col(0, 0) == doctest::Approx(1.0 / area));
  }
}

TEST_CASE("every interior row of a random model touches exactly four neighbour blocks") {
  std::mt19937 rng(31);
  for (int trial = 0; trial < 6; ++trial) {
    auto model = testutil::random_model(rng, 2);
    const int N1 = 3 + static_cast<int>(rng() % 6), N2 = 3 + static_cast<int>(rng() % 6);
    const int mq = static_cast<int>(rng() % 2), nq = static_cast<int>(rng() % 2);
    auto grid = build_grid_2d(model.L1, model.L2, N1, N2, mq, nq);
    for (int e = 0; e < 4; ++e)
      model.boundary_2d.edge_kind[e] = phs::port_kind_of(grid.edge_owner[e]);
    auto sys = assemble_2d(model, grid);

    MatrixXd j = dense(sys.j_mat);
    MatrixXd b = dense(sys.b_mat);
    for (const auto& s : sys.state_meta) {
      int blocks = 0;
      for (const auto& other : sys.state_meta) {
        if (other.family == s.family) continue;
        if (j.block(s.offset, other.offset, s.size, other.size).cwiseAbs().maxCoeff() > 0)
          ++blocks;
      }
      for (const auto& port : sys.port_meta)
        if (b.block(s.offset, port.offset, s.size, port.size).cwiseAbs().maxCoeff() > 0) ++blocks;
      CHECK(blocks == 4);
    }
  }
}

TEST_CASE("assembled 2D systems are exactly skew") {
  std::mt19937 rng(37);
  for (int trial = 0; trial < 10; ++trial) {
    auto model = testutil::random_model(rng, 2);
    const int N1 = 3 + static_cast<int>(rng() % 10), N2 = 3 + static_cast<int>(rng() % 10);
    const int mq = static_cast<int>(rng() % 2), nq = static_cast<int>(rng() % 2);
    auto grid = build_grid_2d(model.L1, model.L2, N1, N2, mq, nq);
    for (int e = 0; e < 4; ++e)
      model.boundary_2d.edge_kind[e] = phs::port_kind_of(grid.edge_owner[e]);
    auto sys = assemble_2d(model, grid);

    Eigen::SparseMatrix<double> sum =
        sys.j_mat + Eigen::SparseMatrix<double>(sys.j_mat.transpose());
    CHECK(dense(sum).cwiseAbs().maxCoeff() == 0.0);

    // coupling only p <-> q: same-family blocks stay empty
    MatrixXd j = dense(sys.j_mat);
    for (const auto& r : sys.state_meta)
      for (const auto& c : sys.state_meta)
        if (r.family == c.family)
          CHECK(j.block(r.offset, c.offset, r.size, c.size).cwiseAbs().maxCoeff() == 0.0);

    std::normal_distribution<double> dist;
    VectorXd x = VectorXd::NullaryExpr(sys.n_states, [&] { return dist(rng); });
    VectorXd g = sys.q_weights * x;
    CHECK(std::abs(g.dot(sys.j_mat * g)) <=
          1e-12 * std::max(1.0, g.norm() * (sys.j_mat * g).norm()));
  }
}

TEST_CASE("constant q co-energy gives zero interior p rows when P0 = 0") {
  // binary-friendly sizes keep the cancellation exact
  auto model = phs::wave_2d<double>(1.0, 1.0, 4.0, 4.0);
  auto grid = build_grid_2d(4.0, 4.0, 8, 8, 1, 1);  // all edges p-owned
  model.boundary_2d.edge_kind = {PortKind::PEffort, PortKind::PEffort, PortKind::PEffort,
                                 PortKind::PEffort};
  auto sys = assemble_2d(model, grid);

  // e_q = (1, 2) everywhere: x_q = Q_q^{-1} e_q = e_q (unit modulus)
  VectorXd x = VectorXd::Zero(sys.n_states);
  for (const auto& s : sys.state_meta)
    if (s.family == Family::Q) {
      x(s.offset + 0) = 1.0;
      x(s.offset + 1) = 2.0;
    }
  VectorXd xdot = sys.j_mat * (sys.q_weights * x);
  // with all q points interior (all-p edges), every p row sees four equal
  // corners and cancels exactly
  for (const auto& s : sys.state_meta)
    if (s.family == Family::P) CHECK(xdot(s.offset) == 0.0);
}

TEST_CASE("bilinear co-energy fields are reconstructed exactly through assembly") {
  // All edges p-owned so q rows receive boundary samples through velocity
  // ports and p rows couple only to interior q states.
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  auto model = testutil::random_model(rng, 2);
  model.L1 = 2.0;
  model.L2 = 1.5;
  const int N1 = 6, N2 = 4;
  auto grid = build_grid_2d(model.L1, model.L2, N1, N2, 1, 1);
  for (int e = 0; e < 4; ++e)
    model.boundary_2d.edge_kind[e] = phs::port_kind_of(grid.edge_owner[e]);
  auto sys = assemble_2d(model, grid);

  const Eigen::Index np = model.coefficients.np(), nq = model.coefficients.nq();
  const auto& P1 = model.coefficients.p1;
  const auto& P2 = *model.coefficients.p2;
  const auto& P0 = model.coefficients.p0;

  // bilinear p co-energy field, one coefficient set per component
  MatrixXd C = MatrixXd::NullaryExpr(np, 4, [&] { return coef(rng); });
  auto e_p = [&](double x, double y) {
    return VectorXd(C.col(0) + C.col(1) * x + C.col(2) * y + C.col(3) * (x * y));
  };
  auto d1_e_p = [&](double x, double y) {
    (void)x;
    return VectorXd(C.col(1) + C.col(3) * y);
  };
  auto d2_e_p = [&](double x, double y) {
    (void)y;
    return VectorXd(C.col(2) + C.col(3) * x);
  };

  // states holding the field: x_p = Q_p^{-1} e_p; ports carrying e_p samples
  VectorXd x = VectorXd::Zero(sys.n_states);
  for (const auto& s : sys.state_meta)
    if (s.family == Family::P) {
      const MatrixXd w = model.density_p.weight_at(s.position);
      x.segment(s.offset, s.size) = w.llt().solve(e_p(s.position.x(), s.position.y()));
    }
  VectorXd u = VectorXd::Zero(sys.b_mat.cols());
  for (const auto& port : sys.port_meta)
    u.segment(port.offset, port.size) = e_p(port.position.x(), port.position.y());

  const VectorXd xdot = sys.j_mat * (sys.q_weights * x) + sys.b_mat * u;
  for (const auto& s : sys.state_meta) {
    if (s.family != Family::Q) continue;
    const double px = s.position.x(), py = s.position.y();
    const VectorXd want = P1.transpose() * d1_e_p(px, py) + P2.transpose() * d2_e_p(px, py) -
                          P0.transpose() * e_p(px, py);
    const VectorXd got = xdot.segment(s.offset, nq);
    CHECK((got - want).norm() <= 1e-12 * (1.0 + want.norm()));
  }
}

TEST_CASE("a boundary point next to two interior states yields one multi-row column") {
  auto model = phs::wave_2d<double>(1.0, 1.0, 5.0, 4.0);
  auto grid = build_grid_2d(5.0, 4.0, 5, 4, 1, 0);
  model.boundary_2d.edge_kind = {PortKind::PEffort, PortKind::QEffort, PortKind::QEffort,
                                 PortKind::QEffort};
  auto sys = assemble_2d(model, grid);
  const double area = 4 * grid.h1 * grid.h2;

  // q point (3,0) has interior p neighbours at (2,1) and (4,1): one input
  // column with two identity row blocks
  const auto port = std::find_if(sys.port_meta.begin(), sys.port_meta.end(), [&](const auto& p) {
    return p.family == Family::Q && p.position.x() == doctest::Approx(3 * grid.h1) &&
           p.position.y() == 0.0;
  });
  REQUIRE(port != sys.port_meta.end());
  MatrixXd col = dense(sys.b_mat).col(port->offset);
  int hits = 0;
  for (const auto& s : sys.state_meta) {
    if (s.family != Family::P) continue;
    const double v = col(s.offset);
    if (v != 0.0) {
      CHECK(v == doctest::Approx(1.0 / area));
      ++hits;
    }
  }
  CHECK(hits == 2);
}

TEST_CASE("edge/boundary-spec mismatches are reported with the owning family") {
  auto model = wave2d_with_edges({PortKind::QEffort, PortKind::QEffort, PortKind::QEffort,
                                  PortKind::QEffort});
  auto grid = build_grid_2d(3.0, 3.0, 3, 3, 1, 0);  // left edge is p-owned
  try {
    assemble_2d(model, grid);
    FAIL("expected AssemblyError");
  } catch (const phs::AssemblyError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("left") != std::string::npos);
    CHECK(msg.find("owned by family p") != std::string::npos);
  }
}

TEST_CASE("2D weights fold in the cell area") {
  auto model = wave2d_with_edges({PortKind::PEffort, PortKind::QEffort, PortKind::QEffort,
                                  PortKind::PEffort});
  auto grid = build_grid_2d(3.0, 3.0, 3, 3, 1, 0);
  auto sys = assemble_2d(model, grid);
  MatrixXd w = dense(sys.q_weights);
  CHECK(w(0, 0) == doctest::Approx(4 * grid.h1 * grid.h2 * 1.0));  // p block: 1/rho
  CHECK(w(1, 1) == doctest::Approx(4 * grid.h1 * grid.h2 * 1.0));  // q block: modulus
}
