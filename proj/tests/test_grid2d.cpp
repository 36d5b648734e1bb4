#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <random>
#include <set>

#include "phs/grid2d.hpp"

using phs::build_grid_2d;
using phs::Edge;
using phs::Family;

TEST_CASE("N1=N2=3 grid with offsets (1,0)") {
  auto g = build_grid_2d(3.0, 3.0, 3, 3, 1, 0);
  CHECK(g.h1 == doctest::Approx(1.0));
  CHECK(g.h2 == doctest::Approx(1.0));

  // q points at (odd, even): single interior at (h1, 2h2)
  REQUIRE(g.interior_q.size() == 1);
  CHECK(g.interior_q[0].i == 1);
  CHECK(g.interior_q[0].j == 2);
  // p points at (even, odd): single interior at (2h1, h2)
  REQUIRE(g.interior_p.size() == 1);
  CHECK(g.interior_p[0].i == 2);
  CHECK(g.interior_p[0].j == 1);

  // q boundary on bottom (y=0) and right (x=3h1); p boundary on left and top
  for (const auto& pt : g.boundary_q) CHECK((pt.j == 0 || pt.i == 3));
  for (const auto& pt : g.boundary_p) CHECK((pt.i == 0 || pt.j == 3));

  // (h1, h2) has parity (odd, odd): belongs to neither family
  CHECK(!g.family_of_site(1, 1).has_value());

  CHECK(g.edge_owner[static_cast<int>(Edge::Left)] == Family::P);
  CHECK(g.edge_owner[static_cast<int>(Edge::Right)] == Family::Q);
  CHECK(g.edge_owner[static_cast<int>(Edge::Bottom)] == Family::Q);
  CHECK(g.edge_owner[static_cast<int>(Edge::Top)] == Family::P);
}

TEST_CASE("edge ownership over all offsets and parities") {
  // exhaustive: each edge owned by exactly one family, matching the parity rule
  for (int mq = 0; mq <= 1; ++mq)
    for (int nq = 0; nq <= 1; ++nq)
      for (int N1 : {4, 5})
        for (int N2 : {4, 5}) {
          const auto owners = phs::edge_owners(mq, nq, N1, N2);
          CHECK(owners[0] == (mq == 0 ? Family::Q : Family::P));
          CHECK(owners[1] == ((N1 % 2) == mq ? Family::Q : Family::P));
          CHECK(owners[2] == (nq == 0 ? Family::Q : Family::P));
          CHECK(owners[3] == ((N2 % 2) == nq ? Family::Q : Family::P));

          // owners agree with the actual boundary point families
          auto g = build_grid_2d(1.0, 1.0, N1, N2, mq, nq);
          for (const auto& pt : g.boundary_q) {
            if (pt.i == 0) CHECK(owners[0] == Family::Q);
            if (pt.i == N1) CHECK(owners[1] == Family::Q);
            if (pt.j == 0) CHECK(owners[2] == Family::Q);
            if (pt.j == N2) CHECK(owners[3] == Family::Q);
          }
          for (const auto& pt : g.boundary_p) {
            if (pt.i == 0) CHECK(owners[0] == Family::P);
            if (pt.i == N1) CHECK(owners[1] == Family::P);
            if (pt.j == 0) CHECK(owners[2] == Family::P);
            if (pt.j == N2) CHECK(owners[3] == Family::P);
          }
        }
}

TEST_CASE("q family owns bottom, top and right for (1,0) with N1 odd, N2 even") {
  auto g = build_grid_2d(1.0, 1.0, 5, 4, 1, 0);
  CHECK(g.edge_owner[static_cast<int>(Edge::Left)] == Family::P);
  CHECK(g.edge_owner[static_cast<int>(Edge::Right)] == Family::Q);
  CHECK(g.edge_owner[static_cast<int>(Edge::Bottom)] == Family::Q);
  CHECK(g.edge_owner[static_cast<int>(Edge::Top)] == Family::Q);
}

TEST_CASE("interior points have four diagonal neighbours of the other family") {
  std::mt19937 rng(9);
  for (int trial = 0; trial < 12; ++trial) {
    const int N1 = 3 + static_cast<int>(rng() % 8);
    const int N2 = 3 + static_cast<int>(rng() % 8);
    const int mq = static_cast<int>(rng() % 2), nq = static_cast<int>(rng() % 2);
    auto g = build_grid_2d(2.0, 1.0, N1, N2, mq, nq);

    std::set<std::pair<int, int>> p_sites, q_sites;
    for (const auto& pt : g.interior_p) p_sites.insert({pt.i, pt.j});
    for (const auto& pt : g.boundary_p) p_sites.insert({pt.i, pt.j});
    for (const auto& pt : g.interior_q) q_sites.insert({pt.i, pt.j});
    for (const auto& pt : g.boundary_q) q_sites.insert({pt.i, pt.j});

    // families are disjoint
    for (const auto& s : p_sites) CHECK(!q_sites.count(s));

    auto check_interior = [&](const auto& pts, const std::set<std::pair<int, int>>& others) {
      for (const auto& pt : pts) {
        int found = 0;
        for (int di = -1; di <= 1; di += 2)
          for (int dj = -1; dj <= 1; dj += 2) {
            const int ni = pt.i + di, nj = pt.j + dj;
            CHECK(g.in_lattice(ni, nj));
            found += others.count({ni, nj}) ? 1 : 0;
          }
        CHECK(found == 4);
      }
    };
    check_interior(g.interior_p, q_sites);
    check_interior(g.interior_q, p_sites);
  }
}

TEST_CASE("small or invalid grids are rejected") {
  CHECK_THROWS_AS(build_grid_2d(1.0, 1.0, 2, 5, 0, 0), phs::AssemblyError);
  CHECK_THROWS_AS(build_grid_2d(1.0, 1.0, 5, 2, 0, 0), phs::AssemblyError);
  CHECK_THROWS_AS(build_grid_2d(0.0, 1.0, 5, 5, 0, 0), phs::AssemblyError);
  CHECK_THROWS_AS(build_grid_2d(1.0, 1.0, 5, 5, 2, 0), phs::AssemblyError);
}

TEST_CASE("bilinear stencil reconstructs linear fields") {
  auto w = phs::stencil_coefficients_2d(1.0, 1.0);
  // f = xi1 around (0,0): corners (-1,-1),(1,-1),(-1,1),(1,1)
  const double f[4] = {-1.0, 1.0, -1.0, 1.0};
  double value = 0, d1 = 0, d2 = 0;
  for (int c = 0; c < 4; ++c) {
    value += w.value[c] * f[c];
    d1 += w.d1[c] * f[c];
    d2 += w.d2[c] * f[c];
  }
  CHECK(value == 0.0);
  CHECK(d1 == 1.0);
  CHECK(d2 == 0.0);
}

TEST_CASE("bilinear stencil on the pure cross term") {
  auto w = phs::stencil_coefficients_2d(0.7, 0.3);
  // f = xi1 * xi2 at corners (+-0.7, +-0.3)
  double value = 0, d1 = 0, d2 = 0;
  int c = 0;
  for (double y : {-0.3, 0.3})
    for (double x : {-0.7, 0.7}) {
      const double f = x * y;
      value += w.value[c] * f;
      d1 += w.d1[c] * f;
      d2 += w.d2[c] * f;
      ++c;
    }
  CHECK(value == 0.0);
  CHECK(d1 == 0.0);
  CHECK(d2 == 0.0);
}

TEST_CASE("bilinear stencil is exact for random bilinear fields") {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> coef(-1.0, 1.0), step(0.05, 2.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const double c0 = coef(rng), c1 = coef(rng), c2 = coef(rng), c3 = coef(rng);
    const double h1 = step(rng), h2 = step(rng);
    const double a = coef(rng), b = coef(rng);
    auto f = [&](double x, double y) { return c0 + c1 * x + c2 * y + c3 * x * y; };

    auto w = phs::stencil_coefficients_2d(h1, h2);
    double value = 0, d1 = 0, d2 = 0;
    int c = 0;
    for (double dy : {-h2, h2})
      for (double dx : {-h1, h1}) {
        const double fv = f(a + dx, b + dy);
        value += w.value[c] * fv;
        d1 += w.d1[c] * fv;
        d2 += w.d2[c] * fv;
        ++c;
      }
    const double scale = 1.0 + std::abs(f(a, b));
    CHECK(std::abs(value - f(a, b)) <= 1e-13 * scale);
    CHECK(std::abs(d1 - (c1 + c3 * b)) <= 1e-13 * scale);
    CHECK(std::abs(d2 - (c2 + c3 * a)) <= 1e-13 * scale);
  }
}

TEST_CASE("connection matrices: 2D duality relations") {
  auto g = build_grid_2d(1.0, 1.0, 6, 5, 0, 1);
  auto cp = phs::connection_matrices_2d(g, Family::P);
  auto cq = phs::connection_matrices_2d(g, Family::Q);
  CHECK(cp.i1 == Eigen::MatrixXd(-cq.i1.transpose()));
  CHECK(cp.i2 == Eigen::MatrixXd(-cq.i2.transpose()));
  CHECK(cp.i0 == Eigen::MatrixXd(cq.i0.transpose()));
}
