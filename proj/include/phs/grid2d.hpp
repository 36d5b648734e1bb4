#pragma once

#include <Eigen/Dense>

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "phs/core.hpp"
#include "phs/error.hpp"

namespace phs {

/// Which family's points populate each rectangle edge. A pure function of
/// the offsets and the parities of N1, N2: the low edge of an axis is owned
/// by the family whose offset is 0 there, the high edge by the family whose
/// offset matches the parity of N along that axis.
inline std::array<Family, 4> edge_owners(int m_q, int n_q, int N1, int N2) {
  auto owner = [](int offset_q, int site) {
    return (site % 2) == offset_q ? Family::Q : Family::P;
  };
  return {owner(m_q, 0), owner(m_q, N1), owner(n_q, 0), owner(n_q, N2)};
}

/// Two offset rectangular point families on [0, L1] x [0, L2]. Lattice site
/// (i, j) sits at (i*h1, j*h2); it belongs to the q family when
/// (i, j) = (2m + m_q, 2n + n_q), to the p family with the complementary
/// offsets, and to neither family when the parities are mixed.
template <typename Scalar = double>
struct StaggeredGrid2D {
  struct Point {
    int i = 0, j = 0;
    Eigen::Vector2<Scalar> position{0, 0};
    bool boundary = false;
    unsigned edge_mask = 0;  // bits: left, right, bottom, top
  };

  Scalar L1 = 0, L2 = 0, h1 = 0, h2 = 0;
  int N1 = 0, N2 = 0;
  int m_q = 0, n_q = 0;

  std::vector<Point> interior_p, interior_q;  // sorted by (j, i)
  std::vector<Point> boundary_p, boundary_q;  // sorted by (j, i)
  std::array<Family, 4> edge_owner{};

  int m_p() const { return 1 - m_q; }
  int n_p() const { return 1 - n_q; }

  /// Family of a lattice site, or nullopt when the parities match neither.
  std::optional<Family> family_of_site(int i, int j) const {
    const bool iq = (i % 2) == m_q, jq = (j % 2) == n_q;
    if (iq && jq) return Family::Q;
    if (!iq && !jq) return Family::P;
    return std::nullopt;
  }

  bool in_lattice(int i, int j) const { return i >= 0 && i <= N1 && j >= 0 && j <= N2; }
};

template <typename Scalar>
StaggeredGrid2D<Scalar> build_grid_2d(Scalar L1, Scalar L2, int N1, int N2, int m_q, int n_q) {
  if (!(L1 > Scalar(0)) || !(L2 > Scalar(0)))
    throw AssemblyError("build_grid_2d: side lengths must be positive");
  if (N1 < 3 || N2 < 3)
    throw AssemblyError("build_grid_2d: N1, N2 >= 3 required (got " + std::to_string(N1) + ", " +
                        std::to_string(N2) + ")");
  if ((m_q != 0 && m_q != 1) || (n_q != 0 && n_q != 1))
    throw AssemblyError("build_grid_2d: offsets must be 0 or 1");

  StaggeredGrid2D<Scalar> g;
  g.L1 = L1;
  g.L2 = L2;
  g.N1 = N1;
  g.N2 = N2;
  g.h1 = L1 / Scalar(N1);
  g.h2 = L2 / Scalar(N2);
  g.m_q = m_q;
  g.n_q = n_q;
  g.edge_owner = edge_owners(m_q, n_q, N1, N2);

  for (int j = 0; j <= N2; ++j) {
    for (int i = 0; i <= N1; ++i) {
      const auto fam = g.family_of_site(i, j);
      if (!fam) continue;
      typename StaggeredGrid2D<Scalar>::Point pt;
      pt.i = i;
      pt.j = j;
      pt.position = {g.h1 * Scalar(i), g.h2 * Scalar(j)};
      pt.edge_mask = (i == 0 ? 1u : 0u) | (i == N1 ? 2u : 0u) | (j == 0 ? 4u : 0u) |
                     (j == N2 ? 8u : 0u);
      pt.boundary = pt.edge_mask != 0;
      auto& bucket = pt.boundary ? (*fam == Family::P ? g.boundary_p : g.boundary_q)
                                 : (*fam == Family::P ? g.interior_p : g.interior_q);
      bucket.push_back(pt);
    }
  }
  return g;
}

/// Per-corner weights of the bilinear (crossed-derivative Taylor) stencil
/// around a centre point, corners ordered (--, +-, -+, ++): value weights
/// 1/4 each, ξ1-derivative weights ±1/(4 h1) and ξ2-derivative weights
/// ±1/(4 h2), positive when the corner is ahead along that axis. Exact for
/// bilinear fields.
template <typename Scalar>
struct StencilWeights2D {
  std::array<Scalar, 4> value;
  std::array<Scalar, 4> d1;
  std::array<Scalar, 4> d2;
};

template <typename Scalar>
StencilWeights2D<Scalar> stencil_coefficients_2d(Scalar h1, Scalar h2) {
  if (!(h1 > Scalar(0)) || !(h2 > Scalar(0)))
    throw AssemblyError("stencil_coefficients_2d: h1, h2 must be positive");
  StencilWeights2D<Scalar> w;
  const Scalar quarter = Scalar(0.25);
  const Scalar s1 = Scalar(1) / (4 * h1);
  const Scalar s2 = Scalar(1) / (4 * h2);
  //                      --   +-   -+   ++
  w.value = {quarter, quarter, quarter, quarter};
  w.d1 = {-s1, s1, -s1, s1};
  w.d2 = {-s2, -s2, s2, s2};
  return w;
}

/// Integer connection-coefficient matrices for one family's interior rows
/// against the other family's interior points. i1/i2 carry the "ahead is
/// positive" sign along ξ1/ξ2; i0 is +1 for every diagonal neighbour.
template <typename Scalar>
struct ConnectionMatrices2D {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> i1, i2, i0;
};

template <typename Scalar>
ConnectionMatrices2D<Scalar> connection_matrices_2d(const StaggeredGrid2D<Scalar>& grid,
                                                    Family rows) {
  const auto& row_pts = rows == Family::P ? grid.interior_p : grid.interior_q;
  const auto& col_pts = rows == Family::P ? grid.interior_q : grid.interior_p;
  const Eigen::Index nr = static_cast<Eigen::Index>(row_pts.size());
  const Eigen::Index nc = static_cast<Eigen::Index>(col_pts.size());

  ConnectionMatrices2D<Scalar> cm;
  cm.i1.setZero(nr, nc);
  cm.i2.setZero(nr, nc);
  cm.i0.setZero(nr, nc);
  for (Eigen::Index r = 0; r < nr; ++r) {
    for (Eigen::Index c = 0; c < nc; ++c) {
      const int di = col_pts[static_cast<size_t>(c)].i - row_pts[static_cast<size_t>(r)].i;
      const int dj = col_pts[static_cast<size_t>(c)].j - row_pts[static_cast<size_t>(r)].j;
      if ((di == 1 || di == -1) && (dj == 1 || dj == -1)) {
        cm.i1(r, c) = Scalar(di);
        cm.i2(r, c) = Scalar(dj);
        cm.i0(r, c) = Scalar(1);
      }
    }
  }
  return cm;
}

using StaggeredGrid2Dd = StaggeredGrid2D<double>;

}  // namespace phs
