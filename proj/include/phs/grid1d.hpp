#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <utility>
#include <vector>

#include "phs/core.hpp"
#include "phs/error.hpp"

namespace phs {

/// Two interleaved 1D point families on [a, b]. The lattice has K half-steps
/// of size h = (b - a) / K; lattice site j sits at a + j*h and alternates
/// family starting with family_at_a. Each family advances in steps of 2h.
template <typename Scalar = double>
struct StaggeredGrid1D {
  Scalar a = 0, b = 0, h = 0;
  int half_steps = 0;  // K
  Family family_at_a = Family::P;
  Family family_at_b = Family::Q;

  std::vector<Scalar> points_p;    // all p points, ascending (may include endpoints)
  std::vector<Scalar> points_q;    // all q points, ascending
  std::vector<Scalar> interior_p;  // strictly inside (a, b)
  std::vector<Scalar> interior_q;

  Family family_at(int site) const {
    return (site % 2 == 0) ? family_at_a : other(family_at_a);
  }

  Scalar position(int site) const { return a + h * Scalar(site); }

  Eigen::Index n_interior(Family f) const {
    return static_cast<Eigen::Index>(f == Family::P ? interior_p.size() : interior_q.size());
  }
};

/// Builds the staggered partition of [a, b] with K half-steps. K >= 3 so
/// each family has at least one interior point; the family owning b falls
/// out of the parity of K.
template <typename Scalar>
StaggeredGrid1D<Scalar> build_grid_1d(Scalar a, Scalar b, int half_steps, Family family_at_a) {
  if (!std::isfinite(static_cast<double>(a)) || !std::isfinite(static_cast<double>(b)))
    throw AssemblyError("build_grid_1d: endpoints must be finite");
  if (!(b > a)) throw AssemblyError("build_grid_1d: requires b > a");
  if (half_steps < 3)
    throw AssemblyError("build_grid_1d: K = " + std::to_string(half_steps) +
                        " leaves fewer than one interior point per family (K >= 3 required)");

  StaggeredGrid1D<Scalar> g;
  g.a = a;
  g.b = b;
  g.half_steps = half_steps;
  g.h = (b - a) / Scalar(half_steps);
  g.family_at_a = family_at_a;
  g.family_at_b = (half_steps % 2 == 0) ? family_at_a : other(family_at_a);

  for (int j = 0; j <= half_steps; ++j) {
    const Scalar x = g.position(j);
    auto& pts = g.family_at(j) == Family::P ? g.points_p : g.points_q;
    pts.push_back(x);
    if (j > 0 && j < half_steps) {
      auto& interior = g.family_at(j) == Family::P ? g.interior_p : g.interior_q;
      interior.push_back(x);
    }
  }
  return g;
}

/// Neighbour coefficient blocks of the first-order Taylor stencil, returned
/// as (left, right) for a row of the given family:
///   q row:  ( (-P1^T - h P0^T) / 2h ,  (P1^T - h P0^T) / 2h )
///   p row:  ( ( h P0 - P1) / 2h     ,  (h P0 + P1) / 2h     )
/// With P0 = 0 the pair reduces to the centred difference.
template <typename Scalar>
std::pair<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>,
          Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>>
local_stencil_1d(const CoefficientSet<Scalar>& cs, Scalar h, Family target) {
  if (!(h > Scalar(0))) throw AssemblyError("local_stencil_1d: h must be positive");
  using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Scalar s = Scalar(1) / (2 * h);
  if (target == Family::Q) {
    const MatrixX p1t = cs.p1.transpose();
    const MatrixX p0t = cs.p0.transpose();
    return {s * (-p1t - h * p0t), s * (p1t - h * p0t)};
  }
  return {s * (h * cs.p0 - cs.p1), s * (h * cs.p0 + cs.p1)};
}

/// Integer connection-coefficient matrices of one family's interior rows
/// against the other family's interior points: i1 holds the derivative
/// pattern (-1 behind, +1 ahead), i0 the value pattern (+1 both sides).
/// Entries are exact small integers stored as Scalar.
template <typename Scalar>
struct ConnectionMatrices1D {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> i1;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> i0;
};

template <typename Scalar>
ConnectionMatrices1D<Scalar> connection_matrices_1d(const StaggeredGrid1D<Scalar>& grid,
                                                    Family rows) {
  const auto& row_pts = rows == Family::P ? grid.interior_p : grid.interior_q;
  const auto& col_pts = rows == Family::P ? grid.interior_q : grid.interior_p;
  const Eigen::Index nr = static_cast<Eigen::Index>(row_pts.size());
  const Eigen::Index nc = static_cast<Eigen::Index>(col_pts.size());

  ConnectionMatrices1D<Scalar> cm;
  cm.i1.setZero(nr, nc);
  cm.i0.setZero(nr, nc);
  const Scalar tol = grid.h / Scalar(2);
  for (Eigen::Index r = 0; r < nr; ++r) {
    for (Eigen::Index c = 0; c < nc; ++c) {
      const Scalar d = col_pts[static_cast<size_t>(c)] - row_pts[static_cast<size_t>(r)];
      if (std::abs(d - grid.h) < tol) {  // neighbour ahead
        cm.i1(r, c) = Scalar(1);
        cm.i0(r, c) = Scalar(1);
      } else if (std::abs(d + grid.h) < tol) {  // neighbour behind
        cm.i1(r, c) = Scalar(-1);
        cm.i0(r, c) = Scalar(1);
      }
    }
  }
  return cm;
}

using StaggeredGrid1Dd = StaggeredGrid1D<double>;

}  // namespace phs
