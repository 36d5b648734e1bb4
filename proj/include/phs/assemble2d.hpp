#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <map>
#include <sstream>
#include <utility>
#include <vector>

#include "phs/assemble1d.hpp"  // detail::add_block / add_skew_pair
#include "phs/core.hpp"
#include "phs/error.hpp"
#include "phs/grid2d.hpp"
#include "phs/system.hpp"

namespace phs {

/// Assembles the discrete PH-ODE of a 2D model on the offset rectangular
/// grids. Interior states are ordered p block then q block, each sorted by
/// (ξ2, ξ1). Each interior point couples to its four diagonal neighbours:
/// interior neighbours contribute j_mat blocks
///   (±h2 P1 ± h1 P2 + h1 h2 P0) / (4 h1 h2)^2        (p rows, on grad H)
/// with the lower-left block the exact negated transpose; boundary
/// neighbours contribute b_mat columns, Identity(n_p)/(4 h1 h2) for force
/// inputs at q-family points and the signed stencil block
///   (±h2 P1^T ± h1 P2^T − h1 h2 P0^T) / (4 h1 h2)    (into q rows)
/// for prescribed p co-energies at p-family points. q_weights holds
/// 4 h1 h2 * weight_at(psi) per interior point. Ports are the boundary
/// points of both families sorted by (ξ2, ξ1), width n_p each.
template <typename Scalar>
DiscreteSystem<Scalar> assemble_2d(const ContinuousModel<Scalar>& model,
                                   const StaggeredGrid2D<Scalar>& grid) {
  using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  if (model.dimension != 2) throw AssemblyError("assemble_2d: model is not two-dimensional");
  {
    const auto violations = validate_model(model);
    if (!violations.empty()) {
      std::ostringstream os;
      os << "assemble_2d: invalid model:";
      for (const auto& v : violations) os << "\n  - " << v;
      throw AssemblyError(os.str());
    }
  }
  for (const Edge e : {Edge::Left, Edge::Right, Edge::Bottom, Edge::Top}) {
    const Family owner = grid.edge_owner[static_cast<size_t>(e)];
    const PortKind wanted = model.boundary_2d.at(e);
    if (port_kind_of(owner) != wanted) {
      std::ostringstream os;
      os << "assemble_2d: edge '" << name(e) << "' requests a " << name(wanted)
         << " input but is owned by family " << name(owner) << " (offsets m_q=" << grid.m_q
         << ", n_q=" << grid.n_q << ", N1=" << grid.N1 << ", N2=" << grid.N2
         << "); pick offsets/parities so the owning family matches";
      throw AssemblyError(os.str());
    }
  }
  if (grid.interior_p.empty() || grid.interior_q.empty())
    throw AssemblyError("assemble_2d: grid has no interior point in one family");

  const auto& cs = model.coefficients;
  const Eigen::Index np = cs.np(), nq = cs.nq();
  const Scalar h1 = grid.h1, h2 = grid.h2;
  const MatrixX& P1 = cs.p1;
  const MatrixX& P2 = *cs.p2;
  const MatrixX& P0 = cs.p0;
  const Scalar area = 4 * h1 * h2;

  const Eigen::Index n_ip = static_cast<Eigen::Index>(grid.interior_p.size());
  const Eigen::Index n_iq = static_cast<Eigen::Index>(grid.interior_q.size());

  DiscreteSystem<Scalar> sys;
  sys.dimension = 2;
  sys.h1 = h1;
  sys.h2 = h2;
  sys.n_states = n_ip * np + n_iq * nq;

  // Interior state lookup by lattice site.
  std::map<std::pair<int, int>, Eigen::Index> p_index, q_index;
  for (Eigen::Index k = 0; k < n_ip; ++k) {
    const auto& pt = grid.interior_p[static_cast<size_t>(k)];
    p_index[{pt.i, pt.j}] = k;
    sys.state_meta.push_back({Family::P, pt.position, k * np, np});
  }
  for (Eigen::Index k = 0; k < n_iq; ++k) {
    const auto& pt = grid.interior_q[static_cast<size_t>(k)];
    q_index[{pt.i, pt.j}] = k;
    sys.state_meta.push_back({Family::Q, pt.position, n_ip * np + k * nq, nq});
  }

  // Ports: every boundary point of either family, sorted by (j, i).
  struct PortPoint {
    typename StaggeredGrid2D<Scalar>::Point pt;
    Family family;
  };
  std::vector<PortPoint> port_points;
  for (const auto& pt : grid.boundary_p) port_points.push_back({pt, Family::P});
  for (const auto& pt : grid.boundary_q) port_points.push_back({pt, Family::Q});
  std::sort(port_points.begin(), port_points.end(), [](const PortPoint& a, const PortPoint& b) {
    return a.pt.j != b.pt.j ? a.pt.j < b.pt.j : a.pt.i < b.pt.i;
  });
  std::map<std::pair<int, int>, Eigen::Index> port_index;
  for (size_t k = 0; k < port_points.size(); ++k) {
    const auto& pp = port_points[k];
    port_index[{pp.pt.i, pp.pt.j}] = static_cast<Eigen::Index>(k);
    sys.port_meta.push_back({pp.family, port_kind_of(pp.family), pp.pt.position,
                             static_cast<Eigen::Index>(k) * np, np, -1, pp.pt.edge_mask});
  }

  std::vector<Eigen::Triplet<Scalar>> jt, bt, wt;
  const MatrixX force_in = MatrixX::Identity(np, np) / area;

  // Interior p rows: diagonal q neighbours are states or force ports.
  for (Eigen::Index k = 0; k < n_ip; ++k) {
    const auto& pt = grid.interior_p[static_cast<size_t>(k)];
    const Eigen::Index row0 = k * np;
    for (int dj = -1; dj <= 1; dj += 2) {
      for (int di = -1; di <= 1; di += 2) {
        const int ni = pt.i + di, nj = pt.j + dj;
        const MatrixX block =
            (Scalar(di) * h2 * P1 + Scalar(dj) * h1 * P2 + h1 * h2 * P0) / (area * area);
        if (auto it = q_index.find({ni, nj}); it != q_index.end()) {
          detail::add_skew_pair<Scalar>(jt, row0, n_ip * np + it->second * nq, block);
        } else {
          const Eigen::Index port = port_index.at({ni, nj});
          detail::add_block<Scalar>(bt, row0, port * np, force_in);
        }
      }
    }
  }

  // Interior q rows: remaining boundary p neighbours become input columns
  // carrying the signed stencil block.
  for (Eigen::Index k = 0; k < n_iq; ++k) {
    const auto& pt = grid.interior_q[static_cast<size_t>(k)];
    const Eigen::Index row0 = n_ip * np + k * nq;
    for (int dj = -1; dj <= 1; dj += 2) {
      for (int di = -1; di <= 1; di += 2) {
        const int ni = pt.i + di, nj = pt.j + dj;
        if (p_index.count({ni, nj})) continue;
        const Eigen::Index port = port_index.at({ni, nj});
        const MatrixX block = (Scalar(di) * h2 * P1.transpose() + Scalar(dj) * h1 * P2.transpose() -
                               h1 * h2 * P0.transpose()) /
                              area;
        detail::add_block<Scalar>(bt, row0, port * np, block);
      }
    }
  }

  // Riemann-sum Hamiltonian weights over the cell area 4 h1 h2.
  for (const auto& s : sys.state_meta) {
    const auto& density = s.family == Family::P ? model.density_p : model.density_q;
    detail::add_block<Scalar>(wt, s.offset, s.offset, MatrixX(area * density.weight_at(s.position)));
  }

  sys.j_mat.resize(sys.n_states, sys.n_states);
  sys.j_mat.setFromTriplets(jt.begin(), jt.end());
  sys.b_mat.resize(sys.n_states, static_cast<Eigen::Index>(port_points.size()) * np);
  sys.b_mat.setFromTriplets(bt.begin(), bt.end());
  sys.q_weights.resize(sys.n_states, sys.n_states);
  sys.q_weights.setFromTriplets(wt.begin(), wt.end());
  return sys;
}

}  // namespace phs
