#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <sstream>
#include <vector>

#include "phs/core.hpp"
#include "phs/error.hpp"
#include "phs/grid1d.hpp"
#include "phs/system.hpp"

namespace phs {

namespace detail {

template <typename Scalar>
void add_block(std::vector<Eigen::Triplet<Scalar>>& trip, Eigen::Index row0, Eigen::Index col0,
               const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& block) {
  for (Eigen::Index r = 0; r < block.rows(); ++r)
    for (Eigen::Index c = 0; c < block.cols(); ++c)
      if (block(r, c) != Scalar(0)) trip.emplace_back(row0 + r, col0 + c, block(r, c));
}

/// Adds `block` at (row0, col0) and its exact negated transpose at (col0, row0).
template <typename Scalar>
void add_skew_pair(std::vector<Eigen::Triplet<Scalar>>& trip, Eigen::Index row0, Eigen::Index col0,
                   const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& block) {
  for (Eigen::Index r = 0; r < block.rows(); ++r)
    for (Eigen::Index c = 0; c < block.cols(); ++c)
      if (block(r, c) != Scalar(0)) {
        trip.emplace_back(row0 + r, col0 + c, block(r, c));
        trip.emplace_back(col0 + c, row0 + r, -block(r, c));
      }
}

}  // namespace detail

/// Assembles the discrete PH-ODE of a 1D model on a staggered grid.
///
/// States are ordered p block first, then q block, each by ascending
/// coordinate. The upper-right block of j_mat is
///   (I1_p (x) P1 + h I0_p (x) P0) / (4 h^2),
/// the lower-left block its negated transpose, so that
/// x' = j_mat grad H + b_mat u with grad H = q_weights x reproduces the
/// 1/(2h) stencil on co-energies. Ports are ordered (a, b); each carries an
/// input of width n_p. q_weights holds 2h * weight_at(psi) per state block.
template <typename Scalar>
DiscreteSystem<Scalar> assemble_1d(const ContinuousModel<Scalar>& model,
                                   const StaggeredGrid1D<Scalar>& grid) {
  using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  if (model.dimension != 1) throw AssemblyError("assemble_1d: model is not one-dimensional");
  {
    const auto violations = validate_model(model);
    if (!violations.empty()) {
      std::ostringstream os;
      os << "assemble_1d: invalid model:";
      for (const auto& v : violations) os << "\n  - " << v;
      throw AssemblyError(os.str());
    }
  }
  if (model.boundary_1d.at_a != port_kind_of(grid.family_at_a) ||
      model.boundary_1d.at_b != port_kind_of(grid.family_at_b)) {
    std::ostringstream os;
    os << "assemble_1d: boundary/grid family mismatch: grid owns a with family "
       << name(grid.family_at_a) << " (wants " << name(port_kind_of(grid.family_at_a))
       << " input) and b with family " << name(grid.family_at_b) << " (wants "
       << name(port_kind_of(grid.family_at_b)) << " input); boundary spec declares "
       << name(model.boundary_1d.at_a) << " at a and " << name(model.boundary_1d.at_b) << " at b";
    throw AssemblyError(os.str());
  }
  if (grid.interior_p.empty() || grid.interior_q.empty())
    throw AssemblyError("assemble_1d: grid has no interior point in one family");

  const auto& cs = model.coefficients;
  const Eigen::Index np = cs.np(), nq = cs.nq();
  const Scalar h = grid.h;
  const Eigen::Index n_ip = grid.n_interior(Family::P);
  const Eigen::Index n_iq = grid.n_interior(Family::Q);

  DiscreteSystem<Scalar> sys;
  sys.dimension = 1;
  sys.h1 = h;
  sys.n_states = n_ip * np + n_iq * nq;

  const Scalar tol = h / Scalar(2);
  auto interior_index = [tol](const std::vector<Scalar>& pts, Scalar x) -> Eigen::Index {
    for (size_t i = 0; i < pts.size(); ++i)
      if (std::abs(pts[i] - x) < tol) return static_cast<Eigen::Index>(i);
    return -1;
  };

  // State metadata: p blocks then q blocks, ascending coordinate.
  for (Eigen::Index i = 0; i < n_ip; ++i)
    sys.state_meta.push_back({Family::P,
                              {grid.interior_p[static_cast<size_t>(i)], Scalar(0)},
                              i * np,
                              np});
  for (Eigen::Index i = 0; i < n_iq; ++i)
    sys.state_meta.push_back({Family::Q,
                              {grid.interior_q[static_cast<size_t>(i)], Scalar(0)},
                              n_ip * np + i * nq,
                              nq});

  // Ports: endpoint a then endpoint b, both of width np.
  sys.port_meta.push_back({grid.family_at_a, port_kind_of(grid.family_at_a),
                           {grid.a, Scalar(0)}, 0, np, 0, 0});
  sys.port_meta.push_back({grid.family_at_b, port_kind_of(grid.family_at_b),
                           {grid.b, Scalar(0)}, np, np, 1, 0});

  const auto [p_left, p_right] = local_stencil_1d(cs, h, Family::P);    // np x nq, 1/2h folded in
  const auto [q_left, q_right] = local_stencil_1d(cs, h, Family::Q);    // nq x np
  const MatrixX force_in = MatrixX::Identity(np, np) / (2 * h);

  std::vector<Eigen::Triplet<Scalar>> jt, bt, wt;

  // Interior p rows: couple to the two q neighbours; boundary neighbours go
  // to b_mat. j_mat holds the 1/(4h^2)-scaled blocks acting on grad H.
  for (Eigen::Index i = 0; i < n_ip; ++i) {
    const Scalar x = grid.interior_p[static_cast<size_t>(i)];
    const Eigen::Index row0 = i * np;
    for (int side = -1; side <= 1; side += 2) {
      const Scalar xn = x + Scalar(side) * h;
      const MatrixX& stencil = side < 0 ? p_left : p_right;
      const Eigen::Index c = interior_index(grid.interior_q, xn);
      if (c >= 0) {
        // Pre-weight block is stencil (maps e_q); acting on grad H needs /2h.
        detail::add_skew_pair<Scalar>(jt, row0, n_ip * np + c * nq,
                                      MatrixX(stencil / (2 * h)));
      } else {
        const int port = std::abs(xn - grid.a) < tol ? 0 : 1;
        detail::add_block<Scalar>(bt, row0, sys.port_meta[static_cast<size_t>(port)].offset,
                                  force_in);
      }
    }
  }

  // Interior q rows: only their boundary-neighbour input columns remain to
  // assemble (the interior coupling is already present as the skew pair).
  for (Eigen::Index i = 0; i < n_iq; ++i) {
    const Scalar x = grid.interior_q[static_cast<size_t>(i)];
    const Eigen::Index row0 = n_ip * np + i * nq;
    for (int side = -1; side <= 1; side += 2) {
      const Scalar xn = x + Scalar(side) * h;
      if (interior_index(grid.interior_p, xn) >= 0) continue;
      const int port = std::abs(xn - grid.a) < tol ? 0 : 1;
      const MatrixX& stencil = side < 0 ? q_left : q_right;
      detail::add_block<Scalar>(bt, row0, sys.port_meta[static_cast<size_t>(port)].offset,
                                stencil);
    }
  }

  // Riemann-sum Hamiltonian weights: 2h * Q(psi) per interior point.
  for (const auto& s : sys.state_meta) {
    const auto& density = s.family == Family::P ? model.density_p : model.density_q;
    const MatrixX w = 2 * h * density.weight_at(s.position);
    detail::add_block<Scalar>(wt, s.offset, s.offset, w);
  }

  sys.j_mat.resize(sys.n_states, sys.n_states);
  sys.j_mat.setFromTriplets(jt.begin(), jt.end());
  sys.b_mat.resize(sys.n_states, 2 * np);
  sys.b_mat.setFromTriplets(bt.begin(), bt.end());
  sys.q_weights.resize(sys.n_states, sys.n_states);
  sys.q_weights.setFromTriplets(wt.begin(), wt.end());
  return sys;
}

/// Signals for the assembled ports, in port order.
template <typename Scalar>
std::vector<Signal<Scalar>> boundary_signals(const ContinuousModel<Scalar>& model,
                                             const DiscreteSystem<Scalar>& sys) {
  if (sys.dimension == 1)
    return {model.boundary_1d.signal_a, model.boundary_1d.signal_b};
  std::vector<Signal<Scalar>> sig(sys.port_meta.size());
  const Scalar tol = std::min(sys.h1, sys.h2) * Scalar(1e-9);
  std::vector<bool> used(model.boundary_2d.point_signals.size(), false);
  for (size_t p = 0; p < sys.port_meta.size(); ++p) {
    for (size_t o = 0; o < model.boundary_2d.point_signals.size(); ++o) {
      const auto& override_sig = model.boundary_2d.point_signals[o];
      if ((override_sig.position - sys.port_meta[p].position).norm() <= tol) {
        sig[p] = override_sig.signal;
        used[o] = true;
      }
    }
  }
  for (size_t o = 0; o < used.size(); ++o)
    if (!used[o]) {
      std::ostringstream os;
      os << "boundary signal at (" << model.boundary_2d.point_signals[o].position.x() << ", "
         << model.boundary_2d.point_signals[o].position.y()
         << ") does not coincide with any boundary grid point";
      throw AssemblyError(os.str());
    }
  return sig;
}

}  // namespace phs
