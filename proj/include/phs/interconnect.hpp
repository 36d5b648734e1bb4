#pragma once

#include <Eigen/Sparse>

#include <cmath>
#include <sstream>
#include <vector>

#include "phs/core.hpp"
#include "phs/error.hpp"
#include "phs/system.hpp"

namespace phs {

/// Pairs the b-side p-effort (velocity) input of system 1 with the a-side
/// q-effort (force) input of system 2 under the power-preserving convention
///   u_p^{b1} = y_p^{a2},   u_q^{a2} = -y_q^{b1}.
/// The two subsystem grids interleave across the interface: system 2 starts
/// one half-step below system 1's end point, so each port point coincides
/// with the partner's adjacent interior state point and the composite equals
/// a direct assembly of the union domain.
struct PortPairing {
  size_t port1 = 1;  // index into sys1.port_meta (its b-side velocity input)
  size_t port2 = 0;  // index into sys2.port_meta (its a-side force input)
};

/// Power-preserving interconnection of two 1D discrete systems sharing an
/// interleaved interface. Composite state ordering is (p1, p2, q1, q2); the
/// eliminated ports' input columns form the new coupling blocks
///   x1' += B1c B2c^T grad H2,   x2' -= B2c B1c^T grad H1,
/// so the composite interconnection matrix stays skew-symmetric bit for bit.
/// Remaining ports pass through, system 1's first.
template <typename Scalar>
DiscreteSystem<Scalar> interconnect(const DiscreteSystem<Scalar>& sys1,
                                    const DiscreteSystem<Scalar>& sys2,
                                    const PortPairing& pairing) {
  using SparseMat = Eigen::SparseMatrix<Scalar>;

  if (sys1.dimension != 1 || sys2.dimension != 1)
    throw AssemblyError("interconnect: only chains of 1D subsystems are supported");
  if (pairing.port1 >= sys1.port_meta.size() || pairing.port2 >= sys2.port_meta.size())
    throw AssemblyError("interconnect: port index out of range");

  const auto& port1 = sys1.port_meta[pairing.port1];
  const auto& port2 = sys2.port_meta[pairing.port2];

  if (port1.kind == port2.kind)
    throw AssemblyError("interconnect: complementary families required at the paired ports");
  if (port1.kind != PortKind::PEffort || port2.kind != PortKind::QEffort)
    throw AssemblyError(
        "interconnect: expected system 1's p-effort (velocity) input paired with system 2's "
        "q-effort (force) input");
  if (port1.side != 1 || port2.side != 0)
    throw AssemblyError("interconnect: pair system 1's b-side port with system 2's a-side port");
  if (port1.size != port2.size)
    throw AssemblyError("interconnect: paired port block dimensions differ (" +
                        std::to_string(port1.size) + " vs " + std::to_string(port2.size) + ")");

  const Eigen::Index np = sys1.block_size(Family::P);
  const Eigen::Index nq = sys1.block_size(Family::Q);
  if (np != sys2.block_size(Family::P) || nq != sys2.block_size(Family::Q))
    throw AssemblyError("interconnect: subsystems carry different coefficient dimensions");

  const Scalar h = sys1.h1;
  if (std::abs(sys2.h1 - h) > Scalar(1e-12) * h)
    throw AssemblyError("interconnect: subsystem grids have different spacing");
  // Interleaved interface: the force port sits one half-step below the
  // velocity port, each coinciding with the partner's first/last interior
  // state point.
  if (std::abs((port1.position.x() - port2.position.x()) - h) > Scalar(1e-12) * h) {
    std::ostringstream os;
    os << "interconnect: interface points do not coincide: system 1's b port at "
       << port1.position.x() << " must sit one half-step (h = " << h
       << ") above system 2's a port at " << port2.position.x();
    throw AssemblyError(os.str());
  }

  // Composite index maps for the (p1, p2, q1, q2) ordering.
  auto part_len = [](const DiscreteSystem<Scalar>& s, Family f) {
    Eigen::Index len = 0;
    for (const auto& blk : s.state_meta)
      if (blk.family == f) len += blk.size;
    return len;
  };
  const Eigen::Index p1_len = part_len(sys1, Family::P), q1_len = part_len(sys1, Family::Q);
  const Eigen::Index p2_len = part_len(sys2, Family::P);

  std::vector<Eigen::Index> map1(static_cast<size_t>(sys1.n_states));
  std::vector<Eigen::Index> map2(static_cast<size_t>(sys2.n_states));
  for (Eigen::Index i = 0; i < sys1.n_states; ++i)
    map1[static_cast<size_t>(i)] = i < p1_len ? i : p2_len + i;
  for (Eigen::Index i = 0; i < sys2.n_states; ++i)
    map2[static_cast<size_t>(i)] = i < p2_len ? p1_len + i : q1_len + i + p1_len;

  DiscreteSystem<Scalar> out;
  out.dimension = 1;
  out.h1 = h;
  out.h2 = 0;
  out.n_states = sys1.n_states + sys2.n_states;

  // Gather the eliminated ports' columns as per-column nonzero lists.
  auto gather = [](const DiscreteSystem<Scalar>& s, Eigen::Index offset, Eigen::Index width) {
    std::vector<std::vector<std::pair<Eigen::Index, Scalar>>> cols(static_cast<size_t>(width));
    for (Eigen::Index c = 0; c < width; ++c)
      for (typename SparseMat::InnerIterator it(s.b_mat, offset + c); it; ++it)
        cols[static_cast<size_t>(c)].emplace_back(it.row(), it.value());
    return cols;
  };
  const auto b1c = gather(sys1, port1.offset, port1.size);
  const auto b2c = gather(sys2, port2.offset, port2.size);

  std::vector<Eigen::Triplet<Scalar>> jt;
  for (int k = 0; k < sys1.j_mat.outerSize(); ++k)
    for (typename SparseMat::InnerIterator it(sys1.j_mat, k); it; ++it)
      jt.emplace_back(map1[static_cast<size_t>(it.row())], map1[static_cast<size_t>(it.col())],
                      it.value());
  for (int k = 0; k < sys2.j_mat.outerSize(); ++k)
    for (typename SparseMat::InnerIterator it(sys2.j_mat, k); it; ++it)
      jt.emplace_back(map2[static_cast<size_t>(it.row())], map2[static_cast<size_t>(it.col())],
                      it.value());
  for (Eigen::Index c = 0; c < port1.size; ++c)
    for (const auto& [r1, v1] : b1c[static_cast<size_t>(c)])
      for (const auto& [r2, v2] : b2c[static_cast<size_t>(c)]) {
        const Scalar v = v1 * v2;
        jt.emplace_back(map1[static_cast<size_t>(r1)], map2[static_cast<size_t>(r2)], v);
        jt.emplace_back(map2[static_cast<size_t>(r2)], map1[static_cast<size_t>(r1)], -v);
      }
  out.j_mat.resize(out.n_states, out.n_states);
  out.j_mat.setFromTriplets(jt.begin(), jt.end());

  // Remaining ports pass through, system 1's first.
  std::vector<Eigen::Triplet<Scalar>> bt;
  Eigen::Index col_off = 0;
  auto carry_ports = [&](const DiscreteSystem<Scalar>& s, size_t skip,
                         const std::vector<Eigen::Index>& map) {
    for (size_t p = 0; p < s.port_meta.size(); ++p) {
      if (p == skip) continue;
      const auto& meta = s.port_meta[p];
      for (Eigen::Index c = 0; c < meta.size; ++c)
        for (typename SparseMat::InnerIterator it(s.b_mat, meta.offset + c); it; ++it)
          bt.emplace_back(map[static_cast<size_t>(it.row())], col_off + c, it.value());
      auto carried = meta;
      carried.offset = col_off;
      out.port_meta.push_back(carried);
      col_off += meta.size;
    }
  };
  carry_ports(sys1, pairing.port1, map1);
  carry_ports(sys2, pairing.port2, map2);
  out.b_mat.resize(out.n_states, col_off);
  out.b_mat.setFromTriplets(bt.begin(), bt.end());

  std::vector<Eigen::Triplet<Scalar>> wt;
  for (int k = 0; k < sys1.q_weights.outerSize(); ++k)
    for (typename SparseMat::InnerIterator it(sys1.q_weights, k); it; ++it)
      wt.emplace_back(map1[static_cast<size_t>(it.row())], map1[static_cast<size_t>(it.col())],
                      it.value());
  for (int k = 0; k < sys2.q_weights.outerSize(); ++k)
    for (typename SparseMat::InnerIterator it(sys2.q_weights, k); it; ++it)
      wt.emplace_back(map2[static_cast<size_t>(it.row())], map2[static_cast<size_t>(it.col())],
                      it.value());
  out.q_weights.resize(out.n_states, out.n_states);
  out.q_weights.setFromTriplets(wt.begin(), wt.end());

  // State metadata in composite order.
  auto push_blocks = [&](const DiscreteSystem<Scalar>& s, Family f,
                         const std::vector<Eigen::Index>& map) {
    for (const auto& blk : s.state_meta)
      if (blk.family == f) {
        auto nb = blk;
        nb.offset = map[static_cast<size_t>(blk.offset)];
        out.state_meta.push_back(nb);
      }
  };
  push_blocks(sys1, Family::P, map1);
  push_blocks(sys2, Family::P, map2);
  push_blocks(sys1, Family::Q, map1);
  push_blocks(sys2, Family::Q, map2);
  return out;
}

}  // namespace phs
