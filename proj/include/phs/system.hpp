#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "phs/core.hpp"
#include "phs/error.hpp"

namespace phs {

/// One state block: the generalized coordinate of `family` stored at a grid
/// point. `offset` / `size` locate it inside the global state vector.
template <typename Scalar = double>
struct StateBlockInfo {
  Family family = Family::P;
  Eigen::Vector2<Scalar> position{0, 0};
  Eigen::Index offset = 0;
  Eigen::Index size = 0;
};

/// One boundary port: a boundary grid point carrying an input block of
/// width `size` (= n_p) and the collocated output. `side` distinguishes the
/// 1D endpoints (0 = a, 1 = b); `edge_mask` records which rectangle edges a
/// 2D port lies on (bit order left, right, bottom, top).
template <typename Scalar = double>
struct PortInfo {
  Family family = Family::Q;
  PortKind kind = PortKind::QEffort;
  Eigen::Vector2<Scalar> position{0, 0};
  Eigen::Index offset = 0;
  Eigen::Index size = 0;
  int side = -1;
  unsigned edge_mask = 0;
};

/// Explicit finite-dimensional PH-ODE
///   x' = j_mat * grad H(x) + b_mat * u,   y = b_mat^T * grad H(x),
/// with H(x) = 1/2 x^T q_weights x, so grad H(x) = q_weights * x. j_mat is
/// exactly skew-symmetric by construction (the lower block is the negated
/// transpose of the upper block); q_weights is block-diagonal SPD with the
/// cell measure folded in.
template <typename Scalar = double>
struct DiscreteSystem {
  using SparseMat = Eigen::SparseMatrix<Scalar>;
  using VectorX = Eigen::Vector<Scalar, Eigen::Dynamic>;

  Eigen::Index n_states = 0;
  SparseMat j_mat;
  SparseMat b_mat;
  SparseMat q_weights;

  std::vector<StateBlockInfo<Scalar>> state_meta;
  std::vector<PortInfo<Scalar>> port_meta;

  int dimension = 1;
  Scalar h1 = 0;  // grid half-step (h in 1D)
  Scalar h2 = 0;

  Eigen::Index n_inputs() const { return b_mat.cols(); }

  Eigen::Index block_size(Family f) const {
    for (const auto& s : state_meta)
      if (s.family == f) return s.size;
    return 0;
  }
};

/// Discrete Hamiltonian 1/2 x^T W x (the Riemann-sum energy).
template <typename Scalar>
Scalar hamiltonian(const DiscreteSystem<Scalar>& sys,
                   const Eigen::Vector<Scalar, Eigen::Dynamic>& x) {
  if (x.size() != sys.n_states)
    throw std::invalid_argument("hamiltonian: state length " + std::to_string(x.size()) +
                                " does not match n_states " + std::to_string(sys.n_states));
  return Scalar(0.5) * x.dot(sys.q_weights * x);
}

/// grad H(x) = W x.
template <typename Scalar>
Eigen::Vector<Scalar, Eigen::Dynamic> gradient(const DiscreteSystem<Scalar>& sys,
                                               const Eigen::Vector<Scalar, Eigen::Dynamic>& x) {
  return sys.q_weights * x;
}

/// Collocated outputs y = B^T grad H(x).
template <typename Scalar>
Eigen::Vector<Scalar, Eigen::Dynamic> outputs(const DiscreteSystem<Scalar>& sys,
                                              const Eigen::Vector<Scalar, Eigen::Dynamic>& x) {
  return sys.b_mat.transpose() * gradient(sys, x);
}

namespace detail {

template <typename Scalar>
Eigen::SparseMatrix<Scalar> remap(const Eigen::SparseMatrix<Scalar>& m,
                                  const std::vector<Eigen::Index>& row_map,
                                  const std::vector<Eigen::Index>& col_map,
                                  Eigen::Index rows, Eigen::Index cols) {
  std::vector<Eigen::Triplet<Scalar>> trip;
  trip.reserve(static_cast<size_t>(m.nonZeros()));
  for (int k = 0; k < m.outerSize(); ++k)
    for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(m, k); it; ++it)
      trip.emplace_back(row_map[static_cast<size_t>(it.row())],
                        col_map.empty() ? it.col() : col_map[static_cast<size_t>(it.col())],
                        it.value());
  Eigen::SparseMatrix<Scalar> out(rows, cols);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

}  // namespace detail

/// Element-level index map that sorts the state blocks into "geometric"
/// order: all p blocks by ascending coordinate (ξ2 major, then ξ1), then all
/// q blocks likewise — the ordering assemble_1d / assemble_2d produce. The
/// returned vector lists, for each new element index, the old element index.
template <typename Scalar>
std::vector<Eigen::Index> geometric_order(const DiscreteSystem<Scalar>& sys) {
  std::vector<size_t> blocks(sys.state_meta.size());
  std::iota(blocks.begin(), blocks.end(), size_t{0});
  std::stable_sort(blocks.begin(), blocks.end(), [&](size_t lhs, size_t rhs) {
    const auto& a = sys.state_meta[lhs];
    const auto& b = sys.state_meta[rhs];
    if (a.family != b.family) return a.family == Family::P;
    if (a.position.y() != b.position.y()) return a.position.y() < b.position.y();
    return a.position.x() < b.position.x();
  });
  std::vector<Eigen::Index> order;
  order.reserve(static_cast<size_t>(sys.n_states));
  for (size_t blk : blocks) {
    const auto& s = sys.state_meta[blk];
    for (Eigen::Index i = 0; i < s.size; ++i) order.push_back(s.offset + i);
  }
  return order;
}

/// Reorders the states of a system; `order[new_index] = old_index`. Values
/// are copied verbatim, so exact skew-symmetry is preserved bit for bit.
template <typename Scalar>
DiscreteSystem<Scalar> permute_states(const DiscreteSystem<Scalar>& sys,
                                      const std::vector<Eigen::Index>& order) {
  if (static_cast<Eigen::Index>(order.size()) != sys.n_states)
    throw std::invalid_argument("permute_states: order length mismatch");
  std::vector<Eigen::Index> old_to_new(order.size());
  for (size_t k = 0; k < order.size(); ++k)
    old_to_new[static_cast<size_t>(order[k])] = static_cast<Eigen::Index>(k);

  DiscreteSystem<Scalar> out;
  out.n_states = sys.n_states;
  out.dimension = sys.dimension;
  out.h1 = sys.h1;
  out.h2 = sys.h2;
  out.j_mat = detail::remap(sys.j_mat, old_to_new, old_to_new, sys.n_states, sys.n_states);
  out.b_mat = detail::remap(sys.b_mat, old_to_new, {}, sys.n_states, sys.b_mat.cols());
  out.q_weights = detail::remap(sys.q_weights, old_to_new, old_to_new, sys.n_states, sys.n_states);
  out.port_meta = sys.port_meta;

  out.state_meta = sys.state_meta;
  std::stable_sort(out.state_meta.begin(), out.state_meta.end(),
                   [&](const StateBlockInfo<Scalar>& a, const StateBlockInfo<Scalar>& b) {
                     return old_to_new[static_cast<size_t>(a.offset)] <
                            old_to_new[static_cast<size_t>(b.offset)];
                   });
  Eigen::Index off = 0;
  for (auto& s : out.state_meta) {
    s.offset = off;
    off += s.size;
  }
  return out;
}

using DiscreteSystemd = DiscreteSystem<double>;

}  // namespace phs
