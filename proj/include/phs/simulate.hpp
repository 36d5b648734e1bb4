#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "phs/error.hpp"
#include "phs/signal.hpp"
#include "phs/system.hpp"

namespace phs {

/// Implicit midpoint stepper for the linear PH-ODE x' = A x + B u with
/// A = j_mat * q_weights:
///   (I - dt/2 A) x_{k+1} = (I + dt/2 A) x_k + dt B u_mid.
/// The midpoint matrix is factorized once per (system, dt) and reused; a
/// dense LU is used below `dense_threshold` states, sparse LU above. One
/// iterative-refinement pass keeps the per-step solve error near machine
/// precision, which the energy audits rely on.
template <typename Scalar = double>
class MidpointSolver {
 public:
  using SparseMat = Eigen::SparseMatrix<Scalar>;
  using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using VectorX = Eigen::Vector<Scalar, Eigen::Dynamic>;

  static constexpr Eigen::Index dense_threshold = 500;

  MidpointSolver(const DiscreteSystem<Scalar>& sys, Scalar dt, bool refine = true)
      : dt_(dt), refine_(refine), b_mat_(sys.b_mat) {
    if (!(dt != Scalar(0)) || !std::isfinite(static_cast<double>(dt)))
      throw SolverError("midpoint solver: dt must be finite and nonzero");
    a_mat_ = (sys.j_mat * sys.q_weights).pruned();
    SparseMat eye(sys.n_states, sys.n_states);
    eye.setIdentity();
    m_mat_ = eye - (dt_ / 2) * a_mat_;
    if (sys.n_states < dense_threshold) {
      dense_lu_ = std::make_unique<Eigen::PartialPivLU<MatrixX>>(MatrixX(m_mat_));
      const Scalar rc = dense_lu_->rcond();
      if (!(rc > Eigen::NumTraits<Scalar>::epsilon() * Scalar(16)))
        throw SolverError("midpoint matrix singular or ill-conditioned: rcond estimate " +
                          std::to_string(static_cast<double>(rc)));
    } else {
      sparse_lu_ = std::make_unique<Eigen::SparseLU<SparseMat>>();
      sparse_lu_->compute(m_mat_);
      if (sparse_lu_->info() != Eigen::Success)
        throw SolverError("midpoint matrix factorization failed (singular midpoint matrix?)");
    }
  }

  Scalar dt() const { return dt_; }
  const SparseMat& a_mat() const { return a_mat_; }

  /// One midpoint step; u_mid is the stacked port input sampled at the
  /// interval midpoint (pass an empty vector when there are no ports).
  VectorX step(const VectorX& x, const VectorX& u_mid) const {
    if (x.size() != m_mat_.rows())
      throw SolverError("midpoint step: state length mismatch");
    if (!x.allFinite()) throw SolverError("midpoint step: non-finite state");
    VectorX rhs = x + (dt_ / 2) * (a_mat_ * x);
    if (u_mid.size() > 0) {
      if (u_mid.size() != b_mat_.cols())
        throw SolverError("midpoint step: input length mismatch");
      if (!u_mid.allFinite()) throw SolverError("midpoint step: non-finite input");
      rhs += dt_ * (b_mat_ * u_mid);
    }
    VectorX xn = solve(rhs);
    if (refine_) {
      const VectorX residual = rhs - m_mat_ * xn;
      xn += solve(residual);
    }
    if (!xn.allFinite()) throw SolverError("midpoint step: solve produced non-finite state");
    return xn;
  }

 private:
  VectorX solve(const VectorX& rhs) const {
    return dense_lu_ ? VectorX(dense_lu_->solve(rhs)) : VectorX(sparse_lu_->solve(rhs));
  }

  Scalar dt_;
  bool refine_;
  SparseMat a_mat_, m_mat_, b_mat_;
  std::unique_ptr<Eigen::PartialPivLU<MatrixX>> dense_lu_;
  std::unique_ptr<Eigen::SparseLU<SparseMat>> sparse_lu_;
};

template <typename Scalar>
Eigen::Vector<Scalar, Eigen::Dynamic> midpoint_step(
    const MidpointSolver<Scalar>& solver, const Eigen::Vector<Scalar, Eigen::Dynamic>& x,
    const Eigen::Vector<Scalar, Eigen::Dynamic>& u_mid) {
  return solver.step(x, u_mid);
}

/// One-off convenience overload; factorizes internally.
template <typename Scalar>
Eigen::Vector<Scalar, Eigen::Dynamic> midpoint_step(
    const DiscreteSystem<Scalar>& sys, const Eigen::Vector<Scalar, Eigen::Dynamic>& x,
    const Eigen::Vector<Scalar, Eigen::Dynamic>& u_mid, Scalar dt) {
  return MidpointSolver<Scalar>(sys, dt).step(x, u_mid);
}

template <typename Scalar = double>
struct SimOptions {
  /// Record the full state every `state_stride` steps (0 = no state series).
  Eigen::Index state_stride = 0;
  /// Record per-step stacked port inputs/outputs (can dominate memory on
  /// long runs of systems with many ports).
  bool record_ports = true;
  /// Extra step indices at which to store the state.
  std::vector<Eigen::Index> snapshot_steps;
  /// Called after each step with (step index, midpoint time, midpoint state).
  std::function<void(Eigen::Index, Scalar, const Eigen::Vector<Scalar, Eigen::Dynamic>&)> observer;
  bool refine = true;
};

/// Time series produced by `simulate`. Row k of inputs/outputs and entry k
/// of residual describe the step ending at times[k] (row 0 is zero); the
/// residual is the discrete power-balance defect
///   H_k - H_{k-1} - dt * u_mid^T y_mid.
template <typename Scalar = double>
struct Trajectory {
  using VectorX = Eigen::Vector<Scalar, Eigen::Dynamic>;
  using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  std::vector<Scalar> times;
  std::vector<Scalar> hamiltonian;
  std::vector<Scalar> residual;
  MatrixX inputs;   // (n_steps + 1) x total input width when recorded
  MatrixX outputs;  // same layout
  std::vector<std::pair<Eigen::Index, VectorX>> states;  // (step index, state)
  VectorX x_final;

  Scalar max_abs_residual() const {
    Scalar m = 0;
    for (Scalar r : residual) m = std::max(m, std::abs(r));
    return m;
  }
};

/// Integrates the system with per-port signals sampled at interval
/// midpoints and audits the discrete power balance at every step.
template <typename Scalar>
Trajectory<Scalar> simulate(const DiscreteSystem<Scalar>& sys,
                            const std::vector<Signal<Scalar>>& signals, Scalar dt, Scalar t_end,
                            const Eigen::Vector<Scalar, Eigen::Dynamic>& x0,
                            const SimOptions<Scalar>& options = {}) {
  using VectorX = Eigen::Vector<Scalar, Eigen::Dynamic>;

  if (!(dt > Scalar(0))) throw SolverError("simulate: dt must be positive");
  if (!(t_end > Scalar(0))) throw SolverError("simulate: t_end must be positive");
  if (x0.size() != sys.n_states) throw SolverError("simulate: x0 length mismatch");
  if (signals.size() != sys.port_meta.size())
    throw SolverError("simulate: got " + std::to_string(signals.size()) + " signals for " +
                      std::to_string(sys.port_meta.size()) + " ports");

  const auto n_steps = static_cast<Eigen::Index>(std::llround(static_cast<double>(t_end / dt)));
  const Eigen::Index n = std::max<Eigen::Index>(n_steps, 1);
  const Eigen::Index width = sys.b_mat.cols();

  MidpointSolver<Scalar> solver(sys, dt, options.refine);

  Trajectory<Scalar> traj;
  traj.times.reserve(static_cast<size_t>(n) + 1);
  traj.hamiltonian.reserve(static_cast<size_t>(n) + 1);
  traj.residual.reserve(static_cast<size_t>(n) + 1);
  if (options.record_ports) {
    traj.inputs.setZero(n + 1, width);
    traj.outputs.setZero(n + 1, width);
  }

  auto want_state = [&](Eigen::Index k) {
    if (options.state_stride > 0 && k % options.state_stride == 0) return true;
    for (Eigen::Index s : options.snapshot_steps)
      if (s == k) return true;
    return false;
  };

  VectorX x = x0;
  Scalar H = hamiltonian(sys, x);
  traj.times.push_back(Scalar(0));
  traj.hamiltonian.push_back(H);
  traj.residual.push_back(Scalar(0));
  if (want_state(0)) traj.states.emplace_back(0, x);

  VectorX u_mid(width);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Scalar t_mid = (Scalar(k) + Scalar(0.5)) * dt;
    Eigen::Index off = 0;
    for (size_t p = 0; p < signals.size(); ++p) {
      const Eigen::Index w = sys.port_meta[p].size;
      u_mid.segment(off, w) = signals[p](t_mid, w);
      off += w;
    }
    const VectorX x_next = solver.step(x, u_mid);
    const VectorX x_mid = (x + x_next) / 2;
    const VectorX y_mid = sys.b_mat.transpose() * (sys.q_weights * x_mid);
    const Scalar H_next = hamiltonian(sys, x_next);

    traj.times.push_back(Scalar(k + 1) * dt);
    traj.hamiltonian.push_back(H_next);
    traj.residual.push_back(H_next - H - dt * u_mid.dot(y_mid));
    if (options.record_ports) {
      traj.inputs.row(k + 1) = u_mid.transpose();
      traj.outputs.row(k + 1) = y_mid.transpose();
    }
    if (options.observer) options.observer(k, t_mid, x_mid);

    x = x_next;
    H = H_next;
    if (want_state(k + 1)) traj.states.emplace_back(k + 1, x);
  }
  traj.x_final = std::move(x);
  return traj;
}

/// Minimum-norm least-squares solution of A x + B u = 0 for a constant
/// input, with the achieved residual norm ||A x + B u||. Conservative
/// systems may admit no equilibrium for a given u; the caller decides what
/// residual is acceptable.
template <typename Scalar>
struct Equilibrium {
  Eigen::Vector<Scalar, Eigen::Dynamic> state;
  Scalar residual_norm;
};

template <typename Scalar>
Equilibrium<Scalar> static_equilibrium(const DiscreteSystem<Scalar>& sys,
                                       const Eigen::Vector<Scalar, Eigen::Dynamic>& u_const) {
  using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using VectorX = Eigen::Vector<Scalar, Eigen::Dynamic>;
  if (u_const.size() != sys.b_mat.cols())
    throw SolverError("static_equilibrium: input length mismatch");

  const MatrixX a_dense = MatrixX(sys.j_mat * sys.q_weights);
  const VectorX rhs = -(sys.b_mat * u_const);
  Eigen::CompleteOrthogonalDecomposition<MatrixX> cod(a_dense);
  VectorX x = cod.solve(rhs);
  const Scalar res = (a_dense * x - rhs).norm();
  return {std::move(x), res};
}

using MidpointSolverd = MidpointSolver<double>;
using Trajectoryd = Trajectory<double>;
using SimOptionsd = SimOptions<double>;

}  // namespace phs
