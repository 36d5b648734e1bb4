#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "phs/signal.hpp"

namespace phs {

/// The two interleaved grid/state families.
enum class Family { P, Q };

inline Family other(Family f) { return f == Family::P ? Family::Q : Family::P; }

inline const char* name(Family f) { return f == Family::P ? "p" : "q"; }

/// Boundary input type. At a boundary point owned by the p family the input
/// prescribes the p co-energy there (a velocity in the mechanical analogy);
/// at a q-family point it prescribes the conjugate force-like combination of
/// the q co-energy. Both carry block width n_p.
enum class PortKind { PEffort, QEffort };

inline PortKind port_kind_of(Family f) {
  return f == Family::P ? PortKind::PEffort : PortKind::QEffort;
}

inline const char* name(PortKind k) {
  return k == PortKind::PEffort ? "p-effort" : "q-effort";
}

/// Constant matrices of the interconnection operator
/// J = P1 d/dxi1 + (P2 d/dxi2) + P0 in split form. p2 is present iff the
/// spatial dimension is 2. All blocks share shape n_p x n_q; p1 (and p2)
/// must have full rank.
template <typename Scalar = double>
struct CoefficientSet {
  using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  MatrixX p1;
  MatrixX p0;
  std::optional<MatrixX> p2;

  Eigen::Index np() const { return p1.rows(); }
  Eigen::Index nq() const { return p1.cols(); }
  int dimension() const { return p2.has_value() ? 2 : 1; }
};

/// Quadratic energy density H(z, xi) = 1/2 z^T Q(xi) z given through the
/// evaluation interface Q = weight_at(xi), so spatially varying materials
/// come for free. 1D models use the first coordinate of the query point.
template <typename Scalar = double>
class QuadraticDensity {
 public:
  using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector2 = Eigen::Vector2<Scalar>;
  using WeightFn = std::function<MatrixX(const Vector2&)>;

  QuadraticDensity() = default;

  QuadraticDensity(Eigen::Index size, WeightFn fn)
      : size_(size), fn_(std::move(fn)) {}

  static QuadraticDensity constant(MatrixX weight) {
    const Eigen::Index n = weight.rows();
    return QuadraticDensity(n, [w = std::move(weight)](const Vector2&) { return w; });
  }

  Eigen::Index size() const { return size_; }

  MatrixX weight_at(const Vector2& point) const { return fn_(point); }
  MatrixX weight_at(Scalar xi) const { return fn_(Vector2(xi, Scalar(0))); }

 private:
  Eigen::Index size_ = 0;
  WeightFn fn_;
};

/// Declares which input type each 1D endpoint carries, and its signal.
/// The tag must agree with the grid family that owns the endpoint.
template <typename Scalar = double>
struct BoundarySpec1D {
  PortKind at_a = PortKind::PEffort;
  PortKind at_b = PortKind::QEffort;
  Signal<Scalar> signal_a;
  Signal<Scalar> signal_b;
};

enum class Edge { Left, Right, Bottom, Top };

inline const char* name(Edge e) {
  switch (e) {
    case Edge::Left: return "left";
    case Edge::Right: return "right";
    case Edge::Bottom: return "bottom";
    case Edge::Top: return "top";
  }
  return "?";
}

/// Per-edge input type for the rectangle plus optional per-point signal
/// overrides (ports not named default to the zero signal).
template <typename Scalar = double>
struct BoundarySpec2D {
  struct PointSignal {
    Eigen::Vector2<Scalar> position;
    Signal<Scalar> signal;
  };

  std::array<PortKind, 4> edge_kind = {PortKind::PEffort, PortKind::QEffort,
                                       PortKind::QEffort, PortKind::QEffort};
  std::vector<PointSignal> point_signals;

  PortKind at(Edge e) const { return edge_kind[static_cast<int>(e)]; }
  PortKind& at(Edge e) { return edge_kind[static_cast<int>(e)]; }
};

/// Continuous model description shared by the 1D and 2D assembly routines:
/// domain, coefficient matrices, the two energy densities and the boundary
/// declaration.
template <typename Scalar = double>
struct ContinuousModel {
  int dimension = 1;

  // 1D domain [a, b].
  Scalar a = Scalar(0);
  Scalar b = Scalar(1);

  // 2D domain [0, L1] x [0, L2].
  Scalar L1 = Scalar(1);
  Scalar L2 = Scalar(1);

  CoefficientSet<Scalar> coefficients;
  QuadraticDensity<Scalar> density_p;
  QuadraticDensity<Scalar> density_q;

  BoundarySpec1D<Scalar> boundary_1d;
  BoundarySpec2D<Scalar> boundary_2d;
};

namespace detail {

template <typename Matrix>
Eigen::Index rank_of(const Matrix& m) {
  if (m.size() == 0) return 0;
  Eigen::ColPivHouseholderQR<Matrix> qr(m);
  return qr.rank();
}

template <typename Scalar>
void check_density(const QuadraticDensity<Scalar>& density, Eigen::Index expected,
                   const char* label, int dimension,
                   const std::array<Eigen::Vector2<Scalar>, 3>& samples,
                   std::vector<std::string>& out) {
  using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (density.size() != expected) {
    std::ostringstream os;
    os << label << " block size " << density.size() << " does not match coefficient dimension "
       << expected;
    out.push_back(os.str());
    return;
  }
  const int nsamples = dimension == 1 ? 3 : 3;
  for (int s = 0; s < nsamples; ++s) {
    const MatrixX w = density.weight_at(samples[static_cast<size_t>(s)]);
    if (w.rows() != expected || w.cols() != expected) {
      std::ostringstream os;
      os << label << " weight_at returned shape " << w.rows() << "x" << w.cols() << ", expected "
         << expected << "x" << expected;
      out.push_back(os.str());
      return;
    }
    const Scalar asym = (w - w.transpose()).template lpNorm<Eigen::Infinity>();
    const Scalar scale = std::max(Scalar(1), w.template lpNorm<Eigen::Infinity>());
    if (asym > Eigen::NumTraits<Scalar>::epsilon() * Scalar(64) * scale) {
      out.push_back(std::string(label) + " weight not symmetric at a sampled point");
      return;
    }
    Eigen::SelfAdjointEigenSolver<MatrixX> eig(w);
    if (eig.eigenvalues().minCoeff() <= Scalar(0)) {
      out.push_back(std::string(label) + " density not positive definite at a sampled point");
      return;
    }
  }
}

}  // namespace detail

/// Checks every structural assumption on a model and returns the list of
/// violated invariants, empty when the model is admissible. Violations are
/// data, not failures.
template <typename Scalar>
std::vector<std::string> validate_model(const ContinuousModel<Scalar>& model) {
  using Vector2 = Eigen::Vector2<Scalar>;
  std::vector<std::string> v;

  const auto& cs = model.coefficients;
  if (model.dimension != 1 && model.dimension != 2)
    v.push_back("dimension must be 1 or 2");
  if (cs.p1.size() == 0) {
    v.push_back("p1 is empty");
    return v;
  }
  const Eigen::Index np = cs.np(), nq = cs.nq();
  if (cs.p0.rows() != np || cs.p0.cols() != nq)
    v.push_back("p0 shape does not match p1");
  if (detail::rank_of(cs.p1) < std::min(np, nq)) v.push_back("p1 rank-deficient");
  if (model.dimension == 2) {
    if (!cs.p2.has_value()) {
      v.push_back("p2 required for a 2D model");
    } else {
      if (cs.p2->rows() != np || cs.p2->cols() != nq)
        v.push_back("p2 shape does not match p1");
      else if (detail::rank_of(*cs.p2) < std::min(np, nq))
        v.push_back("p2 rank-deficient");
    }
  } else if (cs.p2.has_value()) {
    v.push_back("p2 present on a 1D model");
  }

  std::array<Vector2, 3> samples;
  if (model.dimension == 1) {
    if (!(model.b > model.a) || !std::isfinite(model.a) || !std::isfinite(model.b))
      v.push_back("1D domain [a, b] must have b > a and finite endpoints");
    const Scalar len = model.b - model.a;
    samples = {Vector2(model.a, 0), Vector2(model.a + len / 2, 0), Vector2(model.b, 0)};
  } else {
    if (!(model.L1 > Scalar(0)) || !(model.L2 > Scalar(0)))
      v.push_back("2D domain lengths must be strictly positive");
    samples = {Vector2(0, 0), Vector2(model.L1 / 2, model.L2 / 2), Vector2(model.L1, model.L2)};
  }

  detail::check_density(model.density_p, np, "density_p", model.dimension, samples, v);
  detail::check_density(model.density_q, nq, "density_q", model.dimension, samples, v);
  return v;
}

/// Co-energy variable of a quadratic density: weight_at(point) * state.
template <typename Scalar>
Eigen::Vector<Scalar, Eigen::Dynamic> coenergy(const QuadraticDensity<Scalar>& density,
                                               const Eigen::Vector2<Scalar>& point,
                                               const Eigen::Vector<Scalar, Eigen::Dynamic>& state) {
  if (state.size() != density.size())
    throw std::invalid_argument("coenergy: state length " + std::to_string(state.size()) +
                                " does not match density block size " +
                                std::to_string(density.size()));
  return density.weight_at(point) * state;
}

template <typename Scalar>
Eigen::Vector<Scalar, Eigen::Dynamic> coenergy(const QuadraticDensity<Scalar>& density, Scalar xi,
                                               const Eigen::Vector<Scalar, Eigen::Dynamic>& state) {
  return coenergy(density, Eigen::Vector2<Scalar>(xi, Scalar(0)), state);
}

using CoefficientSetd = CoefficientSet<double>;
using QuadraticDensityd = QuadraticDensity<double>;
using BoundarySpec1Dd = BoundarySpec1D<double>;
using BoundarySpec2Dd = BoundarySpec2D<double>;
using ContinuousModeld = ContinuousModel<double>;

}  // namespace phs
