#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "phs/core.hpp"
#include "phs/error.hpp"
#include "phs/grid2d.hpp"
#include "phs/signal.hpp"

namespace phs {

inline constexpr double standard_gravity = 9.80665;  // m/s^2

/// Area and second moment of a solid circular section of radius r.
template <typename Scalar>
std::pair<Scalar, Scalar> circular_section(Scalar radius) {
  const Scalar area = Scalar(EIGEN_PI) * radius * radius;
  const Scalar second_moment = Scalar(EIGEN_PI) * radius * radius * radius * radius / 4;
  return {area, second_moment};
}

/// 1D wave equation (taut string / rod) in PH form: p the momentum density,
/// q the strain. Default boundary: velocity input at a (fixed end, zero) and
/// force input at b (free end, zero). Admits analytic standing waves.
template <typename Scalar>
ContinuousModel<Scalar> wave_1d(Scalar rho, Scalar modulus, Scalar length) {
  using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (!(rho > Scalar(0)) || !(modulus > Scalar(0)) || !(length > Scalar(0)))
    throw std::invalid_argument("wave_1d: parameters must be positive");

  ContinuousModel<Scalar> m;
  m.dimension = 1;
  m.a = Scalar(0);
  m.b = length;
  m.coefficients.p1 = MatrixX::Constant(1, 1, Scalar(1));
  m.coefficients.p0 = MatrixX::Zero(1, 1);
  m.density_p = QuadraticDensity<Scalar>::constant(MatrixX::Constant(1, 1, Scalar(1) / rho));
  m.density_q = QuadraticDensity<Scalar>::constant(MatrixX::Constant(1, 1, modulus));
  m.boundary_1d.at_a = PortKind::PEffort;
  m.boundary_1d.at_b = PortKind::QEffort;
  return m;
}

struct TimoshenkoParams {
  double length = 1.0;               // m
  double area = 1.2566370614359172e-3;        // m^2 (disc of radius 2 cm)
  double second_moment = 1.2566370614359172e-7;  // m^4
  double density = 2698.9;           // kg/m^3
  double young_modulus = 68e9;       // Pa
  double poisson_ratio = 0.36;
  double shear_correction = 0.0;     // 0 = default 6(1+nu)/(7+6nu) for a disc
  double tip_mass = 2.0;             // kg
  double release_time = 7.0;         // s
};

/// Timoshenko beam in PH form. States p = (transverse momentum, angular
/// momentum), q = (shear strain, bending curvature); P1 = I, P0 carries the
/// shear/rotation coupling. Clamped at a (zero velocity input), tip load at
/// b: force (-m g, 0) released at release_time.
template <typename Scalar>
ContinuousModel<Scalar> timoshenko(const TimoshenkoParams& params) {
  using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using VectorX = Eigen::Vector<Scalar, Eigen::Dynamic>;

  auto positive = [](double v, const char* what) {
    if (!(v > 0.0)) throw std::invalid_argument(std::string("timoshenko: ") + what +
                                                " must be positive");
  };
  positive(params.length, "length");
  positive(params.area, "area");
  positive(params.second_moment, "second_moment");
  positive(params.density, "density");
  positive(params.young_modulus, "young_modulus");
  if (!(params.poisson_ratio > 0.0) || !(params.poisson_ratio < 0.5))
    throw std::invalid_argument("timoshenko: poisson_ratio out of (0, 0.5)");
  if (params.tip_mass < 0.0) throw std::invalid_argument("timoshenko: tip_mass must be >= 0");

  const Scalar nu = Scalar(params.poisson_ratio);
  const Scalar E = Scalar(params.young_modulus);
  const Scalar G = E / (2 * (1 + nu));
  const Scalar ks = params.shear_correction > 0.0
                        ? Scalar(params.shear_correction)
                        : 6 * (1 + nu) / (7 + 6 * nu);
  const Scalar A = Scalar(params.area);
  const Scalar I = Scalar(params.second_moment);
  const Scalar rho = Scalar(params.density);

  ContinuousModel<Scalar> m;
  m.dimension = 1;
  m.a = Scalar(0);
  m.b = Scalar(params.length);
  m.coefficients.p1 = MatrixX::Identity(2, 2);
  m.coefficients.p0 = (MatrixX(2, 2) << 0, 0, 1, 0).finished();

  MatrixX wq = MatrixX::Zero(2, 2);
  wq(0, 0) = ks * G * A;
  wq(1, 1) = E * I;
  MatrixX wp = MatrixX::Zero(2, 2);
  wp(0, 0) = 1 / (rho * A);
  wp(1, 1) = 1 / (rho * I);
  m.density_q = QuadraticDensity<Scalar>::constant(wq);
  m.density_p = QuadraticDensity<Scalar>::constant(wp);

  m.boundary_1d.at_a = PortKind::PEffort;
  m.boundary_1d.at_b = PortKind::QEffort;
  m.boundary_1d.signal_a = Signal<Scalar>::zero();
  VectorX tip(2);
  tip << -Scalar(params.tip_mass) * Scalar(standard_gravity), Scalar(0);
  m.boundary_1d.signal_b = Signal<Scalar>::step_release(tip, Scalar(params.release_time));
  return m;
}

/// 2D wave equation on a rectangle: p the momentum density, q the gradient
/// of the deflection. Default boundary: velocity inputs (clamped, zero) on
/// all four edges, so separable standing modes are exact references.
template <typename Scalar>
ContinuousModel<Scalar> wave_2d(Scalar rho, Scalar modulus, Scalar L1, Scalar L2) {
  using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (!(rho > Scalar(0)) || !(modulus > Scalar(0)) || !(L1 > Scalar(0)) || !(L2 > Scalar(0)))
    throw std::invalid_argument("wave_2d: parameters must be positive");

  ContinuousModel<Scalar> m;
  m.dimension = 2;
  m.L1 = L1;
  m.L2 = L2;
  m.coefficients.p1 = (MatrixX(1, 2) << 1, 0).finished();
  m.coefficients.p2 = (MatrixX(1, 2) << 0, 1).finished();
  m.coefficients.p0 = MatrixX::Zero(1, 2);
  m.density_p = QuadraticDensity<Scalar>::constant(MatrixX::Constant(1, 1, Scalar(1) / rho));
  m.density_q = QuadraticDensity<Scalar>::constant(modulus * MatrixX::Identity(2, 2));
  m.boundary_2d.edge_kind = {PortKind::PEffort, PortKind::PEffort, PortKind::PEffort,
                             PortKind::PEffort};
  return m;
}

struct MindlinParams {
  double L1 = 0.6;               // m
  double L2 = 0.4;               // m
  double thickness = 3e-3;       // m
  double density = 2698.9;       // kg/m^3
  double young_modulus = 68e9;   // Pa
  double poisson_ratio = 0.36;
  double shear_correction = 5.0 / 6.0;
  double mass = 2.0;             // kg
  double attachment_fraction = 0.7;  // position along the loaded edge in (0, 1)
  double release_time = 7.0;     // s
  Edge clamped_edge = Edge::Left;
  Edge loaded_edge = Edge::Right;
};

namespace detail {

template <typename Scalar>
Eigen::Vector2<Scalar> edge_point(Edge e, Scalar L1, Scalar L2, Scalar fraction) {
  switch (e) {
    case Edge::Left: return {Scalar(0), fraction * L2};
    case Edge::Right: return {L1, fraction * L2};
    case Edge::Bottom: return {fraction * L1, Scalar(0)};
    case Edge::Top: return {fraction * L1, L2};
  }
  return {Scalar(0), Scalar(0)};
}

}  // namespace detail

/// Mindlin plate in PH form. States p = (transverse momentum, two angular
/// momenta), q = (kappa_xx, kappa_yy, kappa_xy, gamma_x, gamma_y). The
/// clamped edge carries zero velocity inputs; the other edges carry force
/// inputs, zero except the attachment point on the loaded edge which holds
/// the suspended weight (-m g, 0, 0) until release_time.
template <typename Scalar>
ContinuousModel<Scalar> mindlin(const MindlinParams& params) {
  using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using VectorX = Eigen::Vector<Scalar, Eigen::Dynamic>;

  auto positive = [](double v, const char* what) {
    if (!(v > 0.0)) throw std::invalid_argument(std::string("mindlin: ") + what +
                                                " must be positive");
  };
  positive(params.L1, "L1");
  positive(params.L2, "L2");
  positive(params.thickness, "thickness");
  positive(params.density, "density");
  positive(params.young_modulus, "young_modulus");
  positive(params.shear_correction, "shear_correction");
  if (!(params.poisson_ratio > 0.0) || !(params.poisson_ratio < 0.5))
    throw std::invalid_argument("mindlin: poisson_ratio out of (0, 0.5)");
  if (params.mass < 0.0) throw std::invalid_argument("mindlin: mass must be >= 0");
  if (!(params.attachment_fraction > 0.0) || !(params.attachment_fraction < 1.0))
    throw std::invalid_argument("mindlin: attachment_fraction must lie strictly inside (0, 1)");
  if (params.clamped_edge == params.loaded_edge)
    throw std::invalid_argument("mindlin: clamped and loaded edge coincide (edge tagged twice)");

  const Scalar t = Scalar(params.thickness);
  const Scalar nu = Scalar(params.poisson_ratio);
  const Scalar E = Scalar(params.young_modulus);
  const Scalar G = E / (2 * (1 + nu));
  const Scalar rho = Scalar(params.density);
  const Scalar D = E * t * t * t / (12 * (1 - nu * nu));
  const Scalar ks = Scalar(params.shear_correction);

  ContinuousModel<Scalar> m;
  m.dimension = 2;
  m.L1 = Scalar(params.L1);
  m.L2 = Scalar(params.L2);

  MatrixX p1 = MatrixX::Zero(3, 5), p2 = MatrixX::Zero(3, 5), p0 = MatrixX::Zero(3, 5);
  p1(0, 3) = 1;  // dQx/dx into transverse momentum
  p1(1, 0) = 1;  // dMxx/dx into angular momentum x
  p1(2, 2) = 1;  // dMxy/dx into angular momentum y
  p2(0, 4) = 1;  // dQy/dy
  p2(1, 2) = 1;  // dMxy/dy
  p2(2, 1) = 1;  // dMyy/dy
  p0(1, 3) = 1;  // shear/rotation coupling
  p0(2, 4) = 1;
  m.coefficients.p1 = p1;
  m.coefficients.p2 = p2;
  m.coefficients.p0 = p0;

  MatrixX wq = MatrixX::Zero(5, 5);
  wq(0, 0) = D;
  wq(1, 1) = D;
  wq(0, 1) = wq(1, 0) = D * nu;
  wq(2, 2) = D * (1 - nu) / 2;
  wq(3, 3) = wq(4, 4) = ks * G * t;
  MatrixX wp = MatrixX::Zero(3, 3);
  wp(0, 0) = 1 / (rho * t);
  wp(1, 1) = wp(2, 2) = 12 / (rho * t * t * t);
  m.density_q = QuadraticDensity<Scalar>::constant(wq);
  m.density_p = QuadraticDensity<Scalar>::constant(wp);

  m.boundary_2d.edge_kind = {PortKind::QEffort, PortKind::QEffort, PortKind::QEffort,
                             PortKind::QEffort};
  m.boundary_2d.at(params.clamped_edge) = PortKind::PEffort;

  VectorX load(3);
  load << -Scalar(params.mass) * Scalar(standard_gravity), Scalar(0), Scalar(0);
  m.boundary_2d.point_signals.push_back(
      {detail::edge_point<Scalar>(params.loaded_edge, m.L1, m.L2,
                                  Scalar(params.attachment_fraction)),
       Signal<Scalar>::step_release(load, Scalar(params.release_time))});
  return m;
}

/// Moves each 2D point signal to the nearest boundary point of the family
/// matching its edge, so the assembly's exact-coincidence check passes.
/// Fails when the nearest candidate is more than one lattice step away.
template <typename Scalar>
void snap_point_signals(ContinuousModel<Scalar>& model, const StaggeredGrid2D<Scalar>& grid) {
  for (auto& ps : model.boundary_2d.point_signals) {
    const Scalar huge = std::numeric_limits<Scalar>::max();
    Scalar best = huge;
    Eigen::Vector2<Scalar> best_pos;
    for (const auto& bucket : {grid.boundary_p, grid.boundary_q}) {
      for (const auto& pt : bucket) {
        const Scalar d = (pt.position - ps.position).norm();
        if (d < best) {
          best = d;
          best_pos = pt.position;
        }
      }
    }
    if (best == huge || best > std::max(grid.h1, grid.h2) * Scalar(2)) {
      std::ostringstream os;
      os << "snap_point_signals: no boundary grid point near (" << ps.position.x() << ", "
         << ps.position.y() << ")";
      throw AssemblyError(os.str());
    }
    ps.position = best_pos;
  }
}

}  // namespace phs
