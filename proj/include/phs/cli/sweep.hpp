#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <vector>

#include "phs/cli/scenario.hpp"

namespace phs::cli {

/// Analytic standing-wave state for the 1D wave model on a grid with the p
/// family (velocity inputs, held at zero) at both ends. Mode m, amplitude A:
///   u(xi, t) = A sin(k xi) cos(w t), k = m pi / L, w = c k.
Eigen::VectorXd wave_mode_state_1d(double rho, double modulus, const StaggeredGrid1Dd& grid,
                                   const DiscreteSystemd& sys, int mode, double amplitude,
                                   double t);

/// Analytic mode for the 2D wave model on an all-clamped rectangle.
Eigen::VectorXd wave_mode_state_2d(double rho, double modulus, const StaggeredGrid2Dd& grid,
                                   const DiscreteSystemd& sys, int mode_m, int mode_l,
                                   double amplitude, double t);

/// Relative L2 error between a state and a reference, weighted by the cell
/// measure stored in q_weights' diagonal blocks (mass-like norm).
double weighted_l2_error(const DiscreteSystemd& sys, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& reference);

struct SweepRow {
  int resolution = 0;  // K (1D) or N (2D, both axes)
  double h = 0.0;
  double error = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double fitted_order = 0.0;
};

/// Runs the scenario's wave model at resolutions K, 2K, 4K, ... against the
/// analytic standing mode and fits the spatial convergence order. Levels
/// run concurrently; PHS_THREADS caps the fan-out.
SweepResult convergence_sweep(const Scenario& scenario, int levels);

void write_sweep_csv(const SweepResult& result, const std::filesystem::path& path);

}  // namespace phs::cli
