#include "phs/cli/sweep.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <thread>

namespace phs::cli {

namespace {

int thread_budget(int wanted) {
  int cap = static_cast<int>(std::thread::hardware_concurrency());
  if (cap <= 0) cap = 2;
  if (const char* env = std::getenv("PHS_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) cap = parsed;
  }
  return std::max(1, std::min(wanted, cap));
}

}  // namespace

Eigen::VectorXd wave_mode_state_1d(double rho, double modulus, const StaggeredGrid1Dd& grid,
                                   const DiscreteSystemd& sys, int mode, double amplitude,
                                   double t) {
  const double L = grid.b - grid.a;
  const double c = std::sqrt(modulus / rho);
  const double k = mode * EIGEN_PI / L;
  const double w = c * k;
  Eigen::VectorXd x(sys.n_states);
  for (const auto& s : sys.state_meta) {
    const double xi = s.position.x() - grid.a;
    if (s.family == Family::P)
      x(s.offset) = -rho * amplitude * w * std::sin(k * xi) * std::sin(w * t);
    else
      x(s.offset) = amplitude * k * std::cos(k * xi) * std::cos(w * t);
  }
  return x;
}

Eigen::VectorXd wave_mode_state_2d(double rho, double modulus, const StaggeredGrid2Dd& grid,
                                   const DiscreteSystemd& sys, int mode_m, int mode_l,
                                   double amplitude, double t) {
  const double c = std::sqrt(modulus / rho);
  const double k1 = mode_m * EIGEN_PI / grid.L1;
  const double k2 = mode_l * EIGEN_PI / grid.L2;
  const double w = c * std::sqrt(k1 * k1 + k2 * k2);
  Eigen::VectorXd x(sys.n_states);
  for (const auto& s : sys.state_meta) {
    const double sx = s.position.x(), sy = s.position.y();
    if (s.family == Family::P) {
      x(s.offset) =
          -rho * amplitude * w * std::sin(k1 * sx) * std::sin(k2 * sy) * std::sin(w * t);
    } else {
      x(s.offset + 0) = amplitude * k1 * std::cos(k1 * sx) * std::sin(k2 * sy) * std::cos(w * t);
      x(s.offset + 1) = amplitude * k2 * std::sin(k1 * sx) * std::cos(k2 * sy) * std::cos(w * t);
    }
  }
  return x;
}

double weighted_l2_error(const DiscreteSystemd& sys, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& reference) {
  const double measure = sys.dimension == 1 ? 2 * sys.h1 : 4 * sys.h1 * sys.h2;
  const Eigen::VectorXd diff = x - reference;
  const double err = std::sqrt(measure * diff.squaredNorm());
  const double ref = std::sqrt(measure * reference.squaredNorm());
  return err / std::max(ref, 1e-300);
}

namespace {

double run_level_1d(const Scenario& scenario, int K) {
  auto model = scenario.model;
  // modal reference needs held (zero-velocity) ends: p family at both ends
  model.boundary_1d.at_a = PortKind::PEffort;
  model.boundary_1d.at_b = PortKind::PEffort;
  model.boundary_1d.signal_a = Signald::zero();
  model.boundary_1d.signal_b = Signald::zero();
  auto grid = build_grid_1d(model.a, model.b, K, Family::P);
  auto sys = assemble_1d(model, grid);

  const int mode = scenario.initial.kind == InitialSpec::Kind::Mode ? scenario.initial.mode_m : 1;
  const double amp =
      scenario.initial.kind == InitialSpec::Kind::Mode ? scenario.initial.amplitude : 1.0;
  Eigen::VectorXd x0 = wave_mode_state_1d(scenario.rho, scenario.modulus, grid, sys, mode, amp, 0.0);

  SimOptionsd options;
  options.record_ports = false;
  auto signals = boundary_signals(model, sys);
  auto traj = simulate(sys, signals, scenario.time.dt, scenario.time.t_end, x0, options);

  const Eigen::VectorXd exact = wave_mode_state_1d(scenario.rho, scenario.modulus, grid, sys, mode,
                                                   amp, traj.times.back());
  return weighted_l2_error(sys, traj.x_final, exact);
}

double run_level_2d(const Scenario& scenario, int N) {
  auto model = scenario.model;
  model.boundary_2d.edge_kind = {PortKind::PEffort, PortKind::PEffort, PortKind::PEffort,
                                 PortKind::PEffort};
  model.boundary_2d.point_signals.clear();
  // all-p edges need m_q = n_q = 1 and even N along both axes
  auto grid = build_grid_2d(model.L1, model.L2, N, N, 1, 1);
  auto sys = assemble_2d(model, grid);

  const int mode_m = scenario.initial.kind == InitialSpec::Kind::Mode ? scenario.initial.mode_m : 1;
  const int mode_l = scenario.initial.kind == InitialSpec::Kind::Mode ? scenario.initial.mode_l : 1;
  const double amp =
      scenario.initial.kind == InitialSpec::Kind::Mode ? scenario.initial.amplitude : 1.0;
  Eigen::VectorXd x0 =
      wave_mode_state_2d(scenario.rho, scenario.modulus, grid, sys, mode_m, mode_l, amp, 0.0);

  SimOptionsd options;
  options.record_ports = false;
  auto signals = boundary_signals(model, sys);
  auto traj = simulate(sys, signals, scenario.time.dt, scenario.time.t_end, x0, options);

  const Eigen::VectorXd exact = wave_mode_state_2d(scenario.rho, scenario.modulus, grid, sys,
                                                   mode_m, mode_l, amp, traj.times.back());
  return weighted_l2_error(sys, traj.x_final, exact);
}

}  // namespace

SweepResult convergence_sweep(const Scenario& scenario, int levels) {
  if (levels < 2) throw ConfigError("sweep: at least 2 refinement levels required");
  const bool is_1d = scenario.kind == ModelKind::Wave1D;
  if (!is_1d && scenario.kind != ModelKind::Wave2D)
    throw ConfigError("sweep: analytic reference unavailable for model '" +
                      std::string(name(scenario.kind)) + "' (wave models only)");

  const int base = is_1d ? scenario.grid.half_steps : scenario.grid.n1;
  if (base % 2 != 0)
    throw ConfigError("sweep: base resolution must be even so refinement preserves the "
                      "clamped-edge families");

  SweepResult result;
  result.rows.resize(static_cast<size_t>(levels));
  std::vector<std::thread> pool;
  const int budget = thread_budget(levels);
  std::vector<std::exception_ptr> errors(static_cast<size_t>(levels));

  for (int start = 0; start < levels; start += budget) {
    const int batch = std::min(budget, levels - start);
    for (int i = 0; i < batch; ++i) {
      const int level = start + i;
      pool.emplace_back([&, level] {
        try {
          const int resolution = base << level;
          SweepRow row;
          row.resolution = resolution;
          if (is_1d) {
            row.h = (scenario.model.b - scenario.model.a) / resolution;
            row.error = run_level_1d(scenario, resolution);
          } else {
            row.h = scenario.model.L1 / resolution;
            row.error = run_level_2d(scenario, resolution);
          }
          result.rows[static_cast<size_t>(level)] = row;
        } catch (...) {
          errors[static_cast<size_t>(level)] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    pool.clear();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  // least-squares slope of log(error) against log(h)
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = levels;
  for (const auto& row : result.rows) {
    const double lx = std::log(row.h), ly = std::log(std::max(row.error, 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  result.fitted_order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return result;
}

void write_sweep_csv(const SweepResult& result, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "resolution,h,l2_error\n";
  char buf[96];
  for (const auto& row : result.rows) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", row.resolution, row.h, row.error);
    out << buf;
  }
  std::snprintf(buf, sizeof(buf), "# fitted_order,%.17g\n", result.fitted_order);
  out << buf;
}

}  // namespace phs::cli
