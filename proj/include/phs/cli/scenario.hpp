#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "phs/phs.hpp"

namespace phs::cli {

struct ConfigError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

enum class ModelKind { Wave1D, Timoshenko, Wave2D, Mindlin };

const char* name(ModelKind k);

struct GridSpec {
  int half_steps = 0;  // 1D: K
  int n1 = 0, n2 = 0;  // 2D
  std::optional<std::pair<int, int>> offsets;  // 2D (m_q, n_q); auto-chosen when absent
  std::optional<Family> family_at_a;           // 1D; inferred from the boundary spec when absent
};

struct TimeSpec {
  double dt = 1e-3;   // s
  double t_end = 1.0; // s
};

struct InitialSpec {
  enum class Kind { Rest, StaticEquilibrium, Mode };
  Kind kind = Kind::Rest;
  int mode_m = 1, mode_l = 1;  // wave standing-mode numbers
  double amplitude = 1.0;
};

struct OutputSpec {
  std::vector<double> snapshot_times;     // s
  std::vector<Eigen::Index> selected_states;  // extra per-step CSV columns
  bool record_ports = true;
};

/// Fully validated simulation scenario: model + grid + time stepping +
/// output options, as parsed from a config file.
struct Scenario {
  ModelKind kind = ModelKind::Wave1D;
  ContinuousModeld model;

  // retained constructor inputs (the analytic references need them)
  double rho = 0.0, modulus = 0.0;
  TimoshenkoParams beam;
  MindlinParams plate;

  GridSpec grid;
  TimeSpec time;
  InitialSpec initial;
  OutputSpec output;
  std::string label;
};

/// Parses and validates a JSON scenario file. Unknown keys, unit violations
/// and infeasible boundary layouts are reported with precise messages.
Scenario parse_config(const std::string& path);

/// Same, from an in-memory JSON string (used by tests).
Scenario parse_config_text(const std::string& text, const std::string& label = "<inline>");

struct AssembledScenario {
  DiscreteSystemd system;
  std::vector<Signald> signals;
  std::optional<StaggeredGrid1Dd> grid_1d;
  std::optional<StaggeredGrid2Dd> grid_2d;
};

/// Builds the grid (choosing 2D offsets when unset), snaps point signals,
/// assembles, and collects per-port signals.
AssembledScenario assemble_scenario(const Scenario& scenario);

/// Initial state per the scenario's initial spec. `equilibrium_residual`
/// receives the static-equilibrium defect when that start is requested
/// (the caller falls back to rest when it is too large).
Eigen::VectorXd initial_state(const Scenario& scenario, const AssembledScenario& assembled,
                              double* equilibrium_residual = nullptr);

/// One-line grid/port summary used by `phs validate` and report.txt.
std::string describe(const Scenario& scenario, const AssembledScenario& assembled);

}  // namespace phs::cli
