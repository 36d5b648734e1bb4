#pragma once

#include <filesystem>
#include <string>

#include "phs/cli/scenario.hpp"

namespace phs::cli {

struct RunReport {
  std::filesystem::path out_dir;
  double h0 = 0.0;
  double drift_rel = 0.0;          // max_k |H_k - H_0| / max(1, |H_0|)
  double post_release_drift = 0.0; // same, measured from the first zero-input step
  bool has_release = false;
  double max_residual = 0.0;       // max_k |H_k - H_{k-1} - dt u^T y|
  double max_residual_rel = 0.0;   // scaled by max(1, max H)
};

/// Runs a scenario and writes the artifact bundle (trajectory.csv,
/// energy.svg, snapshots.csv, report.txt) into out_dir. The bundle is
/// staged in a temporary sibling directory and renamed into place, so a
/// failed run leaves no partial bundle. Identical scenarios produce
/// byte-identical files.
RunReport run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir);

}  // namespace phs::cli
