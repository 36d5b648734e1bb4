#include "phs/cli/artifacts.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace phs::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string port_label(const DiscreteSystemd& sys, size_t p) {
  const auto& meta = sys.port_meta[p];
  std::ostringstream os;
  if (sys.dimension == 1) {
    os << (meta.side == 0 ? "a" : "b");
  } else {
    os << "p" << p;
  }
  return os.str();
}

void write_trajectory_csv(std::ostream& out, const DiscreteSystemd& sys,
                          const Trajectoryd& traj, const std::vector<Eigen::Index>& selected) {
  out << "t,H";
  if (traj.inputs.size() > 0) {
    for (size_t p = 0; p < sys.port_meta.size(); ++p)
      for (Eigen::Index c = 0; c < sys.port_meta[p].size; ++c)
        out << ",u_" << port_label(sys, p) << "_" << c;
    for (size_t p = 0; p < sys.port_meta.size(); ++p)
      for (Eigen::Index c = 0; c < sys.port_meta[p].size; ++c)
        out << ",y_" << port_label(sys, p) << "_" << c;
  }
  for (Eigen::Index idx : selected) out << ",x" << idx;
  out << ",residual\n";

  std::map<Eigen::Index, const Eigen::VectorXd*> state_at;
  for (const auto& [step, x] : traj.states) state_at[step] = &x;

  for (size_t k = 0; k < traj.times.size(); ++k) {
    out << fmt(traj.times[k]) << "," << fmt(traj.hamiltonian[k]);
    if (traj.inputs.size() > 0) {
      for (Eigen::Index c = 0; c < traj.inputs.cols(); ++c)
        out << "," << fmt(traj.inputs(static_cast<Eigen::Index>(k), c));
      for (Eigen::Index c = 0; c < traj.outputs.cols(); ++c)
        out << "," << fmt(traj.outputs(static_cast<Eigen::Index>(k), c));
    }
    if (!selected.empty()) {
      const auto it = state_at.find(static_cast<Eigen::Index>(k));
      for (Eigen::Index idx : selected)
        out << "," << fmt(it != state_at.end() ? (*it->second)(idx) : 0.0);
    }
    out << "," << fmt(traj.residual[k]) << "\n";
  }
}

void write_energy_svg(std::ostream& out, const Trajectoryd& traj) {
  const int width = 720, height = 400, margin = 50;
  double hmin = traj.hamiltonian.front(), hmax = hmin;
  for (double h : traj.hamiltonian) {
    hmin = std::min(hmin, h);
    hmax = std::max(hmax, h);
  }
  if (hmax - hmin < 1e-300) hmax = hmin + 1.0;
  const double t0 = traj.times.front(), t1 = traj.times.back();

  auto sx = [&](double t) { return margin + (t - t0) / (t1 - t0) * (width - 2 * margin); };
  auto sy = [&](double h) {
    return height - margin - (h - hmin) / (hmax - hmin) * (height - 2 * margin);
  };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
  out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  out << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin
      << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
      << height - margin << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\" font-size=\"13\">t [s]</text>\n";
  out << "<text x=\"14\" y=\"" << height / 2
      << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 14 " << height / 2
      << ")\">H [J]</text>\n";
  out << "<text x=\"" << margin << "\" y=\"" << margin - 8 << "\" font-size=\"11\">H max = "
      << fmt(hmax) << "</text>\n";
  out << "<text x=\"" << margin << "\" y=\"" << height - margin + 16
      << "\" font-size=\"11\">H min = " << fmt(hmin) << "</text>\n";

  // decimate long series; the CSV is the source of truth
  const size_t n = traj.times.size();
  const size_t stride = std::max<size_t>(1, n / 2000);
  out << "<polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"1.5\" points=\"";
  for (size_t k = 0; k < n; k += stride)
    out << fmt(sx(traj.times[k])) << "," << fmt(sy(traj.hamiltonian[k])) << " ";
  out << fmt(sx(traj.times[n - 1])) << "," << fmt(sy(traj.hamiltonian[n - 1]));
  out << "\"/>\n</svg>\n";
}

/// Long-format snapshot table; displacement is the time-integrated first p
/// co-energy component (transverse velocity), accumulated during the run.
void write_snapshots_csv(std::ostream& out, const DiscreteSystemd& sys, const Trajectoryd& traj,
                         const std::vector<double>& snapshot_times, double dt,
                         const std::map<Eigen::Index, Eigen::VectorXd>& displacement) {
  out << "t,x,y,family,component,state,displacement\n";
  std::map<Eigen::Index, const Eigen::VectorXd*> state_at;
  for (const auto& [step, x] : traj.states) state_at[step] = &x;

  for (double t : snapshot_times) {
    const auto step = static_cast<Eigen::Index>(std::llround(t / dt));
    const auto it = state_at.find(step);
    if (it == state_at.end()) continue;
    const Eigen::VectorXd& x = *it->second;
    const auto disp_it = displacement.find(step);
    Eigen::Index p_block = 0;
    for (const auto& s : sys.state_meta) {
      for (Eigen::Index c = 0; c < s.size; ++c) {
        double disp = 0.0;
        if (s.family == Family::P && c == 0 && disp_it != displacement.end())
          disp = disp_it->second(p_block);
        out << fmt(static_cast<double>(step) * dt) << "," << fmt(s.position.x()) << ","
            << fmt(s.position.y()) << "," << phs::name(s.family) << "," << c << ","
            << fmt(x(s.offset + c)) << "," << fmt(disp) << "\n";
      }
      if (s.family == Family::P) ++p_block;
    }
  }
}

}  // namespace

RunReport run_scenario(const Scenario& scenario, const fs::path& out_dir) {
  auto assembled = assemble_scenario(scenario);
  const auto& sys = assembled.system;
  const double dt = scenario.time.dt;

  double eq_residual = 0.0;
  Eigen::VectorXd x0 = initial_state(scenario, assembled, &eq_residual);
  bool equilibrium_fallback = false;
  if (scenario.initial.kind == InitialSpec::Kind::StaticEquilibrium) {
    const double scale = std::max(1.0, x0.norm());
    if (eq_residual > 1e-8 * scale) {
      equilibrium_fallback = true;
      x0.setZero();
    }
  }

  // Per-step snapshots and displacement accumulation.
  SimOptionsd options;
  options.record_ports = scenario.output.record_ports;
  std::vector<Eigen::Index> snapshot_steps;
  for (double t : scenario.output.snapshot_times)
    snapshot_steps.push_back(static_cast<Eigen::Index>(std::llround(t / dt)));
  options.snapshot_steps = snapshot_steps;
  if (!scenario.output.selected_states.empty()) options.state_stride = 1;
  for (Eigen::Index idx : scenario.output.selected_states)
    if (idx >= sys.n_states)
      throw ConfigError("selected state index " + std::to_string(idx) + " out of range (" +
                        std::to_string(sys.n_states) + " states)");

  // Transverse displacement: integrate the first p co-energy component.
  Eigen::Index n_p_blocks = 0;
  for (const auto& s : sys.state_meta) n_p_blocks += s.family == Family::P ? 1 : 0;
  Eigen::VectorXd displacement_acc = Eigen::VectorXd::Zero(n_p_blocks);
  std::map<Eigen::Index, Eigen::VectorXd> displacement_at;
  std::vector<StateBlockInfo<double>> p_blocks;
  for (const auto& s : sys.state_meta)
    if (s.family == Family::P) p_blocks.push_back(s);
  std::sort(snapshot_steps.begin(), snapshot_steps.end());
  if (!snapshot_steps.empty() && snapshot_steps.front() == 0)
    displacement_at[0] = displacement_acc;
  options.observer = [&](Eigen::Index k, double, const Eigen::VectorXd& x_mid) {
    const Eigen::VectorXd grad = sys.q_weights * x_mid;
    for (Eigen::Index b = 0; b < n_p_blocks; ++b) {
      // co-energy = grad H / cell measure (2h or 4 h1 h2)
      const double measure = sys.dimension == 1 ? 2 * sys.h1 : 4 * sys.h1 * sys.h2;
      displacement_acc(b) += dt * grad(p_blocks[static_cast<size_t>(b)].offset) / measure;
    }
    for (Eigen::Index s : snapshot_steps)
      if (s == k + 1) displacement_at[s] = displacement_acc;
  };

  auto traj = simulate(sys, assembled.signals, dt, scenario.time.t_end, x0, options);

  RunReport report;
  report.out_dir = out_dir;
  report.h0 = traj.hamiltonian.front();
  const double h_scale = std::max(1.0, std::abs(report.h0));
  for (double h : traj.hamiltonian)
    report.drift_rel = std::max(report.drift_rel, std::abs(h - report.h0) / h_scale);

  double hmax = 0.0;
  for (double h : traj.hamiltonian) hmax = std::max(hmax, std::abs(h));
  report.max_residual = traj.max_abs_residual();
  report.max_residual_rel = report.max_residual / std::max(1.0, hmax);

  // Post-release drift: from the first step whose midpoint sees all signals
  // at zero onwards.
  double release = 0.0;
  for (const auto& s : assembled.signals)
    if (s.kind() == Signald::Kind::StepRelease && s.is_active()) {
      report.has_release = true;
      release = std::max(release, s.release_time());
    }
  if (report.has_release) {
    size_t k0 = traj.times.size();
    for (size_t k = 0; k + 1 < traj.times.size(); ++k) {
      const double t_mid = traj.times[k] + dt / 2;
      if (t_mid >= release) {
        k0 = k;
        break;
      }
    }
    if (k0 < traj.times.size()) {
      const double href = traj.hamiltonian[k0];
      const double scale = std::max(1.0, std::abs(href));
      for (size_t k = k0; k < traj.hamiltonian.size(); ++k)
        report.post_release_drift =
            std::max(report.post_release_drift, std::abs(traj.hamiltonian[k] - href) / scale);
    }
  }

  // Stage the bundle in a temporary sibling, then swap it into place.
  fs::path parent = out_dir.parent_path();
  if (parent.empty()) parent = ".";
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec) throw IoError("cannot create '" + parent.string() + "': " + ec.message());
  const fs::path tmp = parent / (out_dir.filename().string() + ".tmp-staging");
  fs::remove_all(tmp, ec);
  fs::create_directories(tmp, ec);
  if (ec) throw IoError("cannot create staging dir '" + tmp.string() + "': " + ec.message());

  auto open = [&](const char* file) {
    std::ofstream out(tmp / file, std::ios::binary);
    if (!out) throw IoError(std::string("cannot write ") + (tmp / file).string());
    return out;
  };

  {
    auto out = open("trajectory.csv");
    write_trajectory_csv(out, sys, traj, scenario.output.selected_states);
  }
  {
    auto out = open("energy.svg");
    write_energy_svg(out, traj);
  }
  {
    auto out = open("snapshots.csv");
    write_snapshots_csv(out, sys, traj, scenario.output.snapshot_times, dt, displacement_at);
  }
  {
    auto out = open("report.txt");
    out << "scenario: " << scenario.label << "\n";
    out << describe(scenario, assembled);
    out << "dt: " << fmt(dt) << " s, t_end: " << fmt(scenario.time.t_end) << " s, steps: "
        << traj.times.size() - 1 << "\n";
    if (scenario.initial.kind == InitialSpec::Kind::StaticEquilibrium) {
      out << "static equilibrium residual: " << fmt(eq_residual)
          << (equilibrium_fallback ? " (no equilibrium; fell back to rest start)" : "") << "\n";
    }
    out << "H(0): " << fmt(report.h0) << " J\n";
    out << "energy drift (relative): " << fmt(report.drift_rel) << "\n";
    if (report.has_release)
      out << "post-release drift (relative): " << fmt(report.post_release_drift) << "\n";
    out << "max power-balance residual: " << fmt(report.max_residual) << " (relative "
        << fmt(report.max_residual_rel) << ")\n";
  }

  fs::path backup = parent / (out_dir.filename().string() + ".tmp-replaced");
  fs::remove_all(backup, ec);
  if (fs::exists(out_dir)) {
    fs::rename(out_dir, backup, ec);
    if (ec) throw IoError("cannot replace '" + out_dir.string() + "': " + ec.message());
  }
  fs::rename(tmp, out_dir, ec);
  if (ec) throw IoError("cannot move bundle into '" + out_dir.string() + "': " + ec.message());
  fs::remove_all(backup, ec);
  return report;
}

}  // namespace phs::cli
