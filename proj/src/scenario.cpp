#include "phs/cli/scenario.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace phs::cli {

using nlohmann::json;

const char* name(ModelKind k) {
  switch (k) {
    case ModelKind::Wave1D: return "wave_1d";
    case ModelKind::Timoshenko: return "timoshenko";
    case ModelKind::Wave2D: return "wave_2d";
    case ModelKind::Mindlin: return "mindlin";
  }
  return "?";
}

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError("config error at " + where + ": " + what);
}

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(where, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.count(key)) {
      std::ostringstream os;
      os << "unknown key '" << key << "' (allowed:";
      for (const auto& k : allowed) os << " " << k;
      os << ")";
      fail(where, os.str());
    }
  }
}

double require_number(const json& obj, const std::string& where, const std::string& key) {
  if (!obj.contains(key)) fail(where, "missing required key '" + key + "'");
  if (!obj[key].is_number()) fail(where + "." + key, "expected a number");
  return obj[key].get<double>();
}

double number_or(const json& obj, const std::string& key, double fallback) {
  return obj.contains(key) ? obj[key].get<double>() : fallback;
}

double positive(const json& obj, const std::string& where, const std::string& key) {
  const double v = require_number(obj, where, key);
  if (!(v > 0.0) || !std::isfinite(v)) fail(where + "." + key, "must be positive and finite");
  return v;
}

Edge parse_edge(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected an edge name");
  const std::string s = j.get<std::string>();
  if (s == "left") return Edge::Left;
  if (s == "right") return Edge::Right;
  if (s == "bottom") return Edge::Bottom;
  if (s == "top") return Edge::Top;
  fail(where, "unknown edge '" + s + "' (left/right/bottom/top)");
}

Signald parse_signal(const json& j, const std::string& where) {
  check_keys(j, where, {"type", "value", "release_time_s"});
  if (!j.contains("type")) fail(where, "missing 'type'");
  const std::string type = j["type"].get<std::string>();
  if (type == "zero") return Signald::zero();
  if (!j.contains("value") || !j["value"].is_array()) fail(where, "missing array 'value'");
  Eigen::VectorXd v(j["value"].size());
  for (size_t i = 0; i < j["value"].size(); ++i) v(static_cast<Eigen::Index>(i)) =
      j["value"][i].get<double>();
  if (type == "constant") return Signald::constant(v);
  if (type == "step_release") {
    if (!j.contains("release_time_s")) fail(where, "step_release needs 'release_time_s'");
    return Signald::step_release(v, j["release_time_s"].get<double>());
  }
  fail(where, "unknown signal type '" + type + "' (zero/constant/step_release)");
}

PortKind parse_port_kind(const json& j, const std::string& where) {
  const std::string s = j.get<std::string>();
  if (s == "p-effort") return PortKind::PEffort;
  if (s == "q-effort") return PortKind::QEffort;
  fail(where, "unknown input type '" + s + "' (p-effort/q-effort)");
}

void parse_model(const json& m, Scenario& sc) {
  const std::string where = "model";
  if (!m.contains("kind")) fail(where, "missing 'kind'");
  const std::string kind = m["kind"].get<std::string>();

  if (kind == "wave_1d") {
    sc.kind = ModelKind::Wave1D;
    check_keys(m, where, {"kind", "density_kg_m3", "modulus_pa", "length_m"});
    sc.rho = positive(m, where, "density_kg_m3");
    sc.modulus = positive(m, where, "modulus_pa");
    sc.model = wave_1d<double>(sc.rho, sc.modulus, positive(m, where, "length_m"));
  } else if (kind == "timoshenko") {
    sc.kind = ModelKind::Timoshenko;
    check_keys(m, where,
               {"kind", "length_m", "radius_m", "area_m2", "second_moment_m4", "density_kg_m3",
                "young_modulus_pa", "poisson_ratio", "shear_correction", "tip_mass_kg",
                "release_time_s"});
    TimoshenkoParams p;
    p.length = positive(m, where, "length_m");
    if (m.contains("radius_m")) {
      const auto [area, inertia] = circular_section(positive(m, where, "radius_m"));
      p.area = area;
      p.second_moment = inertia;
    } else {
      p.area = positive(m, where, "area_m2");
      p.second_moment = positive(m, where, "second_moment_m4");
    }
    p.density = positive(m, where, "density_kg_m3");
    p.young_modulus = positive(m, where, "young_modulus_pa");
    p.poisson_ratio = require_number(m, where, "poisson_ratio");
    if (!(p.poisson_ratio > 0.0 && p.poisson_ratio < 0.5))
      fail(where + ".poisson_ratio", "out of (0, 0.5)");
    p.shear_correction = number_or(m, "shear_correction", 0.0);
    p.tip_mass = number_or(m, "tip_mass_kg", 2.0);
    p.release_time = number_or(m, "release_time_s", 7.0);
    sc.beam = p;
    sc.model = timoshenko<double>(p);
  } else if (kind == "wave_2d") {
    sc.kind = ModelKind::Wave2D;
    check_keys(m, where, {"kind", "density_kg_m3", "modulus_pa", "side_lengths_m"});
    sc.rho = positive(m, where, "density_kg_m3");
    sc.modulus = positive(m, where, "modulus_pa");
    if (!m.contains("side_lengths_m") || !m["side_lengths_m"].is_array() ||
        m["side_lengths_m"].size() != 2)
      fail(where + ".side_lengths_m", "expected [L1, L2]");
    const double L1 = m["side_lengths_m"][0].get<double>();
    const double L2 = m["side_lengths_m"][1].get<double>();
    if (!(L1 > 0.0) || !(L2 > 0.0)) fail(where + ".side_lengths_m", "must be positive");
    sc.model = wave_2d<double>(sc.rho, sc.modulus, L1, L2);
  } else if (kind == "mindlin") {
    sc.kind = ModelKind::Mindlin;
    check_keys(m, where,
               {"kind", "side_lengths_m", "thickness_m", "density_kg_m3", "young_modulus_pa",
                "poisson_ratio", "shear_correction", "mass_kg", "release_time_s",
                "attachment_fraction", "clamped_edge", "loaded_edge"});
    MindlinParams p;
    if (!m.contains("side_lengths_m") || !m["side_lengths_m"].is_array() ||
        m["side_lengths_m"].size() != 2)
      fail(where + ".side_lengths_m", "expected [L1, L2]");
    p.L1 = m["side_lengths_m"][0].get<double>();
    p.L2 = m["side_lengths_m"][1].get<double>();
    p.thickness = positive(m, where, "thickness_m");
    p.density = positive(m, where, "density_kg_m3");
    p.young_modulus = positive(m, where, "young_modulus_pa");
    p.poisson_ratio = require_number(m, where, "poisson_ratio");
    if (!(p.poisson_ratio > 0.0 && p.poisson_ratio < 0.5))
      fail(where + ".poisson_ratio", "out of (0, 0.5)");
    p.shear_correction = number_or(m, "shear_correction", 5.0 / 6.0);
    p.mass = number_or(m, "mass_kg", 2.0);
    p.release_time = number_or(m, "release_time_s", 7.0);
    p.attachment_fraction = number_or(m, "attachment_fraction", 0.7);
    if (m.contains("clamped_edge")) p.clamped_edge = parse_edge(m["clamped_edge"], where);
    if (m.contains("loaded_edge")) p.loaded_edge = parse_edge(m["loaded_edge"], where);
    if (p.clamped_edge == p.loaded_edge)
      fail(where, std::string("edge '") + phs::name(p.clamped_edge) +
                      "' tagged twice (clamped and loaded)");
    sc.plate = p;
    try {
      sc.model = mindlin<double>(p);
    } catch (const std::invalid_argument& e) {
      fail(where, e.what());
    }
  } else {
    fail(where, "unknown model kind '" + kind + "'");
  }
}

void parse_boundary_overrides(const json& b, Scenario& sc) {
  const std::string where = "boundary";
  if (sc.model.dimension != 1)
    fail(where, "boundary overrides are only supported for 1D models");
  check_keys(b, where, {"at_a", "at_b"});
  for (const char* end : {"at_a", "at_b"}) {
    if (!b.contains(end)) continue;
    const json& e = b[end];
    check_keys(e, where + "." + end, {"kind", "signal"});
    auto& spec = sc.model.boundary_1d;
    PortKind& kind = std::string(end) == "at_a" ? spec.at_a : spec.at_b;
    Signald& sig = std::string(end) == "at_a" ? spec.signal_a : spec.signal_b;
    if (e.contains("kind")) kind = parse_port_kind(e["kind"], where);
    if (e.contains("signal")) sig = parse_signal(e["signal"], where + "." + end + ".signal");
  }
}

void parse_grid(const json& g, Scenario& sc) {
  const std::string where = "grid";
  check_keys(g, where, {"half_steps", "offsets", "family_at_a"});
  if (!g.contains("half_steps")) fail(where, "missing 'half_steps'");
  if (sc.model.dimension == 1) {
    if (!g["half_steps"].is_number_integer()) fail(where + ".half_steps", "expected an integer");
    sc.grid.half_steps = g["half_steps"].get<int>();
    if (sc.grid.half_steps < 3) fail(where + ".half_steps", "must be >= 3");
    if (g.contains("family_at_a")) {
      const std::string f = g["family_at_a"].get<std::string>();
      if (f != "p" && f != "q") fail(where + ".family_at_a", "expected 'p' or 'q'");
      sc.grid.family_at_a = f == "p" ? Family::P : Family::Q;
    }
    if (g.contains("offsets")) fail(where + ".offsets", "only meaningful for 2D grids");
  } else {
    if (!g["half_steps"].is_array() || g["half_steps"].size() != 2)
      fail(where + ".half_steps", "expected [N1, N2] for a 2D model");
    sc.grid.n1 = g["half_steps"][0].get<int>();
    sc.grid.n2 = g["half_steps"][1].get<int>();
    if (sc.grid.n1 < 3 || sc.grid.n2 < 3) fail(where + ".half_steps", "must be >= 3");
    if (g.contains("family_at_a")) fail(where + ".family_at_a", "only meaningful for 1D grids");
    if (g.contains("offsets")) {
      if (!g["offsets"].is_array() || g["offsets"].size() != 2)
        fail(where + ".offsets", "expected [m_q, n_q]");
      const int mq = g["offsets"][0].get<int>(), nq = g["offsets"][1].get<int>();
      if ((mq != 0 && mq != 1) || (nq != 0 && nq != 1))
        fail(where + ".offsets", "entries must be 0 or 1");
      sc.grid.offsets = {mq, nq};
    }
  }
}

void parse_time(const json& t, Scenario& sc) {
  const std::string where = "time";
  check_keys(t, where, {"dt_s", "t_end_s"});
  sc.time.dt = positive(t, where, "dt_s");
  sc.time.t_end = positive(t, where, "t_end_s");
}

void parse_initial(const json& i, Scenario& sc) {
  const std::string where = "initial";
  check_keys(i, where, {"type", "mode", "amplitude"});
  const std::string type = i.contains("type") ? i["type"].get<std::string>() : "rest";
  if (type == "rest") {
    sc.initial.kind = InitialSpec::Kind::Rest;
  } else if (type == "static_equilibrium") {
    sc.initial.kind = InitialSpec::Kind::StaticEquilibrium;
  } else if (type == "mode") {
    sc.initial.kind = InitialSpec::Kind::Mode;
    if (sc.kind != ModelKind::Wave1D && sc.kind != ModelKind::Wave2D)
      fail(where, "mode initial states exist only for the wave models");
    if (i.contains("mode")) {
      if (!i["mode"].is_array() || i["mode"].empty() || i["mode"].size() > 2)
        fail(where + ".mode", "expected [m] or [m, l]");
      sc.initial.mode_m = i["mode"][0].get<int>();
      if (i["mode"].size() == 2) sc.initial.mode_l = i["mode"][1].get<int>();
      if (sc.initial.mode_m < 1 || sc.initial.mode_l < 1)
        fail(where + ".mode", "mode numbers must be >= 1");
    }
    sc.initial.amplitude = number_or(i, "amplitude", 1.0);
  } else {
    fail(where, "unknown initial type '" + type + "' (rest/static_equilibrium/mode)");
  }
}

void parse_output(const json& o, Scenario& sc) {
  const std::string where = "output";
  check_keys(o, where, {"snapshot_times_s", "selected_states", "record_ports"});
  if (o.contains("snapshot_times_s")) {
    for (const auto& t : o["snapshot_times_s"]) {
      const double v = t.get<double>();
      if (v < 0.0) fail(where + ".snapshot_times_s", "must be >= 0");
      sc.output.snapshot_times.push_back(v);
    }
  }
  if (o.contains("selected_states"))
    for (const auto& s : o["selected_states"]) {
      const auto idx = s.get<Eigen::Index>();
      if (idx < 0) fail(where + ".selected_states", "indices must be >= 0");
      sc.output.selected_states.push_back(idx);
    }
  if (o.contains("record_ports")) sc.output.record_ports = o["record_ports"].get<bool>();
}

}  // namespace

Scenario parse_config_text(const std::string& text, const std::string& label) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config error in " + label + ": " + e.what());
  }
  check_keys(root, "<root>", {"model", "grid", "time", "initial", "output", "boundary"});
  for (const char* required : {"model", "grid", "time"})
    if (!root.contains(required))
      fail("<root>", std::string("missing required section '") + required + "'");

  Scenario sc;
  sc.label = label;
  try {
    parse_model(root["model"], sc);
    if (root.contains("boundary")) parse_boundary_overrides(root["boundary"], sc);
    parse_grid(root["grid"], sc);
    parse_time(root["time"], sc);
    if (root.contains("initial")) parse_initial(root["initial"], sc);
    if (root.contains("output")) parse_output(root["output"], sc);
  } catch (const json::exception& e) {
    throw ConfigError("config error in " + label + ": " + e.what());
  }

  const auto violations = validate_model(sc.model);
  if (!violations.empty()) {
    std::ostringstream os;
    os << "config error in " << label << ": model violates structural assumptions:";
    for (const auto& v : violations) os << "\n  - " << v;
    throw ConfigError(os.str());
  }
  return sc;
}

Scenario parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path);
}

namespace {

/// Chooses 2D offsets so each edge's owning family matches the requested
/// input kinds; collects a per-candidate diagnosis otherwise.
std::pair<int, int> choose_offsets(const Scenario& sc) {
  const auto& bc = sc.model.boundary_2d;
  std::ostringstream diagnosis;
  for (int mq = 0; mq <= 1; ++mq) {
    for (int nq = 0; nq <= 1; ++nq) {
      const auto owners = edge_owners(mq, nq, sc.grid.n1, sc.grid.n2);
      bool ok = true;
      for (size_t e = 0; e < 4; ++e)
        ok &= port_kind_of(owners[e]) == bc.edge_kind[e];
      if (ok) return {mq, nq};
      diagnosis << "\n  offsets (" << mq << ", " << nq << "): ";
      for (size_t e = 0; e < 4; ++e) {
        const Edge edge = static_cast<Edge>(e);
        if (port_kind_of(owners[e]) != bc.edge_kind[e])
          diagnosis << phs::name(edge) << " owned by " << phs::name(owners[e]) << " (wants "
                    << phs::name(bc.edge_kind[e]) << ") ";
      }
    }
  }
  std::ostringstream os;
  os << "no grid offsets realize the requested boundary layout with N1 = " << sc.grid.n1
     << ", N2 = " << sc.grid.n2 << " (changing the parity of N1/N2 moves the high-edge owners):"
     << diagnosis.str();
  throw ConfigError(os.str());
}

}  // namespace

AssembledScenario assemble_scenario(const Scenario& scenario) {
  AssembledScenario out;
  if (scenario.model.dimension == 1) {
    Family fa;
    if (scenario.grid.family_at_a) {
      fa = *scenario.grid.family_at_a;
    } else {
      fa = scenario.model.boundary_1d.at_a == PortKind::PEffort ? Family::P : Family::Q;
    }
    out.grid_1d = build_grid_1d(scenario.model.a, scenario.model.b, scenario.grid.half_steps, fa);
    out.system = assemble_1d(scenario.model, *out.grid_1d);
    out.signals = boundary_signals(scenario.model, out.system);
  } else {
    const auto [mq, nq] =
        scenario.grid.offsets ? *scenario.grid.offsets : choose_offsets(scenario);
    out.grid_2d = build_grid_2d(scenario.model.L1, scenario.model.L2, scenario.grid.n1,
                                scenario.grid.n2, mq, nq);
    ContinuousModeld model = scenario.model;
    snap_point_signals(model, *out.grid_2d);
    out.system = assemble_2d(model, *out.grid_2d);
    out.signals = boundary_signals(model, out.system);
  }
  return out;
}

Eigen::VectorXd initial_state(const Scenario& scenario, const AssembledScenario& assembled,
                              double* equilibrium_residual) {
  const auto& sys = assembled.system;
  if (equilibrium_residual) *equilibrium_residual = 0.0;
  switch (scenario.initial.kind) {
    case InitialSpec::Kind::Rest:
      return Eigen::VectorXd::Zero(sys.n_states);
    case InitialSpec::Kind::StaticEquilibrium: {
      Eigen::VectorXd u(sys.b_mat.cols());
      Eigen::Index off = 0;
      for (size_t p = 0; p < assembled.signals.size(); ++p) {
        const Eigen::Index w = sys.port_meta[p].size;
        u.segment(off, w) = assembled.signals[p](0.0, w);
        off += w;
      }
      const auto eq = static_equilibrium(sys, u);
      if (equilibrium_residual) *equilibrium_residual = eq.residual_norm;
      return eq.state;
    }
    case InitialSpec::Kind::Mode:
      break;
  }

  // Standing-wave start; the analytic fields live at the grid points.
  Eigen::VectorXd x = Eigen::VectorXd::Zero(sys.n_states);
  const double amp = scenario.initial.amplitude;
  if (scenario.kind == ModelKind::Wave1D) {
    const double L = scenario.model.b - scenario.model.a;
    const double k = scenario.initial.mode_m * EIGEN_PI / L;
    for (const auto& s : sys.state_meta) {
      if (s.family == Family::Q)
        x(s.offset) = amp * k * std::cos(k * (s.position.x() - scenario.model.a));
    }
  } else if (scenario.kind == ModelKind::Wave2D) {
    const double k1 = scenario.initial.mode_m * EIGEN_PI / scenario.model.L1;
    const double k2 = scenario.initial.mode_l * EIGEN_PI / scenario.model.L2;
    for (const auto& s : sys.state_meta) {
      if (s.family == Family::Q) {
        x(s.offset + 0) = amp * k1 * std::cos(k1 * s.position.x()) * std::sin(k2 * s.position.y());
        x(s.offset + 1) = amp * k2 * std::sin(k1 * s.position.x()) * std::cos(k2 * s.position.y());
      }
    }
  } else {
    throw ConfigError("mode initial states exist only for the wave models");
  }
  return x;
}

std::string describe(const Scenario& scenario, const AssembledScenario& assembled) {
  const auto& sys = assembled.system;
  std::ostringstream os;
  os << "model: " << name(scenario.kind) << "\n";
  if (sys.dimension == 1) {
    const auto& g = *assembled.grid_1d;
    os << "grid: 1D, K = " << g.half_steps << ", h = " << g.h << ", family at a: "
       << phs::name(g.family_at_a) << ", family at b: " << phs::name(g.family_at_b) << "\n";
    os << "interior points: " << g.interior_p.size() << " (p) + " << g.interior_q.size()
       << " (q)\n";
  } else {
    const auto& g = *assembled.grid_2d;
    os << "grid: 2D, N = (" << g.N1 << ", " << g.N2 << "), h = (" << g.h1 << ", " << g.h2
       << "), offsets (m_q, n_q) = (" << g.m_q << ", " << g.n_q << ")\n";
    os << "edge owners: left " << phs::name(g.edge_owner[0]) << ", right "
       << phs::name(g.edge_owner[1]) << ", bottom " << phs::name(g.edge_owner[2]) << ", top "
       << phs::name(g.edge_owner[3]) << "\n";
    os << "interior points: " << g.interior_p.size() << " (p) + " << g.interior_q.size()
       << " (q)\n";
  }
  os << "states: " << sys.n_states << "\n";
  os << "ports: " << sys.port_meta.size() << " (input width " << sys.b_mat.cols() << ")\n";
  int active = 0;
  for (const auto& s : assembled.signals) active += s.is_active() ? 1 : 0;
  os << "active signals: " << active << "\n";
  return os.str();
}

}  // namespace phs::cli
