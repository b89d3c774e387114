#include "gjj/cli/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <thread>

#include "gjj/analysis.hpp"
#include "gjj/dynamics.hpp"
#include "gjj/error.hpp"
#include "gjj/fock.hpp"
#include "gjj/junction.hpp"
#include "gjj/models.hpp"

#ifndef GJJ_VERSION
#define GJJ_VERSION "unknown"
#endif

namespace gjj::cli {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& key, const std::string& what) {
  throw Error(ErrorKind::config, key + ": " + what);
}

// Runs f(0..n-1) on up to `workers` threads. Each index is claimed once, so
// results written by index are independent of scheduling.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& f) {
  const int w = std::max(1, std::min<int>(workers, static_cast<int>(n)));
  if (w == 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int k = 0; k < w; ++k) {
    pool.emplace_back([&]() {
      for (std::size_t i = next++; i < n; i = next++) f(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::string fmt_int(long long v) { return std::to_string(v); }
std::string fmt_bool(bool v) { return v ? "1" : "0"; }

std::vector<double> linspace(double lo, double hi, int n) {
  if (n == 1) return {lo};
  std::vector<double> v(n);
  for (int k = 0; k < n; ++k) v[k] = lo + (hi - lo) * k / (n - 1);
  return v;
}

int mechanical_dim(const Config& c, int fallback) {
  const int nb = c.integer("numerics.nb");
  return nb > 0 ? nb : fallback;
}

double damping(const Config& c) {
  const double g = c.number("model.gamma");
  return g > 0.0 ? g : c.number("model.omega") / c.number("model.quality");
}

double coupling_from_ratio(const Config& c) {
  const double ratio = c.number("model.lambda_ratio");
  if (!(ratio < 1.0)) config_error("model.lambda_ratio", "must lie below 1 (the critical point)");
  return ratio * models::critical_coupling(c.number("model.omega"));
}

analysis::Generator generator(const Config& c) {
  const std::string g = c.text("model.generator");
  if (g == "squeezed") return analysis::Generator::squeezed_frame;
  if (g == "local") return analysis::Generator::local;
  return analysis::Generator::eigenbasis;
}

analysis::SensingModel sensing_model(const Config& c, int dim) {
  if (c.text("coupling.source") == "physical") {
    config_error("coupling.source", "sensing experiments take Lambda and xi directly (use direct)");
  }
  analysis::SensingModel m;
  m.omega = c.number("model.omega");
  m.Lambda = coupling_from_ratio(c);
  m.xi = c.number("model.xi");
  m.gamma = damping(c);
  m.temperature = c.number("model.temperature");
  m.scaling = c.number("model.scaling");
  m.gamma_tracks_omega = c.flag("model.gamma_tracks_omega");
  m.dim = dim;
  m.generator = generator(c);
  return m;
}

double state_leakage(const fock::DensityMatrix& rho) {
  if (rho.factor_dims().size() <= 1) return fock::top_leakage(rho, -1);
  double leak = 0.0;
  for (int k = 0; k < static_cast<int>(rho.factor_dims().size()); ++k)
    leak = std::max(leak, fock::top_leakage(rho, k));
  return leak;
}

// Runs `attempt(nb)` and, when it reports (or throws) truncation leakage above
// tolerance, retries once with N_b doubled before failing.
template <class T>
T with_escalation(int nb, double tol, json& diag, const std::function<std::pair<T, double>(int)>& attempt) {
  double first = 0.0;
  try {
    auto [value, leak] = attempt(nb);
    if (leak <= tol) {
      diag["nb"] = nb;
      return value;
    }
    first = leak;
  } catch (const TruncationError& e) {
    first = e.leakage();
  }
  const int doubled = 2 * nb;
  diag["nb_escalated_from"] = nb;
  diag["leakage_before_escalation"] = first;
  diag["nb"] = doubled;
  auto [value, leak] = attempt(doubled);
  if (leak > tol) {
    throw TruncationError("top-level leakage " + fmt(leak) + " still above " + fmt(tol) + " after doubling N_b to " +
                              std::to_string(doubled),
                          leak);
  }
  return value;
}

// ---- physical path -------------------------------------------------------

void check_path(const Config& c) {
  const std::string source = c.text("coupling.source");
  for (const auto& [key, value] : c.explicit_values()) {
    const bool physical_key = key.rfind("junction.", 0) == 0 || key.rfind("membrane.", 0) == 0;
    const bool direct_key = key == "coupling.g2" || key == "coupling.eta_tilde";
    if (source == "direct" && physical_key) config_error(key, "set, but coupling.source = direct ignores the junction path");
    if (source == "physical" && direct_key) config_error(key, "set, but coupling.source = physical derives it from the junction");
  }
}

junction::JunctionParams junction_params(const Config& c, double mu_mev) {
  junction::JunctionParams p;
  p.delta0 = junction::ev_to_angular(c.number("junction.delta0_mev") * 1e-3);
  p.length = c.number("junction.length_nm") * 1e-9;
  p.width = c.number("junction.width_nm") * 1e-9;
  p.mu = junction::ev_to_angular(mu_mev * 1e-3);
  p.fermi_velocity = c.number("junction.fermi_velocity");
  p.charging_energy = c.number("junction.charging_energy");
  p.tail_tolerance = c.number("junction.tail_tolerance");
  p.validate();
  return p;
}

junction::MembraneParams membrane_params(const Config& c, const junction::JunctionParams& p) {
  const double w = c.number("membrane.omega");
  const double q = c.number("model.quality");
  const double nbar = c.number("dissipation.nbar_b");
  if (c.number("membrane.zzpf") > 0.0) return junction::MembraneParams::from_zzpf(w, c.number("membrane.zzpf"), q, nbar);
  const double mass = c.number("membrane.mass") > 0.0 ? c.number("membrane.mass")
                                                       : junction::default_effective_mass(p.length, p.width);
  return junction::MembraneParams::from_mass(w, mass, q, nbar);
}

struct Coupling {
  double g2 = 0.0;         // units of omega
  double eta_tilde = 0.0;  // units of omega
};

Coupling coupling(const Config& c, json& diag) {
  check_path(c);
  Coupling out;
  const double omega = c.number("model.omega");
  if (c.text("coupling.source") == "direct") {
    out.g2 = c.number("coupling.g2");
    out.eta_tilde = c.number("coupling.eta_tilde");
    return out;
  }
  const junction::JunctionParams p = junction_params(c, c.number("junction.mu_mev"));
  const junction::MembraneParams mem = membrane_params(c, p);
  const junction::CircuitParams circuit = junction::circuit_params(p);
  const double g2 = junction::coupling_g2(p, mem);
  out.g2 = omega * g2 / mem.omega;
  out.eta_tilde = omega * circuit.eta_tilde / mem.omega;
  diag["physical"] = {{"g2_rad_per_s", g2},
                      {"eta_tilde_rad_per_s", circuit.eta_tilde},
                      {"omega_r_rad_per_s", circuit.omega_r},
                      {"ej_tilde_rad_per_s", circuit.ej_tilde},
                      {"mode_count", circuit.mode_count},
                      {"zzpf_m", mem.zzpf}};
  return out;
}

// ---- experiments -----------------------------------------------------------

RunResult junction_sweep(const Config& c, int workers) {
  const std::vector<double> mus = linspace(c.number("junction_sweep.mu_min_mev"), c.number("junction_sweep.mu_max_mev"),
                                           c.integer("junction_sweep.mu_points"));
  std::vector<std::vector<std::string>> rows(mus.size());
  parallel_for(mus.size(), workers, [&](std::size_t i) {
    const junction::JunctionParams p = junction_params(c, mus[i]);
    const junction::MembraneParams mem = membrane_params(c, p);
    const junction::ModeSet modes = junction::retained_modes(p);
    const junction::CircuitParams circuit = junction::circuit_params(p, modes);
    rows[i] = {fmt(mus[i] * 1e-3), fmt(junction::coupling_g2(p, mem) / mem.omega), fmt(circuit.ej_tilde),
               fmt(circuit.omega_r)};
  });
  RunResult r;
  Table t;
  t.header = summary_header("junction-sweep");
  for (auto& row : rows) t.add(std::move(row));
  r.tables["junction_sweep"] = std::move(t);
  r.summary = "junction_sweep";
  return r;
}

struct CoolingPoint {
  models::EffectiveParams eff;
  dynamics::SteadyReport report;
  double occupation_b = 0.0;
  double occupation_a = 0.0;
  fock::Matrix rho_b;
  double leakage = 0.0;
};

CoolingPoint cooling_point(const Config& c, const Coupling& k, double amplitude, double detuning, int na, int nb) {
  const double omega = c.number("model.omega");
  junction::CircuitParams circuit;
  circuit.eta_tilde = k.eta_tilde;
  models::DriveParams drive;
  drive.amplitude = amplitude;
  drive.detuning = detuning;
  CoolingPoint p;
  p.eff = models::effective_params(omega, k.g2, circuit, drive);
  const auto h = models::build_h_driven(na, nb, p.eff);
  const auto terms = dynamics::local_dissipators(c.number("dissipation.kappa"), damping(c),
                                                 c.number("dissipation.nbar_b"), {na, nb});
  dynamics::SteadyOptions so;
  so.dense_limit = c.integer("numerics.dense_limit");
  so.leakage_tol = c.number("numerics.leakage_tol");
  p.report = dynamics::steady_state_report(h, terms, so);
  p.occupation_b = analysis::occupation(p.report.rho, 1);
  p.occupation_a = analysis::occupation(p.report.rho, 0);
  p.rho_b = fock::ptrace(p.report.rho, 1).mat();
  p.leakage = state_leakage(p.report.rho);
  return p;
}

double detuning_for(const Config& c, const Coupling& k, double amplitude) {
  if (!c.flag("drive.resonance")) return c.number("drive.detuning");
  return models::resonance_detuning(c.number("model.omega"), k.g2, k.eta_tilde, amplitude);
}

RunResult cooling(const Config& c) {
  RunResult r;
  const Coupling k = coupling(c, r.diagnostics);
  const double amplitude = c.number("drive.amplitude");
  const double detuning = detuning_for(c, k, amplitude);
  const int na = c.integer("numerics.na");
  const CoolingPoint p = with_escalation<CoolingPoint>(
      mechanical_dim(c, 30), c.number("numerics.leakage_tol"), r.diagnostics, [&](int nb) {
        CoolingPoint q = cooling_point(c, k, amplitude, detuning, na, nb);
        return std::make_pair(q, q.leakage);
      });
  Table t;
  t.header = summary_header("cooling");
  t.add({fmt(amplitude), fmt(detuning), fmt(k.g2), fmt(p.eff.Lambda), fmt(p.eff.omega_a), fmt(p.eff.omega_b),
         fmt(p.eff.xi), fmt(p.occupation_b), fmt(p.occupation_a), fmt(p.rho_b(0, 0).real()), fmt(p.rho_b(1, 1).real()),
         fmt(p.leakage), fmt_bool(p.report.unstable), fmt_int(p.rho_b.rows())});
  Table rho;
  rho.header = {"i", "j", "abs_rho"};
  const int shown = std::min<int>(6, static_cast<int>(p.rho_b.rows()));
  for (int i = 0; i < shown; ++i)
    for (int j = 0; j < shown; ++j) rho.add({fmt_int(i), fmt_int(j), fmt(std::abs(p.rho_b(i, j)))});
  r.tables["cooling"] = std::move(t);
  r.tables["cooling_rho"] = std::move(rho);
  r.summary = "cooling";
  r.diagnostics["steady_method"] = p.report.method;
  r.diagnostics["steady_residual"] = p.report.residual;
  r.diagnostics["steady_iterations"] = p.report.iterations;
  return r;
}

RunResult cooling_map(const Config& c, int workers) {
  RunResult r;
  const Coupling k = coupling(c, r.diagnostics);
  const std::vector<double> amps = c.list("cooling_map.amplitudes");
  const std::vector<double> dets = linspace(c.number("cooling_map.detuning_min"), c.number("cooling_map.detuning_max"),
                                            c.integer("cooling_map.detuning_points"));
  const int na = c.integer("numerics.na");
  const int nb = mechanical_dim(c, 30);
  struct Cell {
    double occupation = std::numeric_limits<double>::quiet_NaN();
    double rho00 = std::numeric_limits<double>::quiet_NaN();
    double rho11 = std::numeric_limits<double>::quiet_NaN();
    double leakage = std::numeric_limits<double>::quiet_NaN();
    bool unstable = false;
    std::string error;
  };
  std::vector<Cell> cells(amps.size() * dets.size());
  // Map points keep their leakage and unstable flag instead of escalating:
  // the unstable corner of the map is part of the result.
  parallel_for(cells.size(), workers, [&](std::size_t i) {
    Cell& cell = cells[i];
    try {
      const CoolingPoint p = cooling_point(c, k, amps[i / dets.size()], dets[i % dets.size()], na, nb);
      cell.occupation = p.occupation_b;
      cell.rho00 = p.rho_b(0, 0).real();
      cell.rho11 = p.rho_b(1, 1).real();
      cell.leakage = p.leakage;
      cell.unstable = p.report.unstable;
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
  });
  Table map;
  map.header = {"amplitude", "detuning", "occupation_b", "rho00", "rho11", "leakage", "unstable", "error"};
  Table ridge;
  ridge.header = summary_header("cooling-map");
  for (std::size_t a = 0; a < amps.size(); ++a) {
    double best = std::numeric_limits<double>::quiet_NaN();
    double best_occ = std::numeric_limits<double>::infinity();
    for (std::size_t d = 0; d < dets.size(); ++d) {
      const Cell& cell = cells[a * dets.size() + d];
      map.add({fmt(amps[a]), fmt(dets[d]), fmt(cell.occupation), fmt(cell.rho00), fmt(cell.rho11), fmt(cell.leakage),
               fmt_bool(cell.unstable), cell.error});
      if (cell.error.empty() && !cell.unstable && cell.occupation < best_occ) {
        best_occ = cell.occupation;
        best = dets[d];
      }
    }
    if (std::isnan(best)) best_occ = std::numeric_limits<double>::quiet_NaN();
    ridge.add({fmt(amps[a]), fmt(best), fmt(best_occ)});
  }
  r.tables["cooling_map"] = std::move(map);
  r.tables["cooling_ridge"] = std::move(ridge);
  r.summary = "cooling_ridge";
  r.diagnostics["nb"] = nb;
  return r;
}

RunResult cat(const Config& c) {
  RunResult r;
  if (c.text("coupling.source") == "physical") {
    config_error("coupling.source", "the cat experiment takes Lambda and xi directly (use direct)");
  }
  const double omega = c.number("model.omega");
  const auto eff = models::effective_params_direct(omega, coupling_from_ratio(c), c.number("model.xi"));
  const int m = c.integer("cat.m");
  if (m < 2) config_error("cat.m", "a cat needs at least two components");
  const double beta = c.number("cat.beta");
  const bool kerr_model = c.text("cat.model") == "kerr";
  const double tau = models::cat_time(eff, m);
  // Frame rotation accumulated over tau: Delta for the Kerr model; the full
  // quartic term also shifts the frequency by -2 kerr (normal ordering).
  const double rotation = (kerr_model ? eff.Delta : eff.Delta - 2.0 * eff.kerr) * tau;

  struct CatRun {
    fock::DensityMatrix rho;
  };
  const CatRun run = with_escalation<CatRun>(
      mechanical_dim(c, 60), c.number("numerics.leakage_tol"), r.diagnostics, [&](int nb) {
        const fock::DensityMatrix start = fock::DensityMatrix::pure(fock::coherent(beta, nb, c.number("numerics.leakage_tol")));
        const auto h = kerr_model ? models::build_h_kerr(nb, eff) : models::build_h_squeezed(nb, eff);
        std::vector<dynamics::LindbladTerm> terms;
        if (c.number("cat.gamma") > 0.0) {
          terms = dynamics::squeezed_frame_dissipators(c.number("cat.gamma"), eff.r, eff.Delta,
                                                       c.number("model.temperature"), nb);
        }
        dynamics::EvolveOptions eo;
        eo.leakage_tol = c.number("numerics.leakage_tol");
        eo.tol = 1e-10;
        const auto tr = dynamics::evolve(start, h, terms, {0.0, tau}, eo);
        CatRun out{tr.states.back()};
        return std::make_pair(out, state_leakage(out.rho));
      });

  const double extent = c.number("cat.extent");
  const std::vector<double> axis = linspace(-extent, extent, c.integer("cat.grid_points"));
  const analysis::WignerGrid w = analysis::wigner(run.rho, axis, axis);
  const double fidelity = analysis::cat_fidelity(run.rho, beta, m, 0.0, rotation);
  const int lobes = analysis::wigner_ring_lobes(run.rho, std::sqrt(2.0) * beta);

  Table grid;
  grid.header = {"x", "p", "W"};
  for (std::size_t i = 0; i < axis.size(); ++i)
    for (std::size_t j = 0; j < axis.size(); ++j) grid.add({fmt(axis[i]), fmt(axis[j]), fmt(w.values(i, j))});
  Table summary;
  summary.header = summary_header("cat");
  summary.add({fmt_int(m), fmt(beta), fmt(c.number("model.lambda_ratio")), fmt(eff.xi), fmt(eff.kerr), fmt(tau),
               fmt(fidelity), fmt(w.min()), fmt(w.integral()), fmt_int(lobes), fmt(state_leakage(run.rho)),
               fmt_int(run.rho.dim())});
  r.tables["cat_wigner"] = std::move(grid);
  r.tables["cat"] = std::move(summary);
  r.summary = "cat";
  return r;
}

std::vector<double> time_grid(const Config& c, const analysis::SensingModel& m) {
  double t_max = c.number("numerics.t_max");
  if (t_max <= 0.0) {
    const double r = models::squeeze_parameter(m.omega, m.Lambda);
    const double rate = m.gamma * std::cosh(r) * std::cosh(r);
    if (!(rate > 0.0)) config_error("numerics.t_max", "must be set for a closed system");
    t_max = c.number("numerics.t_max_factor") / rate;
  }
  const int n = c.integer("numerics.time_points");
  if (n < 2) config_error("numerics.time_points", "needs at least two points");
  return linspace(0.0, t_max, n);
}

RunResult qfi_dynamic(const Config& c) {
  RunResult r;
  const double tol = c.number("numerics.leakage_tol");
  const analysis::QfiCurve curve = with_escalation<analysis::QfiCurve>(
      mechanical_dim(c, 40), tol, r.diagnostics, [&](int nb) {
        const analysis::SensingModel m = sensing_model(c, nb);
        dynamics::EvolveOptions eo;
        eo.leakage_tol = tol;
        return std::make_pair(analysis::qfi_dynamic(m, time_grid(c, m), c.number("numerics.fd_step"),
                                                    c.flag("numerics.richardson"), eo),
                              0.0);
      });
  const analysis::QfiFit fit = analysis::fit_qfi(curve.times, curve.values);
  const auto peak = std::max_element(curve.values.begin(), curve.values.end());
  Table t;
  t.header = {"t", "F"};
  for (std::size_t i = 0; i < curve.times.size(); ++i) t.add({fmt(curve.times[i]), fmt(curve.values[i])});
  Table s;
  s.header = summary_header("qfi-dynamic");
  s.add({fmt(c.number("model.lambda_ratio")), fmt(c.number("model.xi")), fmt(c.number("model.temperature")),
         fmt(damping(c)), fmt(fit.C), fmt(fit.zeta), fmt(fit.beta_decay), fmt(fit.t_star), fmt(fit.F_max), fmt(*peak),
         fmt(curve.times[peak - curve.values.begin()]), fmt(fit.residual), fmt_bool(fit.residual_ok),
         fmt(curve.richardson_discrepancy), fmt_bool(curve.richardson_warning), fmt(curve.h)});
  r.tables["qfi_dynamic"] = std::move(t);
  r.tables["qfi_fit"] = std::move(s);
  r.summary = "qfi_fit";
  if (curve.richardson_warning) r.diagnostics["warning"] = "Richardson check at h/2 differs by more than 1%";
  return r;
}

struct SteadyPoint {
  analysis::SteadyQfi qfi;
  double leakage = 0.0;
  int nb = 0;
};

SteadyPoint steady_point(const Config& c, double xi, double temperature, json& diag) {
  const double tol = c.number("numerics.leakage_tol");
  SteadyPoint p = with_escalation<SteadyPoint>(mechanical_dim(c, 40), tol, diag, [&](int nb) {
    analysis::SensingModel m = sensing_model(c, nb);
    m.xi = xi;
    m.temperature = temperature;
    dynamics::SteadyOptions so;
    so.dense_limit = c.integer("numerics.dense_limit");
    so.leakage_tol = tol;
    SteadyPoint q;
    q.qfi = analysis::qfi_steady_numeric(m, c.number("numerics.steady_fd_step"), so);
    q.leakage = state_leakage(q.qfi.rho);
    q.nb = nb;
    return std::make_pair(q, q.leakage);
  });
  return p;
}

double analytic_or_nan(const Config& c, double xi, double temperature) {
  if (xi != 0.0) return std::numeric_limits<double>::quiet_NaN();
  return analysis::qfi_steady_analytic(c.number("model.omega"), coupling_from_ratio(c), temperature,
                                       c.number("model.scaling"));
}

RunResult qfi_steady(const Config& c) {
  RunResult r;
  const double xi = c.number("model.xi"), temperature = c.number("model.temperature");
  const SteadyPoint p = steady_point(c, xi, temperature, r.diagnostics);
  const double omega = c.number("model.omega");
  const double analytic = analytic_or_nan(c, xi, temperature);
  Table t;
  t.header = summary_header("qfi-steady");
  t.add({fmt(c.number("model.lambda_ratio")), fmt(coupling_from_ratio(c)), fmt(xi), fmt(temperature), fmt(p.qfi.value),
         fmt(p.qfi.value * omega * omega), fmt(analytic), fmt(std::abs(p.qfi.value - analytic) / analytic),
         fmt(analysis::l1_coherence(p.qfi.rho)), fmt(p.qfi.richardson_discrepancy), fmt(p.leakage), fmt_int(p.nb)});
  r.tables["qfi_steady"] = std::move(t);
  r.summary = "qfi_steady";
  return r;
}

RunResult criticality_scan(const Config& c, int workers) {
  RunResult r;
  const analysis::SensingModel base = sensing_model(c, mechanical_dim(c, 40));
  std::vector<double> lams;
  for (double ratio : c.list("scan.ratios")) {
    if (!(ratio >= 0.0 && ratio < 1.0)) config_error("scan.ratios", "values must lie in [0, 1)");
    lams.push_back(ratio * models::critical_coupling(base.omega));
  }
  analysis::ScanOptions so;
  so.time_points = c.integer("numerics.time_points");
  so.t_max_factor = c.number("numerics.t_max_factor");
  so.t_max = c.number("numerics.t_max");
  so.fd_step = c.number("numerics.fd_step");
  so.workers = workers;
  const analysis::ScanResult scan = analysis::criticality_scan(base, lams, so);
  Table t;
  t.header = {"lambda_ratio", "Lambda", "F_max", "t_at_max", "F_max_fit", "t_star", "zeta", "beta_decay",
              "fit_residual", "F_ss", "C_l1_ss", "nb", "error"};
  int good = 0;
  for (const auto& row : scan.rows) {
    t.add({fmt(row.Lambda_ratio), fmt(row.Lambda), fmt(row.F_max), fmt(row.t_at_max), fmt(row.F_max_fit),
           fmt(row.t_star), fmt(row.zeta), fmt(row.beta_decay), fmt(row.fit_residual), fmt(row.F_ss), fmt(row.C_l1_ss),
           fmt_int(row.dim), row.error});
    if (row.error.empty()) ++good;
  }
  Table e;
  e.header = summary_header("criticality-scan");
  e.add({fmt(scan.exponent), fmt(scan.exponent_intercept), fmt_int(good)});
  r.tables["criticality_scan"] = std::move(t);
  r.tables["criticality_exponent"] = std::move(e);
  r.summary = "criticality_exponent";
  return r;
}

RunResult temperature_scan(const Config& c, int workers) {
  RunResult r;
  const std::vector<double> xis = c.list("scan.xis");
  const std::vector<double> temps = c.list("scan.temperatures");
  for (double t : temps)
    if (t < 0.0) config_error("scan.temperatures", "values must be non-negative");
  const std::size_t n = xis.size() * temps.size();
  std::vector<std::vector<std::string>> rows(n);
  std::vector<json> diags(n, json::object());
  parallel_for(n, workers, [&](std::size_t i) {
    const double xi = xis[i / temps.size()], t = temps[i % temps.size()];
    try {
      const SteadyPoint p = steady_point(c, xi, t, diags[i]);
      rows[i] = {fmt(xi), fmt(t), fmt(p.qfi.value), fmt(analytic_or_nan(c, xi, t)),
                 fmt(analysis::l1_coherence(p.qfi.rho)), fmt(p.leakage), fmt_int(p.nb), ""};
    } catch (const std::exception& e) {
      const std::string nan = fmt(std::numeric_limits<double>::quiet_NaN());
      rows[i] = {fmt(xi), fmt(t), nan, nan, nan, nan, "", e.what()};
    }
  });
  Table tab;
  tab.header = summary_header("temperature-scan");
  for (auto& row : rows) tab.add(std::move(row));
  r.tables["temperature_scan"] = std::move(tab);
  r.summary = "temperature_scan";
  json points = json::array();
  for (const json& d : diags) points.push_back(d);
  r.diagnostics["points"] = points;
  return r;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

void Table::add(std::vector<std::string> row) {
  if (row.size() != header.size()) throw Error(ErrorKind::shape, "table row does not match its header");
  rows.push_back(std::move(row));
}

std::string Table::csv() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += csv_field(cells[i]);
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"junction-sweep", "cooling",       "cooling-map",      "cat",
                                              "qfi-dynamic",    "qfi-steady",    "criticality-scan", "temperature-scan"};
  return names;
}

bool is_experiment(const std::string& name) {
  const auto& n = experiment_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

std::vector<std::string> summary_header(const std::string& name) {
  if (name == "junction-sweep") return {"mu_eV", "g2_over_omega", "ej_tilde", "omega_r"};
  if (name == "cooling")
    return {"amplitude", "detuning", "g2",      "Lambda", "omega_a", "omega_b",  "xi",
            "occupation_b", "occupation_a", "rho00", "rho11", "leakage", "unstable", "nb"};
  if (name == "cooling-map") return {"amplitude", "best_detuning", "min_occupation"};
  if (name == "cat")
    return {"m", "beta", "lambda_ratio", "xi", "kerr", "tau", "fidelity", "wigner_min", "wigner_integral", "lobes",
            "leakage", "nb"};
  if (name == "qfi-dynamic")
    return {"lambda_ratio", "xi",        "temperature", "gamma",    "C",           "zeta",
            "beta_decay",   "t_star",    "F_max_fit",   "F_max",    "t_at_max",    "fit_residual",
            "residual_ok",  "richardson_discrepancy",   "richardson_warning",      "fd_step"};
  if (name == "qfi-steady")
    return {"lambda_ratio", "Lambda", "xi", "temperature", "F_ss", "F_ss_omega2", "F_analytic", "relative_error",
            "C_l1", "richardson_discrepancy", "leakage", "nb"};
  if (name == "criticality-scan") return {"exponent", "intercept", "points"};
  if (name == "temperature-scan") return {"xi", "temperature", "F_ss", "F_analytic", "C_l1", "leakage", "nb", "error"};
  throw Error(ErrorKind::config, "experiment: unknown experiment '" + name + "'");
}

RunResult run_experiment(const std::string& name, const Config& cfg, int workers) {
  const std::string declared = cfg.text("experiment");
  if (!declared.empty() && declared != name) {
    config_error("experiment", "config declares '" + declared + "' but '" + name + "' was requested");
  }
  RunResult r;
  if (name == "junction-sweep") r = junction_sweep(cfg, workers);
  else if (name == "cooling") r = cooling(cfg);
  else if (name == "cooling-map") r = cooling_map(cfg, workers);
  else if (name == "cat") r = cat(cfg);
  else if (name == "qfi-dynamic") r = qfi_dynamic(cfg);
  else if (name == "qfi-steady") r = qfi_steady(cfg);
  else if (name == "criticality-scan") r = criticality_scan(cfg, workers);
  else if (name == "temperature-scan") r = temperature_scan(cfg, workers);
  else throw Error(ErrorKind::config, "experiment: unknown experiment '" + name + "'");
  r.experiment = name;
  return r;
}

RunResult run_sweep(const std::string& name, const Config& cfg, const std::string& axis,
                    const std::vector<std::string>& values, int workers) {
  const Field* f = find_field(axis);
  if (!f) config_error(axis, "unknown sweep axis");
  if (f->type != FieldType::number && f->type != FieldType::integer) config_error(axis, "sweep axis must be numeric");
  const std::vector<std::string> inner = summary_header(name);

  std::vector<std::vector<std::vector<std::string>>> rows(values.size());
  parallel_for(values.size(), workers, [&](std::size_t i) {
    try {
      Config point = cfg;
      point.set(axis, values[i]);
      const RunResult res = run_experiment(name, point, 1);
      for (const auto& row : res.tables.at(res.summary).rows) {
        std::vector<std::string> out{values[i]};
        out.insert(out.end(), row.begin(), row.end());
        out.push_back("");
        rows[i].push_back(std::move(out));
      }
    } catch (const std::exception& e) {
      std::vector<std::string> out{values[i]};
      out.resize(inner.size() + 1);
      out.push_back(e.what());
      rows[i] = {std::move(out)};
    }
  });

  Table t;
  t.header.push_back(axis);
  t.header.insert(t.header.end(), inner.begin(), inner.end());
  t.header.push_back("error");
  int failed = 0;
  for (auto& group : rows)
    for (auto& row : group) {
      if (!row.back().empty()) ++failed;
      t.add(std::move(row));
    }
  RunResult r;
  r.experiment = name;
  r.tables["sweep"] = std::move(t);
  r.summary = "sweep";
  r.diagnostics["failed_points"] = failed;
  return r;
}

nlohmann::json make_manifest(const RunResult& result, const Config& cfg, const RunInfo& info) {
  json m;
  m["command"] = info.command;
  m["experiment"] = result.experiment;
  m["config"] = cfg.resolved();
  m["explicit"] = cfg.explicit_values();
  m["library_version"] = library_version();
  m["wall_clock_seconds"] = info.wall_clock_seconds;
  m["workers"] = info.workers;
  m["seed"] = info.seed;
  m["diagnostics"] = result.diagnostics;
  json outputs = json::array();
  for (const auto& [stem, table] : result.tables) outputs.push_back(stem + ".csv");
  m["outputs"] = outputs;
  if (info.command == "sweep") m["sweep"] = {{"axis", info.sweep_axis}, {"values", info.sweep_values}};
  m["units"] = {
      {"dynamics", "frequencies, rates and temperatures in units of model.omega"},
      {"junction",
       {{"delta0_rad_per_s", junction::ev_to_angular(cfg.number("junction.delta0_mev") * 1e-3)},
        {"mu_rad_per_s", junction::ev_to_angular(cfg.number("junction.mu_mev") * 1e-3)},
        {"length_m", cfg.number("junction.length_nm") * 1e-9},
        {"width_m", cfg.number("junction.width_nm") * 1e-9},
        {"charging_energy_rad_per_s", cfg.number("junction.charging_energy")},
        {"membrane_omega_rad_per_s", cfg.number("membrane.omega")}}}};
  return m;
}

std::vector<std::filesystem::path> write_run(const std::filesystem::path& out, const RunResult& result,
                                             const nlohmann::json& manifest) {
  std::filesystem::create_directories(out);
  std::vector<std::filesystem::path> paths;
  for (const auto& [stem, table] : result.tables) {
    const auto path = out / (stem + ".csv");
    std::ofstream f(path, std::ios::binary);
    f << table.csv();
    if (!f) throw Error(ErrorKind::config, "could not write " + path.string());
    paths.push_back(path);
  }
  std::ofstream mf(out / "manifest.json", std::ios::binary);
  mf << manifest.dump(2) << '\n';
  if (!mf) throw Error(ErrorKind::config, "could not write manifest.json");
  return paths;
}

Replay replay(const std::filesystem::path& manifest_path, int workers) {
  std::ifstream f(manifest_path);
  if (!f) throw Error(ErrorKind::config, "cannot open manifest " + manifest_path.string());
  json m;
  try {
    f >> m;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::config, "manifest " + manifest_path.string() + ": " + e.what());
  }
  Replay out;
  try {
    out.config = Config::from_map(m.at("explicit").get<std::map<std::string, std::string>>());
    out.info.command = m.at("command").get<std::string>();
    out.info.seed = m.value("seed", 0LL);
    out.info.workers = workers;
    const std::string experiment = m.at("experiment").get<std::string>();
    if (out.info.command == "sweep") {
      out.info.sweep_axis = m.at("sweep").at("axis").get<std::string>();
      out.info.sweep_values = m.at("sweep").at("values").get<std::vector<std::string>>();
      out.result = run_sweep(experiment, out.config, out.info.sweep_axis, out.info.sweep_values, workers);
    } else {
      out.result = run_experiment(experiment, out.config, workers);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::config, "manifest " + manifest_path.string() + ": " + e.what());
  }
  return out;
}

const char* library_version() { return GJJ_VERSION; }

}  // namespace gjj::cli
