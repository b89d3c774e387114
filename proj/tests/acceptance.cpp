// Acceptance run: one PASS/FAIL line per criterion, with the measured values.
// Exit status is the number of failing criteria (0 when all pass).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>
#include <string>

#include <Eigen/Dense>

#include "gjj/analysis.hpp"
#include "gjj/cli/experiments.hpp"
#include "gjj/dynamics.hpp"
#include "gjj/error.hpp"
#include "gjj/fock.hpp"
#include "gjj/junction.hpp"
#include "gjj/models.hpp"

using namespace gjj;
using analysis::Generator;
using analysis::SensingModel;
using fock::Matrix;
using fock::cplx;
namespace fs = std::filesystem;

namespace {

constexpr double kOmega = 1.0;
constexpr double kLc = -0.25;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string num(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// 8 Lambda^2 / Delta^4 written out from the gap, independent of the library.
double zero_t_qfi(double lam) {
  const double gap2 = kOmega * kOmega + 4.0 * kOmega * lam;
  return 8.0 * lam * lam / (gap2 * gap2);
}

// Squeezed thermal state at frequency w under Lambda(w) = Lambda omega / w,
// built on a padded space and cropped.
Matrix squeezed_thermal_at(double w, double lam, double temperature, int dim) {
  const double l = lam * kOmega / w;
  const double gap = std::sqrt(w * w + 4.0 * w * l);
  const double r = 0.25 * std::log(w / (w + 4.0 * l));
  const double n = temperature > 0.0 ? 1.0 / std::expm1(gap / temperature) : 0.0;
  const int big = 2 * dim + 40;
  Matrix th = Matrix::Zero(big, big);
  for (int k = 0; k < big; ++k) th(k, k) = std::pow(n, k) / std::pow(n + 1.0, k + 1.0);
  const Matrix s = fock::squeeze(r, big).mat();
  return (s.adjoint() * th * s).topLeftCorner(dim, dim);
}

SensingModel sensing(double ratio, int dim, double gamma = 1e-3) {
  SensingModel m;
  m.omega = kOmega;
  m.Lambda = ratio * kLc;
  m.gamma = gamma;
  m.dim = dim;
  return m;
}

Outcome criterion1() {
  Outcome o;
  o.pass = true;
  for (double ratio : {0.5, 0.8, 0.9}) {
    const auto t0 = std::chrono::steady_clock::now();
    const SensingModel m = sensing(ratio, 60);
    const double f = analysis::qfi_steady_numeric(m).value;
    const double ref = zero_t_qfi(m.Lambda);
    const double rel = std::abs(f - ref) / ref;
    const double secs = elapsed(t0);
    o.pass = o.pass && rel < 1e-2 && secs < 60.0;
    o.detail += " ratio " + num(ratio, 2) + ": F=" + num(f, 6) + " ref=" + num(ref, 6) + " rel=" + num(rel, 2) +
                " (" + num(secs, 2) + " s);";
  }
  o.detail += " N_b=60";
  return o;
}

Outcome criterion2() {
  Outcome o;
  o.pass = true;
  const double lam = 0.8 * kLc, h = 1e-5;
  const int dim = 140;
  for (double t : {0.5, 2.0}) {
    const Matrix c = squeezed_thermal_at(kOmega, lam, t, dim);
    const Matrix d = (squeezed_thermal_at(kOmega + h, lam, t, dim) - squeezed_thermal_at(kOmega - h, lam, t, dim)) / (2 * h);
    const double numeric = analysis::qfi_from_state(c, d);
    const double closed = analysis::qfi_steady_analytic(kOmega, lam, t);
    const double rel = std::abs(numeric - closed) / closed;
    o.pass = o.pass && rel < 1e-2;
    o.detail += " T=" + num(t, 2) + ": numeric=" + num(numeric, 6) + " closed=" + num(closed, 6) + " rel=" +
                num(rel, 2) + ";";
  }
  for (double ratio : {0.5, 0.8, 0.9}) {
    const double l = ratio * kLc;
    const double rel = std::abs(analysis::qfi_steady_analytic(kOmega, l, 1e-3) - zero_t_qfi(l)) / zero_t_qfi(l);
    o.pass = o.pass && rel < 1e-10;
    o.detail += " T->0 ratio " + num(ratio, 2) + " rel=" + num(rel, 2) + ";";
  }
  return o;
}

Outcome criterion3() {
  const auto t0 = std::chrono::steady_clock::now();
  const SensingModel base = sensing(0.0, 40, 1e-6);
  std::vector<double> lams;
  for (double ratio = 0.6; ratio < 0.951; ratio += 0.05) lams.push_back(ratio * kLc);
  analysis::ScanOptions so;
  so.workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const analysis::ScanResult scan = analysis::criticality_scan(base, lams, so);
  const double secs = elapsed(t0);
  int good = 0;
  for (const auto& row : scan.rows) good += row.error.empty();
  Outcome o;
  o.pass = good == static_cast<int>(lams.size()) && std::abs(scan.exponent + 1.0) <= 0.15 && secs < 900.0;
  o.detail = " slope=" + num(scan.exponent, 5) + " (target -1 +- 0.15) over " + std::to_string(good) + "/" +
             std::to_string(lams.size()) + " points, gamma=1e-6, " + num(secs, 3) + " s";
  return o;
}

Outcome criterion4() {
  Outcome o;
  SensingModel closed = sensing(0.8, 30, 0.0);
  closed.generator = Generator::local;
  std::vector<double> times(201);
  for (int k = 0; k < 201; ++k) times[k] = 400.0 * k / 200;
  const analysis::QfiFit fc = analysis::fit_qfi(times, analysis::qfi_dynamic(closed, times).values);

  const SensingModel open = sensing(0.8, 40, 1e-3);
  const double r = models::squeeze_parameter(kOmega, open.Lambda);
  const double t_max = 8.0 / (open.gamma * std::cosh(r) * std::cosh(r));
  std::vector<double> ot(801);
  for (int k = 0; k < 801; ++k) ot[k] = t_max * k / 800;
  const analysis::QfiFit fo = analysis::fit_qfi(ot, analysis::qfi_dynamic(open, ot).values);

  o.pass = std::abs(fc.zeta - 2.0) <= 0.1 && fo.zeta <= 2.0 && std::isfinite(fo.t_star) &&
           std::abs(fo.t_star - fo.zeta / fo.beta_decay) <= 1e-9 * fo.t_star;
  o.detail = " closed zeta=" + num(fc.zeta, 5) + "; open (gamma=1e-3) zeta=" + num(fo.zeta, 5) +
             " t*=" + num(fo.t_star, 5) + " zeta/beta=" + num(fo.zeta / fo.beta_decay, 5);
  return o;
}

Outcome criterion5() {
  const auto t0 = std::chrono::steady_clock::now();
  cli::Config c;
  c.set("coupling.source", "physical");
  c.set("numerics.na", "8");
  c.set("numerics.nb", "30");
  // Evaluated at the stated truncation; the measured leakage is reported.
  c.set("numerics.leakage_tol", "1");
  const cli::RunResult r = cli::run_experiment("cooling", c);
  const double secs = elapsed(t0);
  const cli::Table& t = r.tables.at("cooling");
  auto col = [&](const std::string& name) {
    for (std::size_t i = 0; i < t.header.size(); ++i)
      if (t.header[i] == name) return std::stod(t.rows[0][i]);
    return std::nan("");
  };
  const double n = col("occupation_b"), low = col("rho00") + col("rho11");
  Outcome o;
  o.pass = n < 1.0 && low > 0.9 && secs < 600.0;
  o.detail = " <b^dag b>=" + num(n, 5) + " rho00+rho11=" + num(low, 5) + " G2=" + num(col("g2"), 5) +
             " delta=" + num(col("detuning"), 5) + " top-level leakage=" + num(col("leakage"), 3) +
             " (N_a=8, N_b=30, " + num(secs, 3) + " s)";
  return o;
}

Outcome criterion6() {
  Outcome o;
  o.pass = true;
  const auto eff = models::effective_params_direct(kOmega, 0.8 * kLc, 1e-4);
  const double beta = 2.0;
  const int dim = 60;
  const fock::Vector start = fock::coherent(beta, dim, 1e-12);
  for (int m : {2, 4}) {
    const double tau = models::cat_time(eff, m);
    // Oracle: coherent amplitudes with the Kerr phases e^{i kerr n(n-1) t}
    // and the free rotation e^{-i Delta n t}.
    fock::Vector oracle(dim);
    for (int n = 0; n < dim; ++n)
      oracle(n) = start(n) * std::exp(cplx(0.0, eff.kerr * n * (n - 1.0) * tau - eff.Delta * n * tau));
    const auto tr = dynamics::evolve(fock::DensityMatrix::pure(start), models::build_h_kerr(dim, eff), {}, {0.0, tau});
    const double f = fock::fidelity(tr.states.back(), oracle);
    o.pass = o.pass && f >= 1.0 - 1e-8;
    o.detail += " Kerr m=" + std::to_string(m) + ": 1-F=" + num(1.0 - f, 2) + ";";
  }
  for (int m : {2, 4}) {
    const double tau = models::cat_time(eff, m);
    const auto tr =
        dynamics::evolve(fock::DensityMatrix::pure(start), models::build_h_squeezed(dim, eff), {}, {0.0, tau});
    const auto& rho = tr.states.back();
    std::vector<double> axis(121);
    for (int k = 0; k < 121; ++k) axis[k] = -5.0 + 10.0 * k / 120;
    const double wmin = analysis::wigner(rho, axis, axis).min();
    const int lobes = analysis::wigner_ring_lobes(rho, std::sqrt(2.0) * beta);
    o.pass = o.pass && wmin < -0.01 && lobes == m;
    o.detail += " full H m=" + std::to_string(m) + ": min W=" + num(wmin, 4) + " lobes=" + std::to_string(lobes) + ";";
  }
  return o;
}

Outcome criterion7() {
  Outcome o;
  o.pass = true;
  const int dim = 100;
  for (double ratio : {0.5, 0.8})
    for (double t : {0.0, 1.0}) {
      SensingModel eig = sensing(ratio, dim);
      eig.temperature = t;
      const Matrix a = dynamics::steady_state(eig.hamiltonian(kOmega), eig.dissipators(kOmega)).mat();
      SensingModel sq = eig;
      sq.generator = Generator::squeezed_frame;
      const Matrix frame = dynamics::steady_state(sq.hamiltonian(kOmega), sq.dissipators(kOmega)).mat();
      // Back to the lab frame on a padded space.
      const int big = 2 * dim + 40;
      Matrix padded = Matrix::Zero(big, big);
      padded.topLeftCorner(dim, dim) = frame;
      const Matrix s = fock::squeeze(models::squeeze_parameter(kOmega, eig.Lambda), big).mat();
      const Matrix lab = (s.adjoint() * padded * s).topLeftCorner(dim, dim);
      const double d = fock::trace_distance(a, lab);
      o.pass = o.pass && d < 1e-8;
      o.detail += " ratio " + num(ratio, 2) + " T=" + num(t, 2) + ": D=" + num(d, 2) + ";";
    }
  return o;
}

Outcome criterion8() {
  using namespace junction;
  JunctionParams p;
  p.delta0 = ev_to_angular(2e-4);
  p.length = 35e-9;
  p.width = 350e-9;
  p.fermi_velocity = 2.5e6;
  p.charging_energy = 1e6;
  p.mu = ev_to_angular(0.05);

  double jump = 0.0;
  for (int n : {0, 3, 7}) {
    const double q = transverse_wavenumber(p, n);
    for (double rel = -1e-9; rel <= 1e-9; rel += 1e-10) {
      JunctionParams a = p, b = p;
      a.mu = q * p.fermi_velocity * (1.0 + rel);
      b.mu = q * p.fermi_velocity * (1.0 + rel + 1e-10);
      jump = std::max(jump, std::abs(transmission(a, n) - transmission(b, n)));
    }
  }

  double taylor = 0.0;
  for (double mu_ev : {0.0, 0.05, 0.15}) {
    JunctionParams q = p;
    q.mu = ev_to_angular(mu_ev);
    const ModeSet modes = retained_modes(q);
    const CircuitParams c = circuit_params(q, modes);
    Eigen::MatrixXd a(16, 4);
    Eigen::VectorXd y(16);
    const double h0 = josephson_potential(q, modes, 0.0);
    for (int i = 0; i < 16; ++i) {
      const double phi = 0.02 + 0.01 * i;
      for (int k = 0; k < 4; ++k) a(i, k) = std::pow(phi, 2 * k + 2);
      y(i) = josephson_potential(q, modes, phi) - h0;
    }
    const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(y);
    taylor = std::max(taylor, std::abs(2.0 * coef(0) - c.ej_tilde) / c.ej_tilde);
    taylor = std::max(taylor, std::abs(-coef(1) - c.eta) / c.eta);
  }

  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> mu(-0.3, 0.3), len(10e-9, 200e-9), aspect(1.0, 20.0);
  std::uniform_int_distribution<int> mode(0, 8);
  double deriv = 0.0;
  for (int i = 0; i < 100; ++i) {
    JunctionParams q = p;
    q.mu = ev_to_angular(mu(rng));
    q.length = len(rng);
    q.width = aspect(rng) * q.length;
    const int n = mode(rng);
    const double h = 1e-6 * q.length;
    const double fd = (transmission_at_length(q, n, q.length + h) - transmission_at_length(q, n, q.length - h)) / (2 * h);
    const double scale = std::max(std::abs(fd), 1e-3 * transmission(q, n) / q.length);
    deriv = std::max(deriv, std::abs(transmission_dL(q, n) - fd) / scale);
  }
  Outcome o;
  o.pass = jump < 1e-8 && taylor < 1e-4 && deriv < 1e-6;
  o.detail = " continuity jump=" + num(jump, 2) + "; Taylor rel=" + num(taylor, 2) + "; dtau/dL rel=" + num(deriv, 2) +
             " (100 draws)";
  return o;
}

Outcome criterion9() {
  Outcome o;
  const int dim = 80;
  auto c_l1 = [&](double ratio, double xi, double t) {
    SensingModel m = sensing(ratio, dim);
    m.xi = xi;
    m.temperature = t;
    return analysis::l1_coherence(dynamics::steady_state(m.hamiltonian(kOmega), m.dissipators(kOmega)));
  };
  bool mono = true;
  double prev = -1.0;
  std::string trend;
  for (double ratio : {0.5, 0.6, 0.7, 0.8, 0.9, 0.95}) {
    const double c = c_l1(ratio, 0.0, 0.0);
    mono = mono && c > prev;
    prev = c;
    trend += " " + num(c, 4);
  }
  bool larger = true;
  double worst = std::numeric_limits<double>::infinity();
  for (double ratio : {0.6, 0.8, 0.9})
    for (double t : {0.0, 0.5, 1.0}) {
      const double gain = c_l1(ratio, 5e-5, t) - c_l1(ratio, 0.0, t);
      larger = larger && gain > 0.0;
      worst = std::min(worst, gain);
    }
  o.pass = mono && larger;
  o.detail = " C_l1(T=0, ratio 0.5..0.95):" + trend + "; min C_l1(xi=5e-5)-C_l1(0) over 3x3 grid=" + num(worst, 3);
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

Outcome criterion10() {
  const fs::path root = fs::temp_directory_path() / "gjj_acceptance";
  fs::remove_all(root);
  cli::Config c;
  c.set("model.temperature", "0.5");
  c.set("numerics.nb", "30");
  cli::RunInfo info;
  info.command = "sweep";
  info.sweep_axis = "model.lambda_ratio";
  info.sweep_values = {"0.5", "0.6", "0.7", "0.8", "0.9"};
  info.workers = 4;

  const cli::RunResult par = cli::run_sweep("qfi-steady", c, info.sweep_axis, info.sweep_values, 4);
  write_run(root / "first", par, make_manifest(par, c, info));
  const cli::RunResult ser = cli::run_sweep("qfi-steady", c, info.sweep_axis, info.sweep_values, 1);
  const bool same_sweep = par.tables.at("sweep").csv() == ser.tables.at("sweep").csv();

  const cli::Replay again = cli::replay(root / "first" / "manifest.json", 2);
  write_run(root / "second", again.result, make_manifest(again.result, again.config, again.info));
  const bool identical = slurp(root / "first" / "sweep.csv") == slurp(root / "second" / "sweep.csv") &&
                         !slurp(root / "first" / "sweep.csv").empty();

  cli::Config scan;
  scan.set("scan.temperatures", "0,1");
  scan.set("numerics.nb", "30");
  const bool same_scan = cli::run_experiment("temperature-scan", scan, 1).tables.at("temperature_scan").csv() ==
                         cli::run_experiment("temperature-scan", scan, 4).tables.at("temperature_scan").csv();
  fs::remove_all(root);

  Outcome o;
  o.pass = same_sweep && identical && same_scan;
  o.detail = std::string(" replay byte-identical=") + (identical ? "yes" : "no") +
             "; parallel sweep == serial=" + (same_sweep ? "yes" : "no") +
             "; parallel temperature-scan == serial=" + (same_scan ? "yes" : "no");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"analytic steady-state QFI", criterion1},   {"finite-temperature closed form", criterion2},
      {"criticality exponent", criterion3},        {"closed-system scaling", criterion4},
      {"parametric cooling", criterion5},          {"cat generation", criterion6},
      {"generator equivalence", criterion7},       {"junction layer", criterion8},
      {"coherence trend", criterion9},             {"infrastructure", criterion10},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string(" error: ") + e.what();
    }
    failed += !o.pass;
    std::printf("criterion %zu (%s): %s |%s\n", i + 1, criteria[i].first, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria pass\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed;
}
