#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "gjj/error.hpp"
#include "gjj/junction.hpp"

using namespace gjj;
using namespace gjj::junction;

namespace {

constexpr double kPi = std::numbers::pi;

JunctionParams device(double mu_ev = 0.05) {
  JunctionParams p;
  p.delta0 = ev_to_angular(2e-4);
  p.length = 35e-9;
  p.width = 350e-9;
  p.fermi_velocity = 2.5e6;
  p.charging_energy = 1e6;
  p.mu = ev_to_angular(mu_ev);
  return p;
}

// The textbook form k^2 / (k^2 cos^2 kL + kF^2 sin^2 kL), written out
// independently of the library with plain complex arithmetic.
double raw_transmission(double kf, double q, double L) {
  const std::complex<double> k = std::sqrt(std::complex<double>(kf * kf - q * q, 0.0));
  const auto c = std::cos(k * L), s = std::sin(k * L);
  return std::real(k * k / (k * k * c * c + kf * kf * s * s));
}

double sech(double x) { return 1.0 / std::cosh(x); }

}  // namespace

TEST_CASE("transmission at the Dirac point is sech^2") {
  JunctionParams p = device();
  p.mu = 0.0;
  p.width = p.length;
  const double expected = std::pow(sech(kPi / 2.0), 2);
  CHECK(transmission(p, 0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(0.1588).epsilon(1e-3));
}

TEST_CASE("resonant mode transmits fully") {
  JunctionParams p = device();
  const double q = transverse_wavenumber(p, 0);
  const double k = 2.0 * kPi / p.length;  // kL = 2 pi
  p.mu = std::sqrt(k * k + q * q) * p.fermi_velocity;
  CHECK(transmission(p, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(transmission_dL(p, 0)) < 1e-9 / p.length);
}

TEST_CASE("transmission at k = 0 matches the extrapolated limit") {
  JunctionParams p = device();
  const double q = transverse_wavenumber(p, 2);
  p.mu = q * p.fermi_velocity;
  const double L = p.length;
  // Evaluate the raw formula at k = 1e-8 q and k = 1e-8 i q (either side of
  // the boundary) and average; kF^2 = k^2 + q^2 is kept exact.
  auto raw_at = [&](std::complex<double> k) {
    const std::complex<double> kf2 = k * k + q * q;
    const auto c = std::cos(k * L), s = std::sin(k * L);
    return std::real(k * k / (k * k * c * c + kf2 * s * s));
  };
  const double limit = 0.5 * (raw_at({1e-8 * q, 0.0}) + raw_at({0.0, 1e-8 * q}));
  CHECK(transmission(p, 2) == doctest::Approx(limit).epsilon(1e-9));
  CHECK(transmission(p, 2) == doctest::Approx(1.0 / (1.0 + q * q * L * L)).epsilon(1e-12));
}

TEST_CASE("transmission is continuous across the propagating/evanescent boundary") {
  JunctionParams p = device();
  for (int n : {0, 3, 7}) {
    const double q = transverse_wavenumber(p, n);
    double worst = 0.0;
    for (double rel = -1e-9; rel <= 1e-9; rel += 1e-10) {
      JunctionParams a = p, b = p;
      a.mu = q * p.fermi_velocity * (1.0 + rel);
      b.mu = q * p.fermi_velocity * (1.0 + rel + 1e-10);
      worst = std::max(worst, std::abs(transmission(a, n) - transmission(b, n)));
    }
    CHECK(worst < 1e-8);
  }
}

TEST_CASE("transmission agrees with the raw formula and stays in (0, 1]") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> mu(-0.2, 0.2);
  for (int i = 0; i < 200; ++i) {
    JunctionParams p = device(mu(rng));
    const int n = i % 12;
    const double t = transmission(p, n);
    CHECK(t > 0.0);
    CHECK(t <= 1.0);
    const double kf = p.mu / p.fermi_velocity;
    CHECK(t == doctest::Approx(raw_transmission(kf, transverse_wavenumber(p, n), p.length)).epsilon(1e-9));
  }
}

TEST_CASE("dtau/dL at the Dirac point") {
  JunctionParams p = device();
  p.mu = 0.0;
  p.width = p.length;
  const double q = kPi / (2.0 * p.width);
  const double expected = -2.0 * q * std::pow(sech(kPi / 2.0), 2) * std::tanh(kPi / 2.0);
  CHECK(transmission_dL(p, 0) == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("analytic dtau/dL matches central differences on random draws") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> mu(-0.3, 0.3), len(10e-9, 200e-9), aspect(1.0, 20.0);
  std::uniform_int_distribution<int> mode(0, 8);
  int checked = 0;
  for (int i = 0; i < 100; ++i) {
    JunctionParams p = device(mu(rng));
    p.length = len(rng);
    p.width = aspect(rng) * p.length;
    const int n = mode(rng);
    const double h = 1e-6 * p.length;
    const double fd =
        (transmission_at_length(p, n, p.length + h) - transmission_at_length(p, n, p.length - h)) / (2.0 * h);
    const double an = transmission_dL(p, n);
    // Relative to the derivative itself, with a floor well below the natural
    // scale tau/L for the rare draw sitting on a stationary point.
    const double scale = std::max(std::abs(fd), 1e-3 * transmission(p, n) / p.length);
    CHECK(std::abs(an - fd) <= 1e-6 * scale);
    ++checked;
  }
  CHECK(checked == 100);
}

TEST_CASE("long evanescent junction: transmission and derivative vanish") {
  JunctionParams p = device();
  p.mu = 0.0;
  CHECK(transmission_at_length(p, 0, 1e-3) < 1e-100);
  CHECK(std::abs(transmission_dL_at_length(p, 0, 1e-3)) < 1e-90);
}

TEST_CASE("Andreev energies") {
  JunctionParams p = device();
  CHECK(andreev_energy(p, 0, 0.0) == doctest::Approx(p.delta0));
  p.mu = std::sqrt(std::pow(2 * kPi / p.length, 2) + std::pow(transverse_wavenumber(p, 0), 2)) * p.fermi_velocity;
  CHECK(std::abs(andreev_energy(p, 0, kPi)) < 1e-5 * p.delta0);
}

TEST_CASE("Josephson potential sums the retained modes") {
  const JunctionParams p = device();
  const ModeSet modes = retained_modes(p);
  CHECK(josephson_potential(p, modes, 0.0) == doctest::Approx(-p.delta0 * modes.tau.size()));
  // Single perfectly transmitting mode at phi = pi.
  ModeSet one;
  one.tau = {1.0};
  one.dtau_dL = {0.0};
  CHECK(std::abs(josephson_potential(p, one, kPi)) < 1e-12 * p.delta0);
  ModeSet half;
  half.tau = {0.5};
  half.dtau_dL = {0.0};
  CHECK(-josephson_potential(p, half, kPi) == doctest::Approx(p.delta0 / std::sqrt(2.0)));
  double prev = josephson_potential(p, modes, 0.0);
  for (double phi = 0.1; phi <= kPi; phi += 0.1) {
    const double v = josephson_potential(p, modes, phi);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("Taylor coefficients of the potential reproduce EJ and eta") {
  for (double mu_ev : {0.0, 0.05, 0.15}) {
    const JunctionParams p = device(mu_ev);
    const ModeSet modes = retained_modes(p);
    const CircuitParams c = circuit_params(p, modes);
    // Least-squares fit of H(phi) - H(0) in even powers on small phases.
    const int m = 16;
    Eigen::MatrixXd a(m, 4);
    Eigen::VectorXd y(m);
    const double h0 = josephson_potential(p, modes, 0.0);
    for (int i = 0; i < m; ++i) {
      const double phi = 0.02 + 0.01 * i;
      for (int k = 0; k < 4; ++k) a(i, k) = std::pow(phi, 2 * k + 2);
      y(i) = josephson_potential(p, modes, phi) - h0;
    }
    const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(y);
    CHECK(2.0 * coef(0) == doctest::Approx(c.ej_tilde).epsilon(1e-4));
    CHECK(-coef(1) == doctest::Approx(c.eta).epsilon(1e-4));
  }
}

TEST_CASE("circuit parameters of a single open channel") {
  JunctionParams p = device();
  ModeSet one;
  one.tau = {1.0};
  one.dtau_dL = {0.0};
  const CircuitParams c = circuit_params(p, one);
  CHECK(c.ej_tilde == doctest::Approx(p.delta0 / 4.0));
  CHECK(c.eta == doctest::Approx(p.delta0 / 384.0));
  CHECK(c.omega_r == doctest::Approx(std::sqrt(2.0 * p.charging_energy * p.delta0)));
  CHECK(c.eta_tilde == doctest::Approx(p.charging_energy / 48.0));
  CHECK(c.omega_r * c.omega_r == doctest::Approx(8.0 * p.charging_energy * c.ej_tilde).epsilon(1e-14));

  ModeSet two = one;
  two.tau = {0.3, 0.2};
  ModeSet doubled = one;
  doubled.tau = {0.6, 0.4};
  CHECK(circuit_params(p, doubled).ej_tilde == doctest::Approx(2.0 * circuit_params(p, two).ej_tilde));

  ModeSet none;
  none.tau = {0.0, 0.0};
  try {
    circuit_params(p, none);
    FAIL("expected a degenerate-junction error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::degenerate_junction);
  }
}

TEST_CASE("device-scale circuit is far above the membrane frequency") {
  JunctionParams p = device(0.1);
  const CircuitParams c = circuit_params(p);
  CHECK(std::isfinite(c.omega_r));
  CHECK(c.omega_r > 1e3 * 1e6);
  MESSAGE("omega_r = " << c.omega_r << " rad/s with " << c.mode_count << " modes");
}

TEST_CASE("mode-sum truncation is converged to the tail tolerance") {
  JunctionParams p = device(0.08);
  JunctionParams tight = p;
  tight.tail_tolerance = 1e-15;
  const ModeSet a = retained_modes(p), b = retained_modes(tight);
  CHECK(b.tau.size() >= a.tau.size());
  const CircuitParams ca = circuit_params(p, a), cb = circuit_params(tight, b);
  CHECK(std::abs(ca.ej_tilde - cb.ej_tilde) / cb.ej_tilde < p.tail_tolerance);
  CHECK(std::abs(ca.eta - cb.eta) / cb.eta < p.tail_tolerance);
  const MembraneParams mem = MembraneParams::from_mass(1e6, default_effective_mass(p.length, p.width));
  const double ga = coupling_g2(p, mem), gb = coupling_g2(tight, mem);
  CHECK(std::abs(ga - gb) / std::abs(gb) < 1e-9);
}

TEST_CASE("coupling G2 sign and zero-point scaling") {
  JunctionParams p = device();
  p.mu = 0.0;
  const MembraneParams zero = MembraneParams::from_zzpf(1e6, 0.0);
  CHECK(coupling_g2(p, zero) == 0.0);
  const MembraneParams mem = MembraneParams::from_mass(1e6, default_effective_mass(p.length, p.width));
  CHECK(mem.zzpf == doctest::Approx(std::sqrt(kHbar / (2.0 * mem.mass * 1e6))));
  CHECK(coupling_g2(p, mem) < 0.0);
  const MembraneParams twice = MembraneParams::from_zzpf(1e6, 2.0 * mem.zzpf);
  CHECK(coupling_g2(p, twice) == doctest::Approx(4.0 * coupling_g2(p, mem)));
}

TEST_CASE("bent length against a direct arc-length quadrature") {
  const double L0 = 35e-9;
  CHECK(bent_length(0.0, L0) == doctest::Approx(L0).epsilon(1e-15));
  for (double zr : {0.05, 0.3, 0.9}) {
    const double z = zr * L0;
    // Arc length of z sin(pi x / L0) on [0, L0] by composite Simpson.
    const int n = 4000;
    const double a = z * kPi / L0;
    auto f = [&](double u) { return std::sqrt(1.0 + a * a * std::cos(u) * std::cos(u)); };
    double s = f(0.0) + f(kPi);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(kPi * i / n);
    const double arc = L0 / kPi * s * (kPi / n) / 3.0;
    CHECK(bent_length(z, L0) == doctest::Approx(arc).epsilon(1e-10));
  }
  const double z = 1e-3 * L0;
  CHECK(bent_length(z, L0) == doctest::Approx(L0 * (1.0 + kPi * kPi * z * z / (4.0 * L0 * L0))).epsilon(1e-6));
  const double h = 1e-3 * L0;
  const double d2 = (bent_length(h, L0) - 2.0 * bent_length(0.0, L0) + bent_length(-h, L0)) / (h * h);
  CHECK(d2 == doctest::Approx(kPi * kPi / (2.0 * L0)).epsilon(1e-4));
  CHECK_THROWS_AS(bent_length(L0, L0), Error);
}

TEST_CASE("elliptic integral special values") {
  CHECK(elliptic_e(0.0) == doctest::Approx(kPi / 2.0));
  CHECK(elliptic_e(1.0) == doctest::Approx(1.0));
  CHECK(elliptic_e(-1.0) == doctest::Approx(1.9100988945138562).epsilon(1e-12));
}

TEST_CASE("parameter validation names the field") {
  JunctionParams p = device();
  p.width = -1.0;
  try {
    p.validate();
    FAIL("expected a validation error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::numerical_domain);
    CHECK(std::string(e.what()).find("'W'") != std::string::npos);
  }
  CHECK_THROWS_AS(transmission(device(), -1), Error);
}
