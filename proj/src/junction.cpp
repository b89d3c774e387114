#include "gjj/junction.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "gjj/error.hpp"

namespace gjj::junction {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

// sin(z)/z, with the series near the origin so k = 0 needs no special case.
cplx sinc(cplx z) {
  if (std::abs(z) < 1e-4) {
    const cplx z2 = z * z;
    return 1.0 - z2 / 6.0 + z2 * z2 / 120.0;
  }
  return std::sin(z) / z;
}

void require_positive(double v, const char* field) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorKind::numerical_domain,
                std::string("junction parameter '") + field + "' must be positive and finite");
  }
}

double fermi_wavenumber(const JunctionParams& p) { return p.mu / p.fermi_velocity; }

// Above this kappa*L the cosh/sinh terms overflow; the leading exponential
// is used instead.
constexpr double kLargeDecay = 300.0;

struct ModeEval {
  double tau;
  double dtau;
};

ModeEval evaluate(const JunctionParams& p, int n, double L) {
  if (n < 0) throw Error(ErrorKind::numerical_domain, "mode index must be non-negative");
  const double kf = fermi_wavenumber(p);
  const double q = transverse_wavenumber(p, n);
  const cplx k = std::sqrt(cplx(kf * kf - q * q, 0.0));

  if (k.imag() * L > kLargeDecay) {
    const double kappa = k.imag();
    const double tau = 4.0 * kappa * kappa * std::exp(-2.0 * kappa * L) / (q * q);
    return {tau, -2.0 * kappa * tau};
  }

  const cplx c = std::cos(k * L);
  const cplx s = sinc(k * L);
  const cplx denom = c * c + kf * kf * L * L * s * s;
  const cplx tau = 1.0 / denom;
  const cplx dtau = -2.0 * L * q * q * sinc(2.0 * k * L) * tau * tau;

  if (!std::isfinite(tau.real()) || !std::isfinite(dtau.real())) {
    throw Error(ErrorKind::numerical_domain,
                "non-finite transmission for mode " + std::to_string(n));
  }
  if (std::abs(tau.imag()) > 1e-12 * std::max(1.0, std::abs(tau.real()))) {
    throw Error(ErrorKind::numerical_domain,
                "transmission acquired an imaginary part for mode " + std::to_string(n));
  }
  return {std::min(1.0, tau.real()), dtau.real()};
}

}  // namespace

void JunctionParams::validate() const {
  require_positive(delta0, "delta0");
  require_positive(length, "L0");
  require_positive(width, "W");
  require_positive(fermi_velocity, "vF");
  require_positive(charging_energy, "Ec");
  if (!std::isfinite(mu)) throw Error(ErrorKind::numerical_domain, "junction parameter 'mu' must be finite");
  if (!(tail_tolerance > 0.0)) throw Error(ErrorKind::numerical_domain, "tail tolerance must be positive");
  if (max_modes < 1) throw Error(ErrorKind::numerical_domain, "max_modes must be at least 1");
}

MembraneParams MembraneParams::from_mass(double omega, double mass, double quality,
                                         double nbar_bath) {
  require_positive(omega, "omega");
  require_positive(mass, "mass");
  MembraneParams m;
  m.omega = omega;
  m.mass = mass;
  m.zzpf = std::sqrt(kHbar / (2.0 * mass * omega));
  m.quality = quality;
  m.nbar_bath = nbar_bath;
  return m;
}

MembraneParams MembraneParams::from_zzpf(double omega, double zzpf, double quality,
                                         double nbar_bath) {
  require_positive(omega, "omega");
  if (zzpf < 0.0) throw Error(ErrorKind::numerical_domain, "zzpf must be non-negative");
  MembraneParams m;
  m.omega = omega;
  m.zzpf = zzpf;
  m.quality = quality;
  m.nbar_bath = nbar_bath;
  return m;
}

double default_effective_mass(double length, double width) {
  return kGrapheneArealDensity * length * width / 4.0;
}

double transverse_wavenumber(const JunctionParams& p, int n) {
  return (n + 0.5) * kPi / p.width;
}

double transmission(const JunctionParams& p, int n) { return evaluate(p, n, p.length).tau; }

double transmission_at_length(const JunctionParams& p, int n, double length) {
  return evaluate(p, n, length).tau;
}

double transmission_dL(const JunctionParams& p, int n) { return evaluate(p, n, p.length).dtau; }

double transmission_dL_at_length(const JunctionParams& p, int n, double length) {
  return evaluate(p, n, length).dtau;
}

double andreev_energy(const JunctionParams& p, int n, double phi) {
  const double s = std::sin(phi / 2.0);
  return p.delta0 * std::sqrt(1.0 - transmission(p, n) * s * s);
}

ModeSet retained_modes(const JunctionParams& p) {
  p.validate();
  const double kf = std::abs(fermi_wavenumber(p));
  ModeSet modes;
  int small_run = 0;
  for (int n = 0; n < p.max_modes; ++n) {
    const ModeEval e = evaluate(p, n, p.length);
    modes.tau.push_back(e.tau);
    modes.dtau_dL.push_back(e.dtau);
    const bool evanescent = transverse_wavenumber(p, n) > kf;
    if (evanescent && e.tau < p.tail_tolerance) {
      if (++small_run == 3) break;
    } else {
      small_run = 0;
    }
  }
  return modes;
}

double josephson_potential(const JunctionParams& p, double phi) {
  return josephson_potential(p, retained_modes(p), phi);
}

double josephson_potential(const JunctionParams& p, const ModeSet& modes, double phi) {
  const double s = std::sin(phi / 2.0);
  double sum = 0.0;
  for (double tau : modes.tau) sum += std::sqrt(1.0 - tau * s * s);
  return -p.delta0 * sum;
}

CircuitParams circuit_params(const JunctionParams& p) {
  return circuit_params(p, retained_modes(p));
}

CircuitParams circuit_params(const JunctionParams& p, const ModeSet& modes) {
  double s1 = 0.0;
  double s2 = 0.0;
  for (double tau : modes.tau) {
    s1 += tau;
    s2 += 4.0 * tau - 3.0 * tau * tau;
  }
  if (!(s1 > 0.0)) {
    throw Error(ErrorKind::degenerate_junction, "no conducting Andreev mode (all transmissions vanish)");
  }
  CircuitParams c;
  c.ej_tilde = p.delta0 * s1 / 4.0;
  c.eta = p.delta0 * s2 / 384.0;
  c.omega_r = std::sqrt(8.0 * p.charging_energy * c.ej_tilde);
  c.eta_tilde = 2.0 * p.charging_energy * c.eta / c.ej_tilde;
  c.mode_count = static_cast<int>(modes.tau.size());
  return c;
}

double coupling_g2(const JunctionParams& p, const MembraneParams& mem) {
  const ModeSet modes = retained_modes(p);
  const CircuitParams c = circuit_params(p, modes);
  double dsum = 0.0;
  for (double d : modes.dtau_dL) dsum += d;
  return kPi * kPi * p.delta0 / (32.0 * p.length) *
         std::sqrt(2.0 * p.charging_energy / c.ej_tilde) * dsum * mem.zzpf * mem.zzpf;
}

double elliptic_e(double m) {
  if (!(m <= 1.0)) throw Error(ErrorKind::numerical_domain, "elliptic parameter must be <= 1");
  if (m >= 0.0) return std::comp_ellint_2(std::sqrt(m));
  // Imaginary-modulus transformation: E(m) = sqrt(1-m) E(m/(m-1)).
  return std::sqrt(1.0 - m) * std::comp_ellint_2(std::sqrt(m / (m - 1.0)));
}

double bent_length(double z, double length) {
  if (!(length > 0.0)) throw Error(ErrorKind::numerical_domain, "L0 must be positive");
  if (!(std::abs(z) < length)) throw Error(ErrorKind::numerical_domain, "|z| must be below L0");
  const double m = -z * z * kPi * kPi / (length * length);
  return 2.0 * length / kPi * elliptic_e(m);
}

}  // namespace gjj::junction
