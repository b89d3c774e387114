#pragma once

// Graphene Josephson junction layer: Andreev-mode transmission, the effective
// transmon parameters of the junction and the quadratic circuit-membrane
// coupling G2.
//
// Units: energies are carried as angular frequencies (rad/s, hbar = 1),
// lengths in metres, velocities in m/s.

#include <vector>

namespace gjj::junction {

/// Physical inputs of a ballistic short graphene junction.
struct JunctionParams {
  double delta0 = 0.0;          ///< superconducting gap, rad/s
  double length = 0.0;          ///< equilibrium junction length L0, m
  double width = 0.0;           ///< junction width W, m
  double mu = 0.0;              ///< chemical potential, rad/s
  double fermi_velocity = 0.0;  ///< v_F, m/s
  double charging_energy = 0.0; ///< E_c, rad/s
  double tail_tolerance = 1e-12;
  int max_modes = 200000;

  /// Throws ErrorKind::numerical_domain with a field-level message.
  void validate() const;
};

struct CircuitParams {
  double ej_tilde = 0.0;    ///< effective Josephson energy
  double eta = 0.0;         ///< quartic coefficient of the phase expansion
  double omega_r = 0.0;     ///< sqrt(8 Ec EJ)
  double eta_tilde = 0.0;   ///< anharmonicity 2 Ec eta / EJ
  int mode_count = 0;       ///< Andreev modes retained by the tail cut
};

/// Fundamental flexural mode of the suspended membrane.
struct MembraneParams {
  double omega = 0.0;      ///< rad/s
  double mass = 0.0;       ///< effective mass, kg (0 when zzpf was the input)
  double zzpf = 0.0;       ///< zero-point amplitude, m
  double quality = 1e6;
  double nbar_bath = 0.0;

  static MembraneParams from_mass(double omega, double mass, double quality = 1e6,
                                  double nbar_bath = 0.0);
  static MembraneParams from_zzpf(double omega, double zzpf, double quality = 1e6,
                                  double nbar_bath = 0.0);
};

inline constexpr double kHbar = 1.054571817e-34;        // J s
inline constexpr double kElementaryCharge = 1.602176634e-19;
inline constexpr double kGrapheneArealDensity = 7.6e-7;  // kg/m^2

/// Energy in electron-volts to angular frequency (rad/s).
constexpr double ev_to_angular(double ev) { return ev * kElementaryCharge / kHbar; }
constexpr double angular_to_ev(double w) { return w * kHbar / kElementaryCharge; }

/// Effective mass of the fundamental cosine mode of a W x L0 graphene sheet.
double default_effective_mass(double length, double width);

/// Transverse wave number q_n = (n + 1/2) pi / W.
double transverse_wavenumber(const JunctionParams& p, int n);

/// Transmission probability of Andreev mode n. Evanescent modes are handled
/// by the same complex-valued expression as propagating ones.
double transmission(const JunctionParams& p, int n);
double transmission_at_length(const JunctionParams& p, int n, double length);

/// Analytic derivative d tau_n / dL at L = p.length.
double transmission_dL(const JunctionParams& p, int n);
double transmission_dL_at_length(const JunctionParams& p, int n, double length);

double andreev_energy(const JunctionParams& p, int n, double phi);

/// Retained mode set: modes are kept until three consecutive evanescent modes
/// fall below the tail tolerance.
struct ModeSet {
  std::vector<double> tau;
  std::vector<double> dtau_dL;
};
ModeSet retained_modes(const JunctionParams& p);

/// -Delta0 * sum_n sqrt(1 - tau_n sin^2(phi/2)) over the retained modes.
double josephson_potential(const JunctionParams& p, double phi);
double josephson_potential(const JunctionParams& p, const ModeSet& modes, double phi);

/// Throws ErrorKind::degenerate_junction when no mode conducts.
CircuitParams circuit_params(const JunctionParams& p);
CircuitParams circuit_params(const JunctionParams& p, const ModeSet& modes);

/// Quadratic coupling rate G2 (rad/s).
double coupling_g2(const JunctionParams& p, const MembraneParams& mem);

/// Arc length of the bent membrane, L(z) = (2 L0 / pi) E(-z^2 pi^2 / L0^2).
double bent_length(double z, double length);

/// Complete elliptic integral of the second kind for parameter m <= 1.
double elliptic_e(double m);

}  // namespace gjj::junction
