#pragma once

// Hamiltonians of the driven circuit-membrane system and the map from
// physical/drive parameters to the displaced-frame effective parameters.
//
// Two-mode operators live on the space (circuit a) x (membrane b), with the
// circuit as the first tensor factor. All frequencies are in units of the
// caller's choice; the dynamics layer uses omega = 1.

#include "gjj/fock.hpp"
#include "gjj/junction.hpp"

namespace gjj::models {

using fock::Operator;

struct DriveParams {
  double amplitude = 0.0;  ///< A
  double omega_d = 0.0;    ///< drive frequency (informational when detuning is given)
  double detuning = 0.0;   ///< delta = omega_r - omega_d - 6 eta_tilde

  static DriveParams from_drive_frequency(double amplitude, double omega_d,
                                          const junction::CircuitParams& circuit);
};

struct EffectiveParams {
  double omega = 0.0;
  double g2 = 0.0;
  double eta_tilde = 0.0;
  double delta = 0.0;
  double alpha = 0.0;      ///< A / delta
  double omega_a = 0.0;    ///< delta - 24 alpha^2 eta_tilde
  double Lambda = 0.0;     ///< G2 (1 + 2 alpha)
  double omega_b = 0.0;    ///< omega + 2 Lambda
  double xi = 0.0;         ///< 4 alpha^2 G2^2 / omega_a
  double lambda_sw = 0.0;  ///< 2 alpha G2
  double r = 0.0;          ///< squeezing parameter
  double Delta = 0.0;      ///< sqrt(omega^2 + 4 omega Lambda); 0 when supercritical
  double Lambda_c = 0.0;   ///< -omega / 4
  double kerr = 0.0;       ///< 6 xi e^{4r}
  bool supercritical = false;
};

double critical_coupling(double omega);
/// Throws ErrorKind::supercritical when Lambda <= Lambda_c.
double effective_gap(double omega, double Lambda);
/// r with tanh(2r) = -2 Lambda / (omega + 2 Lambda).
double squeeze_parameter(double omega, double Lambda);

EffectiveParams effective_params(double omega, double g2, const junction::CircuitParams& circuit,
                                 const DriveParams& drive);
/// Shortcut that sets Lambda and xi directly (no circuit or drive).
EffectiveParams effective_params_direct(double omega, double Lambda, double xi);

/// Detuning delta solving omega_a = 2 omega_b for drive amplitude A, taking
/// the root closest to 2 omega.
double resonance_detuning(double omega, double g2, double eta_tilde, double amplitude);

Operator build_h_hybrid(int na, int nb, const junction::CircuitParams& circuit, double omega,
                        double g2);
/// Displaced-frame Hamiltonian with the parametric drive term.
Operator build_h_driven(int na, int nb, const EffectiveParams& eff);
/// Rotating-frame Hamiltonian before the displacement, with the explicit
/// linear drive A (a + a^dagger).
Operator build_h_rotating(int na, int nb, const EffectiveParams& eff, double amplitude);
Operator build_h_eff(int dim, double omega, double Lambda, double xi);
Operator build_h_squeezed(int dim, const EffectiveParams& eff);
Operator build_h_kerr(int dim, const EffectiveParams& eff);

/// Kerr cat times: tau0 = pi / kerr, so that tau0 / m leaves an m-component
/// cat (the Kerr phase kerr n(n-1) t reaches pi n(n-1)/m).
double cat_time(const EffectiveParams& eff, int m = 1);

/// Norm (scaled by omega) of the mismatch between the Schrieffer-Wolff
/// transformed driven Hamiltonian and H0 - xi X^4 on the circuit-ground block.
double sw_residual(int na, int nb, const EffectiveParams& eff);

}  // namespace gjj::models
