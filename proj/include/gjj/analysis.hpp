#pragma once

// Observables and metrology on mechanical states: occupations, Wigner
// functions, l1 coherence, Kerr-cat fidelity, quantum Fisher information
// (from a state, dynamical, steady, closed form) and power-law fits.

#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "gjj/dynamics.hpp"
#include "gjj/fock.hpp"

namespace gjj::analysis {

using fock::DensityMatrix;
using fock::Matrix;
using fock::Operator;
using fock::cplx;

/// <n> of factor `mode` (-1: last factor).
double occupation(const DensityMatrix& rho, int mode = -1);
cplx matrix_element(const DensityMatrix& rho, int i, int j);

struct WignerGrid {
  std::vector<double> x_axis;
  std::vector<double> p_axis;
  Eigen::MatrixXd values;  ///< values(ix, ip)

  double integral() const;
  double min() const { return values.minCoeff(); }
};

/// W(x, p) with alpha = (x + ip)/sqrt(2), normalized so that the integral over
/// dx dp is one (vacuum peak 1/pi). Multi-mode states are reduced to the last
/// factor first.
WignerGrid wigner(const DensityMatrix& rho, const std::vector<double>& x_axis,
                  const std::vector<double>& p_axis, double truncation_tol = 1e-6);
/// Number of separated maxima of W on the circle of the given radius in the
/// (x, p) plane, counting peaks above `fraction` of the ring maximum.
int wigner_ring_lobes(const DensityMatrix& rho, double radius, int samples = 720, double fraction = 0.5);
/// Same quantity from the displaced parity, (1/pi) <D(-a) rho D(a) P>; slow,
/// kept as an independent cross-check.
double wigner_parity(const DensityMatrix& rho, double x, double p);

double l1_coherence(const DensityMatrix& rho);
double l1_coherence(const Matrix& rho);

/// 2 sum |<j|drho|k>|^2 / (l_j + l_k) over pairs with l_j + l_k > cutoff.
double qfi_from_state(const Matrix& rho, const Matrix& drho, double cutoff = 1e-12);

/// Closed-form steady-state QFI of the squeezed thermal state, with the
/// couplings scaling as Lambda ~ omega^-p (p = `scaling`):
///   F = (d_w Delta)^2 n(n+1)/T^2 + (d_w r)^2 2(2n+1)^2/(2n^2+2n+1),
///   d_w Delta = (omega + 2(1-p) Lambda)/Delta,  d_w r = (1+p) Lambda/Delta^2.
double qfi_steady_analytic(double omega, double Lambda, double temperature, double scaling = 1.0);

struct QfiFitOptions {
  double window_ratio = 1e-3;        ///< drop points with F < ratio * max F
  double residual_threshold = 1.0;   ///< RMS of the log-domain residual
  int min_points = 8;
};

struct QfiFit {
  double C = 0.0;
  double zeta = 0.0;
  double beta_decay = 0.0;
  double t_star = 0.0;         ///< zeta / beta_decay; +inf when beta_decay <= 0
  bool t_star_infinite = false;
  double F_max = 0.0;          ///< C t*^zeta e^{-zeta}; model max on the window if t* is infinite
  double residual = 0.0;
  bool residual_ok = true;
  int window_points = 0;
};

/// Least squares of ln F = ln C + zeta ln t - beta t over the window.
QfiFit fit_qfi(const std::vector<double>& times, const std::vector<double>& values,
               const QfiFitOptions& opts = {});

/// Fock amplitudes of the coherent state |beta e^{-i rotation}> after Kerr
/// evolution for tau0/m: phases e^{i pi n(n-1)/m}. The m branches sit at
/// beta e^{-i rotation} e^{2 pi i k/m}, shifted by a further pi/m for even m.
fock::Vector kerr_cat_state(cplx beta, int m, int dim, double rotation = 0.0);
/// Fidelity of rho with the m-component Kerr cat. With frame_r != 0 the state
/// is first taken to the squeezed frame, S(r) rho S^dag(r).
double cat_fidelity(const DensityMatrix& rho, cplx beta, int m, double frame_r = 0.0,
                    double rotation = 0.0);

/// Which dissipator family the sensing model uses.
enum class Generator { eigenbasis, squeezed_frame, local };

/// The omega-dependent effective model used for frequency estimation:
/// H(w) = w b^dag b + Lambda(w) X^2 - xi(w) X^4 with Lambda(w) = Lambda (omega/w)^p,
/// xi(w) = xi (omega/w)^{2p}; gamma(w) = gamma w/omega when gamma_tracks_omega.
struct SensingModel {
  double omega = 1.0;
  double Lambda = 0.0;
  double xi = 0.0;
  double gamma = 1e-6;
  double temperature = 0.0;
  double scaling = 1.0;
  bool gamma_tracks_omega = true;
  int dim = 60;
  Generator generator = Generator::eigenbasis;
  /// Initial state for dynamics; empty means the bare vacuum |0>.
  Matrix initial;

  double Lambda_at(double w) const;
  double xi_at(double w) const;
  double gamma_at(double w) const;
  Operator hamiltonian(double w) const;
  std::vector<dynamics::LindbladTerm> dissipators(double w) const;
  DensityMatrix initial_state() const;
};

struct QfiCurve {
  std::vector<double> times;
  std::vector<double> values;
  double h = 0.0;
  double richardson_discrepancy = 0.0;  ///< relative change at the peak with h/2
  bool richardson_warning = false;
};

/// 0 selects h = min(1e-5 omega, 1e-3 / t_max).
double default_fd_step(const SensingModel& model, double t_max);

QfiCurve qfi_dynamic(const SensingModel& model, const std::vector<double>& times, double h = 0.0,
                     bool richardson = true, const dynamics::EvolveOptions& eo = {});

struct SteadyQfi {
  double value = 0.0;
  double h = 0.0;
  double richardson_discrepancy = 0.0;
  DensityMatrix rho;
};

SteadyQfi qfi_steady_numeric(const SensingModel& model, double h = 1e-5,
                             const dynamics::SteadyOptions& so = {});

struct ScanOptions {
  int time_points = 801;
  double t_max_factor = 8.0;   ///< t_max = factor / (gamma cosh^2 r)
  double t_max = 0.0;          ///< overrides the factor when > 0
  double fd_step = 0.0;
  int workers = 1;
  bool escalate_truncation = true;  ///< retry a leaking point once with dim doubled
  QfiFitOptions fit;
};

struct ScanRow {
  double Lambda_ratio = 0.0;   ///< Lambda / Lambda_c
  double Lambda = 0.0;
  double F_max = 0.0;          ///< largest sampled dynamical QFI
  double t_at_max = 0.0;
  double F_max_fit = 0.0;
  double t_star = 0.0;
  double zeta = 0.0;
  double beta_decay = 0.0;
  double fit_residual = 0.0;
  double F_ss = 0.0;
  double C_l1_ss = 0.0;
  int dim = 0;                 ///< mechanical truncation actually used
  std::string error;           ///< non-empty when the point failed
};

struct ScanResult {
  std::vector<ScanRow> rows;
  double exponent = std::numeric_limits<double>::quiet_NaN();  ///< slope of ln F_max vs ln(Lambda_c - Lambda)
  double exponent_intercept = std::numeric_limits<double>::quiet_NaN();
};

/// Power-law slope by least squares on (ln x, ln y).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y, double* intercept = nullptr);

ScanResult criticality_scan(const SensingModel& base, const std::vector<double>& Lambdas,
                            const ScanOptions& opts = {});

}  // namespace gjj::analysis
