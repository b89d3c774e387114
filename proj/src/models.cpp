#include "gjj/models.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/tools/toms748_solve.hpp>
#include <Eigen/Eigenvalues>

#include "gjj/error.hpp"

namespace gjj::models {

namespace {

using fock::Matrix;
using fock::cplx;

void fill_frame(EffectiveParams& e) {
  e.Lambda_c = critical_coupling(e.omega);
  e.omega_b = e.omega + 2.0 * e.Lambda;
  if (e.Lambda > e.Lambda_c) {
    e.supercritical = false;
    e.Delta = std::sqrt(e.omega * e.omega + 4.0 * e.omega * e.Lambda);
    e.r = squeeze_parameter(e.omega, e.Lambda);
    e.kerr = 6.0 * e.xi * std::exp(4.0 * e.r);
  } else {
    e.supercritical = true;
    e.Delta = 0.0;
    e.r = 0.0;
    e.kerr = 0.0;
  }
}

struct TwoMode {
  Matrix a, ad, na, xb, nb, id;
};

TwoMode two_mode(int na, int nb) {
  const std::vector<int> dims{na, nb};
  TwoMode t;
  t.a = fock::embed(fock::ladder(na), 0, dims).mat();
  t.ad = t.a.adjoint();
  t.na = t.ad * t.a;
  t.xb = fock::embed(fock::quadrature(nb), 1, dims).mat();
  t.nb = fock::embed(fock::number(nb), 1, dims).mat();
  t.id = Matrix::Identity(na * nb, na * nb);
  return t;
}

Matrix hermitize(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

}  // namespace

DriveParams DriveParams::from_drive_frequency(double amplitude, double omega_d,
                                              const junction::CircuitParams& circuit) {
  DriveParams d;
  d.amplitude = amplitude;
  d.omega_d = omega_d;
  d.detuning = circuit.omega_r - omega_d - 6.0 * circuit.eta_tilde;
  return d;
}

double critical_coupling(double omega) { return -omega / 4.0; }

double effective_gap(double omega, double Lambda) {
  if (!(Lambda > critical_coupling(omega))) {
    throw Error(ErrorKind::supercritical, "coupling at or beyond the critical point; gap is imaginary");
  }
  return std::sqrt(omega * omega + 4.0 * omega * Lambda);
}

double squeeze_parameter(double omega, double Lambda) {
  if (!(Lambda > critical_coupling(omega))) {
    throw Error(ErrorKind::supercritical, "no real squeezing parameter beyond the critical point");
  }
  // tanh(2r) = -2L/(w+2L)  <=>  e^{4r} = w/(w+4L)
  return 0.25 * std::log(omega / (omega + 4.0 * Lambda));
}

EffectiveParams effective_params(double omega, double g2, const junction::CircuitParams& circuit,
                                 const DriveParams& drive) {
  const double delta = drive.detuning;
  if (delta == 0.0) throw Error(ErrorKind::numerical_domain, "detuning delta = 0: displacement A/delta undefined");
  EffectiveParams e;
  e.omega = omega;
  e.g2 = g2;
  e.eta_tilde = circuit.eta_tilde;
  e.delta = delta;
  e.alpha = drive.amplitude / delta;
  e.omega_a = delta - 24.0 * e.alpha * e.alpha * circuit.eta_tilde;
  e.Lambda = g2 * (1.0 + 2.0 * e.alpha);
  e.lambda_sw = 2.0 * e.alpha * g2;
  if (e.omega_a == 0.0) throw Error(ErrorKind::numerical_domain, "effective circuit frequency vanishes");
  e.xi = 4.0 * e.alpha * e.alpha * g2 * g2 / e.omega_a;
  fill_frame(e);
  return e;
}

EffectiveParams effective_params_direct(double omega, double Lambda, double xi) {
  EffectiveParams e;
  e.omega = omega;
  e.Lambda = Lambda;
  e.xi = xi;
  fill_frame(e);
  return e;
}

double resonance_detuning(double omega, double g2, double eta_tilde, double amplitude) {
  auto mismatch = [&](double delta) {
    const double alpha = amplitude / delta;
    const double omega_a = delta - 24.0 * alpha * alpha * eta_tilde;
    const double omega_b = omega + 2.0 * g2 * (1.0 + 2.0 * alpha);
    return omega_a - 2.0 * omega_b;
  };
  // Walk outward from 2 omega in both directions; the first sign change found
  // brackets the root nearest the guess.
  const double guess = 2.0 * omega;
  const double f0 = mismatch(guess);
  if (f0 == 0.0) return guess;
  double lo = 0.0, hi = 0.0, flo = 0.0, fhi = 0.0;
  bool found = false;
  double below = guess, above = guess, fb = f0, fa = f0;
  for (int i = 0; i < 400 && !found; ++i) {
    const double next_above = above * 1.02;
    const double fna = mismatch(next_above);
    if (fna * fa <= 0.0) {
      lo = above, flo = fa, hi = next_above, fhi = fna;
      found = true;
      break;
    }
    above = next_above, fa = fna;
    const double next_below = below / 1.02;
    const double fnb = mismatch(next_below);
    if (fnb * fb <= 0.0) {
      lo = next_below, flo = fnb, hi = below, fhi = fb;
      found = true;
      break;
    }
    below = next_below, fb = fnb;
  }
  if (!found) throw Error(ErrorKind::convergence, "no detuning satisfies omega_a = 2 omega_b");
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  boost::uintmax_t iters = 200;
  auto tol = [omega](double a, double b) { return std::abs(a - b) < 1e-15 * omega; };
  const auto root = boost::math::tools::toms748_solve(mismatch, lo, hi, flo, fhi, tol, iters);
  return 0.5 * (root.first + root.second);
}

Operator build_h_hybrid(int na, int nb, const junction::CircuitParams& circuit, double omega,
                        double g2) {
  const TwoMode t = two_mode(na, nb);
  const Matrix xa = t.a + t.ad;
  const Matrix xa2 = xa * xa;
  const Matrix h = circuit.omega_r * t.na - circuit.eta_tilde * xa2 * xa2 + omega * t.nb +
                   g2 * xa2 * t.xb * t.xb;
  return Operator(hermitize(h), {na, nb});
}

Operator build_h_driven(int na, int nb, const EffectiveParams& eff) {
  const TwoMode t = two_mode(na, nb);
  const Matrix xb2 = t.xb * t.xb;
  const Matrix h = eff.omega_a * t.na - 6.0 * eff.eta_tilde * t.na * t.na + eff.omega * t.nb +
                   eff.Lambda * xb2 + 2.0 * eff.g2 * t.na * xb2 -
                   2.0 * eff.alpha * eff.g2 * (t.a + t.ad) * xb2;
  return Operator(hermitize(h), {na, nb});
}

Operator build_h_rotating(int na, int nb, const EffectiveParams& eff, double amplitude) {
  const TwoMode t = two_mode(na, nb);
  const Matrix xb2 = t.xb * t.xb;
  const Matrix h = eff.delta * t.na - 6.0 * eff.eta_tilde * t.na * t.na + eff.omega * t.nb +
                   2.0 * eff.g2 * t.na * xb2 + eff.g2 * xb2 + amplitude * (t.a + t.ad);
  return Operator(hermitize(h), {na, nb});
}

Operator build_h_eff(int dim, double omega, double Lambda, double xi) {
  if (dim < 4) throw Error(ErrorKind::invalid_dimension, "effective Hamiltonian needs at least 4 levels");
  const Matrix x = fock::quadrature(dim).mat();
  const Matrix x2 = x * x;
  const Matrix h = omega * fock::number(dim).mat() + Lambda * x2 - xi * x2 * x2;
  return Operator(hermitize(h));
}

Operator build_h_squeezed(int dim, const EffectiveParams& eff) {
  if (eff.supercritical) throw Error(ErrorKind::supercritical, "squeezed-frame Hamiltonian needs Lambda > Lambda_c");
  const Matrix x = fock::quadrature(dim).mat();
  const Matrix x2 = x * x;
  const Matrix h = eff.Delta * fock::number(dim).mat() - eff.xi * std::exp(4.0 * eff.r) * x2 * x2;
  return Operator(hermitize(h));
}

Operator build_h_kerr(int dim, const EffectiveParams& eff) {
  if (eff.supercritical) throw Error(ErrorKind::supercritical, "Kerr Hamiltonian needs Lambda > Lambda_c");
  if (dim < 2) throw Error(ErrorKind::invalid_dimension, "truncation dimension must be >= 2");
  Matrix h = Matrix::Zero(dim, dim);
  for (int n = 0; n < dim; ++n) h(n, n) = eff.Delta * n - eff.kerr * n * (n - 1.0);
  return Operator(std::move(h));
}

double cat_time(const EffectiveParams& eff, int m) {
  if (!(eff.kerr > 0.0)) throw Error(ErrorKind::numerical_domain, "cat time needs a positive Kerr strength");
  if (m < 1) throw Error(ErrorKind::numerical_domain, "cat component count must be positive");
  return std::numbers::pi / eff.kerr / m;
}

double sw_residual(int na, int nb, const EffectiveParams& eff) {
  if (!(eff.omega_a / eff.omega > 10.0)) {
    throw Error(ErrorKind::numerical_domain, "Schrieffer-Wolff residual requires omega_a / omega > 10");
  }
  const TwoMode t = two_mode(na, nb);
  const Matrix xb2 = t.xb * t.xb;
  const Matrix h = build_h_driven(na, nb, eff).mat();
  const double lambda = eff.lambda_sw;
  // S = lambda (a^dag - a) X^2 / omega_a is anti-Hermitian; e^{S} = exp(-i (iS)).
  const Matrix s = (lambda / eff.omega_a) * (t.ad - t.a) * xb2;
  const Matrix us = fock::expm_hermitian(cplx(0.0, 1.0) * s);
  const Matrix transformed = us.adjoint() * h * us;

  // Circuit-ground block: rows/cols with circuit index 0 are the first nb entries.
  const Matrix block = transformed.topLeftCorner(nb, nb);
  const Matrix xb = fock::quadrature(nb).mat();
  const Matrix x2 = xb * xb;
  const Matrix target = eff.omega * fock::number(nb).mat() + eff.Lambda * x2 - eff.xi * x2 * x2;
  const Matrix diff = hermitize(block - target);
  Eigen::SelfAdjointEigenSolver<Matrix> es(diff, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff() / eff.omega;
}

}  // namespace gjj::models
