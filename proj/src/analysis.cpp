#include "gjj/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "gjj/error.hpp"

namespace gjj::analysis {

namespace {

Matrix single_mode(const DensityMatrix& rho) {
  const auto& dims = rho.factor_dims();
  if (dims.size() == 1) return rho.mat();
  return fock::ptrace(rho.mat(), dims, static_cast<int>(dims.size()) - 1);
}

// W at each entry of `alpha`, by the Laguerre-free recursion over the Fock
// matrix elements of the Wigner kernel.
Eigen::MatrixXd wigner_values(const Matrix& r, const Eigen::MatrixXcd& a) {
  const int n = static_cast<int>(r.rows());
  const Eigen::MatrixXcd two_a = 2.0 * a;
  const Eigen::MatrixXcd two_ac = two_a.conjugate();
  std::vector<Eigen::MatrixXcd> w(n, Eigen::MatrixXcd::Zero(a.rows(), a.cols()));
  w[0] = (-2.0 * a.cwiseAbs2()).array().exp().cast<cplx>() / std::numbers::pi;
  Eigen::MatrixXd total = r(0, 0).real() * w[0].real();
  for (int k = 1; k < n; ++k) {
    w[k] = two_a.cwiseProduct(w[k - 1]) / std::sqrt(static_cast<double>(k));
    total += 2.0 * (r(0, k) * w[k]).real();
  }
  for (int m = 1; m < n; ++m) {
    Eigen::MatrixXcd temp = w[m];
    w[m] = (two_ac.cwiseProduct(temp) - std::sqrt(static_cast<double>(m)) * w[m - 1]) /
           std::sqrt(static_cast<double>(m));
    total += (r(m, m) * w[m]).real();
    for (int k = m + 1; k < n; ++k) {
      Eigen::MatrixXcd next =
          (two_a.cwiseProduct(w[k - 1]) - std::sqrt(static_cast<double>(m)) * temp) /
          std::sqrt(static_cast<double>(k));
      temp = w[k];
      w[k] = std::move(next);
      total += 2.0 * (r(m, k) * w[k]).real();
    }
  }
  return total;
}

Matrix converged_single_mode(const DensityMatrix& rho, double truncation_tol) {
  Matrix r = single_mode(rho);
  const double leak = fock::top_leakage(r, {static_cast<int>(r.rows())}, 0);
  if (leak > truncation_tol) {
    throw TruncationError("state is not converged in its truncation for the Wigner function", leak);
  }
  return r;
}

}  // namespace

double occupation(const DensityMatrix& rho, int mode) {
  const auto& dims = rho.factor_dims();
  const int index = mode < 0 ? static_cast<int>(dims.size()) - 1 : mode;
  if (index >= static_cast<int>(dims.size())) throw Error(ErrorKind::shape, "mode index out of range");
  const Matrix reduced = dims.size() == 1 ? rho.mat() : fock::ptrace(rho.mat(), dims, index);
  double n = 0.0;
  for (Eigen::Index k = 0; k < reduced.rows(); ++k) n += k * reduced(k, k).real();
  return n;
}

cplx matrix_element(const DensityMatrix& rho, int i, int j) {
  if (i < 0 || j < 0 || i >= rho.dim() || j >= rho.dim()) throw Error(ErrorKind::shape, "matrix element out of range");
  return rho.mat()(i, j);
}

double WignerGrid::integral() const {
  if (x_axis.size() < 2 || p_axis.size() < 2) return 0.0;
  // Trapezoid rule on the (possibly non-uniform) grid.
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < x_axis.size(); ++i) {
    const double dx = x_axis[i + 1] - x_axis[i];
    for (std::size_t j = 0; j + 1 < p_axis.size(); ++j) {
      const double dp = p_axis[j + 1] - p_axis[j];
      total += 0.25 * dx * dp *
               (values(i, j) + values(i + 1, j) + values(i, j + 1) + values(i + 1, j + 1));
    }
  }
  return total;
}

WignerGrid wigner(const DensityMatrix& rho, const std::vector<double>& x_axis,
                  const std::vector<double>& p_axis, double truncation_tol) {
  const Matrix r = converged_single_mode(rho, truncation_tol);
  Eigen::MatrixXcd a(x_axis.size(), p_axis.size());
  for (std::size_t i = 0; i < x_axis.size(); ++i)
    for (std::size_t j = 0; j < p_axis.size(); ++j) a(i, j) = cplx(x_axis[i], p_axis[j]) / std::sqrt(2.0);
  WignerGrid g;
  g.x_axis = x_axis;
  g.p_axis = p_axis;
  g.values = wigner_values(r, a);
  return g;
}

int wigner_ring_lobes(const DensityMatrix& rho, double radius, int samples, double fraction) {
  if (samples < 8) throw Error(ErrorKind::numerical_domain, "ring needs at least 8 samples");
  const Matrix r = converged_single_mode(rho, 1e-6);
  Eigen::MatrixXcd a(samples, 1);
  for (int k = 0; k < samples; ++k)
    a(k, 0) = std::polar(radius, 2.0 * std::numbers::pi * k / samples) / std::sqrt(2.0);
  const Eigen::VectorXd v = wigner_values(r, a).col(0);
  const double top = v.maxCoeff();
  int lobes = 0;
  for (int k = 0; k < samples; ++k) {
    const double prev = v((k + samples - 1) % samples), next = v((k + 1) % samples);
    if (v(k) > prev && v(k) >= next && v(k) > fraction * top) ++lobes;
  }
  return lobes;
}

double wigner_parity(const DensityMatrix& rho, double x, double p) {
  const Matrix r = single_mode(rho);
  const int n = static_cast<int>(r.rows());
  const cplx alpha = cplx(x, p) / std::sqrt(2.0);
  const int big = std::min(fock::kMaxDenseDim, n + 40 + static_cast<int>(4.0 * std::norm(alpha)));
  Matrix padded = Matrix::Zero(big, big);
  padded.topLeftCorner(n, n) = r;
  const Matrix d = fock::displacement(alpha, big).mat();
  const Matrix shifted = d.adjoint() * padded * d;
  // Parity is only trusted on the block the padded displacement resolves.
  double parity = 0.0;
  for (int k = 0; k < big - 20; ++k) parity += (k % 2 == 0 ? 1.0 : -1.0) * shifted(k, k).real();
  return parity / std::numbers::pi;
}

double l1_coherence(const Matrix& rho) {
  double s = 0.0;
  for (Eigen::Index c = 0; c < rho.cols(); ++c)
    for (Eigen::Index r = 0; r < rho.rows(); ++r)
      if (r != c) s += std::abs(rho(r, c));
  return 0.5 * s;
}

double l1_coherence(const DensityMatrix& rho) { return l1_coherence(rho.mat()); }

double qfi_from_state(const Matrix& rho, const Matrix& drho, double cutoff) {
  if (rho.rows() != drho.rows() || rho.cols() != drho.cols()) throw Error(ErrorKind::shape, "rho and drho differ in shape");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()));
  const Matrix d = es.eigenvectors().adjoint() * (0.5 * (drho + drho.adjoint())) * es.eigenvectors();
  const Eigen::VectorXd& l = es.eigenvalues();
  double f = 0.0;
  for (Eigen::Index j = 0; j < l.size(); ++j)
    for (Eigen::Index k = 0; k < l.size(); ++k) {
      const double s = l(j) + l(k);
      if (s > cutoff) f += std::norm(d(j, k)) / s;
    }
  return std::max(0.0, 2.0 * f);
}

double qfi_steady_analytic(double omega, double Lambda, double temperature, double scaling) {
  if (!(Lambda > -omega / 4.0)) throw Error(ErrorKind::numerical_domain, "closed-form QFI is defined only below the critical coupling");
  if (temperature < 0.0) throw Error(ErrorKind::numerical_domain, "temperature must be non-negative");
  const double delta = std::sqrt(omega * omega + 4.0 * omega * Lambda);
  const double d_delta = (omega + 2.0 * (1.0 - scaling) * Lambda) / delta;
  const double d_r = (1.0 + scaling) * Lambda / (delta * delta);
  const double n = fock::bose_occupation(delta, temperature);
  // (d_Delta n)^2 / (n(n+1)) with d_Delta n = -n(n+1)/T, written without the
  // division that would be 0/0 at T -> 0.
  const double thermal = temperature > 0.0 ? d_delta * d_delta * n * (n + 1.0) / (temperature * temperature) : 0.0;
  const double squeeze = d_r * d_r * 2.0 * (2.0 * n + 1.0) * (2.0 * n + 1.0) / (2.0 * n * n + 2.0 * n + 1.0);
  return thermal + squeeze;
}

QfiFit fit_qfi(const std::vector<double>& times, const std::vector<double>& values, const QfiFitOptions& opts) {
  if (times.size() != values.size()) throw Error(ErrorKind::fit, "times and values differ in length");
  double fmax = 0.0;
  for (double v : values) fmax = std::max(fmax, v);
  std::vector<int> idx;
  for (std::size_t i = 0; i < times.size(); ++i)
    if (times[i] > 0.0 && values[i] > 0.0 && values[i] >= opts.window_ratio * fmax) idx.push_back(static_cast<int>(i));
  if (static_cast<int>(idx.size()) < opts.min_points) {
    throw Error(ErrorKind::fit, "fit window has " + std::to_string(idx.size()) + " points (need " +
                                    std::to_string(opts.min_points) + ")");
  }
  const int m = static_cast<int>(idx.size());
  Eigen::MatrixXd a(m, 3);
  Eigen::VectorXd y(m);
  for (int k = 0; k < m; ++k) {
    const double t = times[idx[k]];
    a(k, 0) = 1.0;
    a(k, 1) = std::log(t);
    a(k, 2) = -t;
    y(k) = std::log(values[idx[k]]);
  }
  // Column scaling keeps the -t column comparable to the others.
  Eigen::Vector3d scale;
  for (int c = 0; c < 3; ++c) scale(c) = std::max(a.col(c).cwiseAbs().maxCoeff(), 1e-300);
  const Eigen::MatrixXd as = a * scale.cwiseInverse().asDiagonal();
  const Eigen::Vector3d coef = as.colPivHouseholderQr().solve(y).cwiseQuotient(scale);

  QfiFit fit;
  fit.C = std::exp(coef(0));
  fit.zeta = coef(1);
  fit.beta_decay = coef(2);
  fit.window_points = m;
  fit.residual = std::sqrt((a * coef - y).squaredNorm() / m);
  fit.residual_ok = fit.residual < opts.residual_threshold;
  const double t_last = times[idx.back()];
  if (fit.beta_decay > 1e-12 / t_last) {
    fit.t_star = fit.zeta / fit.beta_decay;
    fit.t_star_infinite = false;
    fit.F_max = fit.C * std::pow(fit.t_star, fit.zeta) * std::exp(-fit.zeta);
  } else {
    fit.t_star = std::numeric_limits<double>::infinity();
    fit.t_star_infinite = true;
    double best = 0.0;
    for (int k : idx) {
      const double t = times[k];
      best = std::max(best, fit.C * std::pow(t, fit.zeta) * std::exp(-fit.beta_decay * t));
    }
    fit.F_max = best;
  }
  return fit;
}

fock::Vector kerr_cat_state(cplx beta, int m, int dim, double rotation) {
  if (m < 2) throw Error(ErrorKind::numerical_domain, "a cat needs at least two components");
  const cplx rotated = beta * std::exp(cplx(0.0, -rotation));
  fock::Vector v = fock::coherent(rotated, dim, 1.0);
  for (int n = 0; n < dim; ++n) {
    const double phase = std::numbers::pi * n * (n - 1.0) / m;
    v(n) *= std::exp(cplx(0.0, phase));
  }
  return v / v.norm();
}

double cat_fidelity(const DensityMatrix& rho, cplx beta, int m, double frame_r, double rotation) {
  Matrix r = single_mode(rho);
  const int dim = static_cast<int>(r.rows());
  const double b = std::abs(beta);
  if (b * b + 4.0 * b > 0.8 * dim) {
    throw TruncationError("truncation too small for a cat of amplitude " + std::to_string(b),
                          fock::top_leakage(r, {dim}, 0));
  }
  if (frame_r != 0.0) {
    const int big = std::min(fock::kMaxDenseDim, 2 * dim + 20);
    const Matrix s = fock::squeeze(frame_r, big).mat();
    Matrix padded = Matrix::Zero(big, big);
    padded.topLeftCorner(dim, dim) = r;
    r = (s * padded * s.adjoint()).topLeftCorner(dim, dim);
  }
  const fock::Vector target = kerr_cat_state(beta, m, dim, rotation);
  const double f = (target.adjoint() * r * target)(0, 0).real();
  return std::clamp(f, 0.0, 1.0);
}

}  // namespace gjj::analysis
