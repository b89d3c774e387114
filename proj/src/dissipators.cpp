#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "gjj/dynamics.hpp"
#include "gjj/error.hpp"

namespace gjj::dynamics {

namespace {

void require_rate(double v, const char* name) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw Error(ErrorKind::invalid_rate, std::string(name) + " must be a finite non-negative rate");
  }
}

void push(std::vector<LindbladTerm>& out, const Operator& jump, double rate) {
  if (rate > 0.0) out.push_back(LindbladTerm{jump, rate, nullptr, -1, -1});
}

}  // namespace

std::vector<LindbladTerm> local_dissipators(double kappa, double gamma, double nbar_b,
                                            const std::vector<int>& dims) {
  require_rate(kappa, "kappa");
  require_rate(gamma, "gamma");
  require_rate(nbar_b, "nbar_b");
  std::vector<LindbladTerm> out;
  if (dims.size() == 1) {
    if (kappa > 0.0) throw Error(ErrorKind::shape, "circuit decay requested on a single-mode space");
    const Operator b = fock::ladder(dims[0]);
    push(out, b, gamma * (nbar_b + 1.0));
    push(out, b.adjoint(), gamma * nbar_b);
    return out;
  }
  if (dims.size() != 2) throw Error(ErrorKind::shape, "local dissipators expect {Na, Nb} or {Nb}");
  const Operator a = fock::embed(fock::ladder(dims[0]), 0, dims);
  const Operator b = fock::embed(fock::ladder(dims[1]), 1, dims);
  push(out, a, kappa);
  push(out, b, gamma * (nbar_b + 1.0));
  push(out, b.adjoint(), gamma * nbar_b);
  return out;
}

std::vector<LindbladTerm> squeezed_frame_dissipators(double gamma, double r, double Delta,
                                                     double temperature, int dim) {
  require_rate(gamma, "gamma");
  if (!(Delta > 0.0)) throw Error(ErrorKind::supercritical, "squeezed-frame dissipators need a real gap");
  if (temperature < 0.0) throw Error(ErrorKind::invalid_rate, "temperature must be non-negative");
  const double big_gamma = gamma * std::cosh(r) * std::cosh(r);
  const double nbar = fock::bose_occupation(Delta, temperature);
  const Operator b = fock::ladder(dim);
  std::vector<LindbladTerm> out;
  push(out, b, big_gamma * (nbar + 1.0));
  push(out, b.adjoint(), big_gamma * nbar);
  return out;
}

std::vector<LindbladTerm> eigenbasis_dissipators(const Operator& h, const Operator& b, double gamma,
                                                 double temperature, double gap_tol) {
  require_rate(gamma, "gamma");
  if (temperature < 0.0) throw Error(ErrorKind::invalid_rate, "temperature must be non-negative");
  if (h.dim() != b.dim()) throw Error(ErrorKind::shape, "Hamiltonian and jump operator dimensions differ");
  if (!h.is_hermitian(1e-10)) throw Error(ErrorKind::numerical_domain, "eigenbasis dissipators need a Hermitian H");

  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h.mat() + h.mat().adjoint()));
  auto basis = std::make_shared<EigenBasis>();
  basis->energies = es.eigenvalues();
  basis->vectors = es.eigenvectors();
  const int n = h.dim();

  const double width = std::max(basis->energies(n - 1) - basis->energies(0), 1e-300);
  for (int k = 0; k + 1 < n; ++k) {
    if (basis->energies(k + 1) - basis->energies(k) < gap_tol * width) {
      throw DegenerateSpectrumError("degenerate levels " + std::to_string(k) + " and " +
                                        std::to_string(k + 1) + " in eigenbasis dissipator",
                                    k, k + 1);
    }
  }

  const Matrix bm = basis->vectors.adjoint() * b.mat() * basis->vectors;
  const double floor = 1e-14 * gamma;
  std::vector<LindbladTerm> out;
  for (int k = 1; k < n; ++k) {
    for (int j = 0; j < k; ++j) {
      const double g = gamma * std::norm(bm(j, k));
      const double nbar = fock::bose_occupation(basis->energies(k) - basis->energies(j), temperature);
      const double down = g * (nbar + 1.0);
      const double up = g * nbar;
      if (down >= floor && down > 0.0) out.push_back(LindbladTerm{Operator(), down, basis, k, j});
      if (up >= floor && up > 0.0) out.push_back(LindbladTerm{Operator(), up, basis, j, k});
    }
  }
  return out;
}

Operator jump_operator(const LindbladTerm& term) {
  if (!term.basis) return term.jump;
  const Matrix& v = term.basis->vectors;
  return Operator(v.col(term.to) * v.col(term.from).adjoint());
}

}  // namespace gjj::dynamics
