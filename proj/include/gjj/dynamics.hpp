#pragma once

// Lindblad dynamics: dissipator construction (local, squeezed-frame and
// eigenbasis), time evolution and steady states.
//
// Eigenbasis jumps |j><k| are tagged with the basis they were built in. When
// every term shares one basis that also diagonalizes H, populations and
// coherences decouple exactly; evolve() and steady_state() then use that
// structure instead of the generic vectorized solvers.

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gjj/fock.hpp"

namespace gjj::dynamics {

using fock::DensityMatrix;
using fock::Matrix;
using fock::Operator;
using fock::cplx;

struct EigenBasis {
  Eigen::VectorXd energies;  ///< ascending
  Matrix vectors;            ///< columns are eigenvectors
};

struct LindbladTerm {
  Operator jump;
  double rate = 0.0;
  /// Set for eigenbasis jumps |to><from| in `basis`. `jump` is left empty for
  /// these (a dense copy per level pair would not fit in memory); use
  /// jump_operator() to materialize one.
  std::shared_ptr<const EigenBasis> basis;
  int from = -1;  ///< level the jump takes population out of
  int to = -1;    ///< level it puts population into
};

Operator jump_operator(const LindbladTerm& term);

/// kappa D_a, gamma(n+1) D_b, gamma n D_{b^dag}. `dims` is {Na, Nb} or {Nb}
/// (single mechanical mode; kappa must then be zero). Zero-rate terms are omitted.
std::vector<LindbladTerm> local_dissipators(double kappa, double gamma, double nbar_b,
                                            const std::vector<int>& dims);

/// Gamma(n+1) D_b + Gamma n D_{b^dag} with Gamma = gamma cosh^2 r and n the Bose
/// occupation at the gap Delta.
std::vector<LindbladTerm> squeezed_frame_dissipators(double gamma, double r, double Delta,
                                                     double temperature, int dim);

/// Secular dissipators between the eigenstates of H with rates
/// gamma |<j|b|k>|^2 (n_kj + 1) downward and gamma |<j|b|k>|^2 n_kj upward.
std::vector<LindbladTerm> eigenbasis_dissipators(const Operator& h, const Operator& b, double gamma,
                                                 double temperature, double gap_tol = 1e-10);

/// Liouvillian L(rho) = -i[H, rho] + sum rate D_jump[rho].
class Liouvillian {
 public:
  Liouvillian(const Operator& h, const std::vector<LindbladTerm>& terms);

  int dim() const { return dim_; }
  const std::vector<int>& factor_dims() const { return dims_; }
  Matrix apply(const Matrix& rho) const;
  Matrix apply_adjoint(const Matrix& x) const;
  /// A = -iH - (1/2) sum rate L^dag L, so that L(rho) = A rho + rho A^dag + jumps.
  const Matrix& drift() const { return drift_; }
  /// Column-major vectorized superoperator (dim^2 x dim^2).
  Matrix superoperator() const;
  double rate_scale() const { return rate_scale_; }
  double hamiltonian_scale() const { return h_scale_; }

 private:
  struct Group {
    std::shared_ptr<const EigenBasis> basis;
    std::vector<int> from, to;
    std::vector<double> rate;
  };

  int dim_ = 0;
  std::vector<int> dims_;
  Matrix h_;
  Matrix drift_;
  std::vector<Matrix> jumps_;     // dense jumps already scaled by sqrt(rate)
  std::vector<Group> groups_;     // eigenbasis jumps
  double rate_scale_ = 0.0;
  double h_scale_ = 0.0;
};

/// Populations/coherences of the eigenbasis generator. Available when all
/// terms carry the same basis and that basis diagonalizes H.
class SecularGenerator {
 public:
  static std::unique_ptr<SecularGenerator> detect(const Operator& h,
                                                  const std::vector<LindbladTerm>& terms);

  const EigenBasis& basis() const { return *basis_; }
  /// Pauli rate matrix: dp/dt = W p.
  const Eigen::MatrixXd& rate_matrix() const { return w_; }
  Eigen::VectorXd stationary_populations() const;
  Matrix steady_state() const;
  std::vector<Matrix> propagate(const Matrix& rho0, const std::vector<double>& times) const;

 private:
  std::shared_ptr<const EigenBasis> basis_;
  Eigen::MatrixXd w_;
  Eigen::VectorXd outflow_;
};

struct StepDiagnostics {
  double trace_deviation = 0.0;
  double min_eigenvalue = 0.0;
  double leakage = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
  std::vector<StepDiagnostics> diagnostics;
  std::string method;
  long accepted_steps = 0;
  long rejected_steps = 0;
};

struct EvolveOptions {
  double tol = 1e-9;
  double trace_tol = 1e-8;
  double positivity_floor = -1e-7;
  double leakage_tol = 1e-4;
  bool force_adaptive = false;     ///< skip the exact unitary / secular paths
  bool check_positivity = true;
  long max_steps = 20000000;
};

/// Solves drho/dt = L(rho) and stores rho at each t in `times` (ascending,
/// times[0] is the time of rho0).
Trajectory evolve(const DensityMatrix& rho0, const Operator& h, const std::vector<LindbladTerm>& terms,
                  const std::vector<double>& times, const EvolveOptions& opts = {});

struct SteadyOptions {
  int dense_limit = 32;            ///< largest dim solved with a dense LU
  double residual_tol = 1e-10;     ///< on ||L(rho)|| relative to the generator scale
  double leakage_tol = 1e-4;
  double uniqueness_ratio = 1e3;
  double gmres_tol = 1e-13;
  int gmres_restart = 80;
  int gmres_max_iter = 4000;
  bool integration_fallback = false;  ///< long-time integration instead of GMRES
  double integration_step = 0.0;      ///< 0: 1/min(nonzero rate)
  double integration_tol = 1e-10;
  bool allow_secular = true;
};

struct SteadyReport {
  DensityMatrix rho;
  std::string method;
  double residual = 0.0;
  int iterations = 0;
  double leakage = 0.0;
  bool unstable = false;  ///< population piles up at the truncation edge
};

SteadyReport steady_state_report(const Operator& h, const std::vector<LindbladTerm>& terms,
                                 const SteadyOptions& opts = {});
DensityMatrix steady_state(const Operator& h, const std::vector<LindbladTerm>& terms,
                           const SteadyOptions& opts = {});

struct GmresResult {
  Matrix x;
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Right-preconditioned restarted GMRES on matrices with the Frobenius inner
/// product; throws ErrorKind::convergence when max_iter is exhausted.
using MatrixMap = std::function<Matrix(const Matrix&)>;
GmresResult gmres(const MatrixMap& apply, const MatrixMap& precondition, const Matrix& rhs,
                  double tol, int restart, int max_iter);

/// Solves R Y + Y R^dag = C for upper-triangular R (complex Schur form).
Matrix solve_triangular_lyapunov(const Matrix& r, const Matrix& c);

struct BinaryTrajectoryHeader {
  std::uint64_t dim;
  std::uint64_t count;
};

/// 16-byte header (dim, count as little-endian u64) followed by each snapshot
/// as row-major interleaved (re, im) little-endian doubles.
void write_binary_snapshots(const std::string& path, const std::vector<Matrix>& states);
std::vector<Matrix> read_binary_snapshots(const std::string& path);

}  // namespace gjj::dynamics
