#pragma once

// Truncated bosonic Hilbert spaces: ladder operators, tensor products,
// canonical states, displacement/squeezing unitaries and partial traces.
//
// Everything is dense. Operators carry their tensor-factor dimensions so that
// partial traces and per-mode truncation checks know the layout; the first
// factor is the most significant index (Kronecker order).

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace gjj::fock {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr int kMaxDenseDim = 4096;

class Operator {
 public:
  Operator() = default;
  explicit Operator(Matrix m);
  Operator(Matrix m, std::vector<int> factor_dims);

  const Matrix& mat() const { return m_; }
  Matrix& mat() { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }
  const std::vector<int>& factor_dims() const { return dims_; }

  Operator adjoint() const;
  double hermiticity_defect() const;
  bool is_hermitian(double tol = 1e-12) const { return hermiticity_defect() < tol; }

  Operator& operator+=(const Operator& o);
  Operator& operator-=(const Operator& o);
  Operator& operator*=(cplx s);

  friend Operator operator+(Operator a, const Operator& b) { return a += b; }
  friend Operator operator-(Operator a, const Operator& b) { return a -= b; }
  friend Operator operator*(const Operator& a, const Operator& b);
  friend Operator operator*(cplx s, Operator a) { return a *= s; }
  friend Operator operator*(double s, Operator a) { return a *= cplx(s, 0.0); }

 private:
  Matrix m_;
  std::vector<int> dims_;
};

/// Hermitian, unit-trace, PSD state on a truncated space.
class DensityMatrix {
 public:
  DensityMatrix() = default;
  /// Validates trace (1e-9), Hermiticity (1e-10) and min eigenvalue (-1e-9)
  /// unless `validate` is false.
  DensityMatrix(Matrix m, std::vector<int> factor_dims, bool validate = true);
  explicit DensityMatrix(Matrix m, bool validate = true);

  static DensityMatrix pure(const Vector& psi, std::vector<int> factor_dims = {});

  const Matrix& mat() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }
  const std::vector<int>& factor_dims() const { return dims_; }
  Operator as_operator() const { return Operator(m_, dims_); }

  double trace_deviation() const;
  double min_eigenvalue() const;
  void validate(double trace_tol = 1e-9, double herm_tol = 1e-10,
                double eig_floor = -1e-9) const;

 private:
  Matrix m_;
  std::vector<int> dims_;
};

Operator identity(int dim);
/// Annihilation operator with sqrt(n) on the superdiagonal.
Operator ladder(int dim);
Operator number(int dim);
/// (a + a^dagger) for a dim-level truncation.
Operator quadrature(int dim);

Operator tensor(const std::vector<Operator>& ops);
/// Places `op` at factor `index` of the space `factor_dims`.
Operator embed(const Operator& op, int index, const std::vector<int>& factor_dims);
DensityMatrix ptrace(const DensityMatrix& rho, int keep);
Matrix ptrace(const Matrix& rho, const std::vector<int>& factor_dims, int keep);

/// exp(-i t H) for Hermitian H via eigendecomposition.
Matrix expm_hermitian(const Matrix& h, double t = 1.0);

/// D(alpha) = exp(alpha a^dagger - alpha* a).
Operator displacement(cplx alpha, int dim);
/// S(r) = exp((r/2)(a^2 - a^dagger^2)), so that S^dagger b S = b cosh r - b^dagger sinh r.
Operator squeeze(double r, int dim);

/// Fock-amplitude coherent state; throws TruncationError when the two top
/// populations exceed `tol`.
Vector coherent(cplx beta, int dim, double tol = 1e-8);
Vector fock_state(int n, int dim);
DensityMatrix thermal(double nbar, int dim, double tol = 1e-8);
/// S^dagger(r) thermal(nbar) S(r): thermal populations over the states
/// S^dagger(r)|n>. Computed on a padded space and cropped.
DensityMatrix squeezed_thermal(double nbar, double r, int dim, double tol = 1e-8);
/// S^dagger(r)|0>, cropped from a padded space.
Vector squeezed_vacuum(double r, int dim);

double bose_occupation(double energy, double temperature);

/// Population of the two highest levels of factor `index`.
double top_leakage(const Matrix& rho, const std::vector<int>& factor_dims, int index,
                   int levels = 2);
double top_leakage(const DensityMatrix& rho, int index = -1, int levels = 2);
double top_leakage(const Vector& psi, int levels = 2);

/// Throws TruncationError when any factor's top-level population exceeds tol.
void check_truncation(const DensityMatrix& rho, double tol, const char* what);

double fidelity(const DensityMatrix& rho, const Vector& psi);
double trace_distance(const Matrix& a, const Matrix& b);

}  // namespace gjj::fock
