#include "gjj/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "gjj/error.hpp"

namespace gjj::fock {

namespace {

int product(const std::vector<int>& dims) {
  return std::accumulate(dims.begin(), dims.end(), 1, std::multiplies<int>());
}

void check_dim(int dim) {
  if (dim < 2) throw Error(ErrorKind::invalid_dimension, "truncation dimension must be >= 2");
  if (dim > kMaxDenseDim) {
    throw Error(ErrorKind::invalid_dimension,
                "dimension " + std::to_string(dim) + " exceeds the dense storage limit");
  }
}

std::vector<int> resolve_dims(const std::vector<int>& dims, int total) {
  if (dims.empty()) return {total};
  if (product(dims) != total) {
    throw Error(ErrorKind::shape, "factor dimensions do not multiply to the matrix size");
  }
  return dims;
}

// Population of each level of factor `index` from the diagonal of rho.
Eigen::VectorXd level_populations(const Matrix& rho, const std::vector<int>& dims, int index) {
  int inner = 1;
  for (std::size_t i = index + 1; i < dims.size(); ++i) inner *= dims[i];
  const int d = dims[index];
  Eigen::VectorXd pops = Eigen::VectorXd::Zero(d);
  for (int k = 0; k < rho.rows(); ++k) pops((k / inner) % d) += rho(k, k).real();
  return pops;
}

double padded_crop_norm(const Vector& v, int dim) { return v.head(dim).norm(); }

}  // namespace

// ---------------------------------------------------------------- Operator

Operator::Operator(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw Error(ErrorKind::shape, "operator must be square");
  dims_ = {static_cast<int>(m_.rows())};
}

Operator::Operator(Matrix m, std::vector<int> factor_dims) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw Error(ErrorKind::shape, "operator must be square");
  dims_ = resolve_dims(factor_dims, static_cast<int>(m_.rows()));
}

Operator Operator::adjoint() const { return Operator(m_.adjoint(), dims_); }

double Operator::hermiticity_defect() const {
  if (m_.size() == 0) return 0.0;
  return (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
}

Operator& Operator::operator+=(const Operator& o) {
  if (o.dims_ != dims_) throw Error(ErrorKind::shape, "operator dimensions differ");
  m_ += o.m_;
  return *this;
}

Operator& Operator::operator-=(const Operator& o) {
  if (o.dims_ != dims_) throw Error(ErrorKind::shape, "operator dimensions differ");
  m_ -= o.m_;
  return *this;
}

Operator& Operator::operator*=(cplx s) {
  m_ *= s;
  return *this;
}

Operator operator*(const Operator& a, const Operator& b) {
  if (a.dims_ != b.dims_) throw Error(ErrorKind::shape, "operator dimensions differ");
  return Operator(a.m_ * b.m_, a.dims_);
}

// ----------------------------------------------------------- DensityMatrix

DensityMatrix::DensityMatrix(Matrix m, std::vector<int> factor_dims, bool validate_now)
    : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw Error(ErrorKind::shape, "density matrix must be square");
  dims_ = resolve_dims(factor_dims, static_cast<int>(m_.rows()));
  if (validate_now) validate();
}

DensityMatrix::DensityMatrix(Matrix m, bool validate_now)
    : DensityMatrix(std::move(m), std::vector<int>{}, validate_now) {}

DensityMatrix DensityMatrix::pure(const Vector& psi, std::vector<int> factor_dims) {
  const double n = psi.norm();
  if (!(n > 0.0)) throw Error(ErrorKind::numerical_domain, "state vector has zero norm");
  Vector v = psi / n;
  return DensityMatrix(v * v.adjoint(), std::move(factor_dims));
}

double DensityMatrix::trace_deviation() const { return std::abs(m_.trace() - cplx(1.0, 0.0)); }

double DensityMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

void DensityMatrix::validate(double trace_tol, double herm_tol, double eig_floor) const {
  if (trace_deviation() > trace_tol) {
    throw Error(ErrorKind::numerical_domain,
                "density matrix trace deviates from 1 by " + std::to_string(trace_deviation()));
  }
  const double herm = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
  if (herm > herm_tol) throw Error(ErrorKind::numerical_domain, "density matrix is not Hermitian");
  const double lmin = min_eigenvalue();
  if (lmin < eig_floor) {
    throw Error(ErrorKind::numerical_domain,
                "density matrix has negative eigenvalue " + std::to_string(lmin));
  }
}

// --------------------------------------------------------------- builders

Operator identity(int dim) {
  if (dim < 1) throw Error(ErrorKind::invalid_dimension, "dimension must be positive");
  return Operator(Matrix::Identity(dim, dim));
}

Operator ladder(int dim) {
  check_dim(dim);
  Matrix a = Matrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return Operator(std::move(a));
}

Operator number(int dim) {
  check_dim(dim);
  Matrix n = Matrix::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) n(k, k) = static_cast<double>(k);
  return Operator(std::move(n));
}

Operator quadrature(int dim) {
  const Operator a = ladder(dim);
  return Operator(a.mat() + a.mat().adjoint());
}

Operator tensor(const std::vector<Operator>& ops) {
  if (ops.empty()) throw Error(ErrorKind::shape, "tensor of an empty operator list");
  Matrix acc = ops.front().mat();
  std::vector<int> dims = ops.front().factor_dims();
  for (std::size_t i = 1; i < ops.size(); ++i) {
    const Matrix& b = ops[i].mat();
    Matrix next(acc.rows() * b.rows(), acc.cols() * b.cols());
    for (Eigen::Index r = 0; r < acc.rows(); ++r)
      for (Eigen::Index c = 0; c < acc.cols(); ++c)
        next.block(r * b.rows(), c * b.cols(), b.rows(), b.cols()) = acc(r, c) * b;
    acc = std::move(next);
    dims.insert(dims.end(), ops[i].factor_dims().begin(), ops[i].factor_dims().end());
  }
  if (acc.rows() > kMaxDenseDim) throw Error(ErrorKind::invalid_dimension, "tensor space exceeds dense limit");
  return Operator(std::move(acc), std::move(dims));
}

Operator embed(const Operator& op, int index, const std::vector<int>& factor_dims) {
  if (index < 0 || index >= static_cast<int>(factor_dims.size())) {
    throw Error(ErrorKind::shape, "factor index out of range");
  }
  if (op.dim() != factor_dims[index]) throw Error(ErrorKind::shape, "operator does not match factor dimension");
  std::vector<Operator> parts;
  for (int i = 0; i < static_cast<int>(factor_dims.size()); ++i) {
    parts.push_back(i == index ? op : identity(factor_dims[i]));
  }
  return tensor(parts);
}

Matrix ptrace(const Matrix& rho, const std::vector<int>& dims, int keep) {
  if (keep < 0 || keep >= static_cast<int>(dims.size())) throw Error(ErrorKind::shape, "kept factor out of range");
  if (product(dims) != rho.rows()) throw Error(ErrorKind::shape, "factor dimensions do not match state");
  int inner = 1;
  for (std::size_t i = keep + 1; i < dims.size(); ++i) inner *= dims[i];
  const int d = dims[keep];
  const int outer = static_cast<int>(rho.rows()) / (d * inner);
  Matrix out = Matrix::Zero(d, d);
  for (int o = 0; o < outer; ++o)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        for (int in = 0; in < inner; ++in)
          out(i, j) += rho((o * d + i) * inner + in, (o * d + j) * inner + in);
  return out;
}

DensityMatrix ptrace(const DensityMatrix& rho, int keep) {
  return DensityMatrix(ptrace(rho.mat(), rho.factor_dims(), keep),
                       std::vector<int>{rho.factor_dims()[keep]}, false);
}

Matrix expm_hermitian(const Matrix& h, double t) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  Vector phases(h.rows());
  for (Eigen::Index k = 0; k < h.rows(); ++k) phases(k) = std::exp(cplx(0.0, -t * es.eigenvalues()(k)));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

Operator displacement(cplx alpha, int dim) {
  const Matrix a = ladder(dim).mat();
  // D = exp(-i G) with Hermitian G = i(alpha a^dag - alpha* a).
  const Matrix g = cplx(0.0, 1.0) * (alpha * a.adjoint() - std::conj(alpha) * a);
  return Operator(expm_hermitian(g));
}

Operator squeeze(double r, int dim) {
  const Matrix a = ladder(dim).mat();
  const Matrix k = (r / 2.0) * (a * a - a.adjoint() * a.adjoint());
  return Operator(expm_hermitian(cplx(0.0, 1.0) * k));
}

Vector coherent(cplx beta, int dim, double tol) {
  check_dim(dim);
  Vector v(dim);
  // Recursion on the amplitudes avoids computing beta^n and n! separately.
  v(0) = std::exp(-0.5 * std::norm(beta));
  for (int n = 1; n < dim; ++n) v(n) = v(n - 1) * beta / std::sqrt(static_cast<double>(n));
  const double leak = top_leakage(v);
  if (leak > tol) {
    throw TruncationError("coherent state |beta|=" + std::to_string(std::abs(beta)) +
                              " does not fit in " + std::to_string(dim) + " levels",
                          leak);
  }
  return v;
}

Vector fock_state(int n, int dim) {
  check_dim(dim);
  if (n < 0 || n >= dim) throw Error(ErrorKind::invalid_dimension, "Fock index outside truncation");
  Vector v = Vector::Zero(dim);
  v(n) = 1.0;
  return v;
}

DensityMatrix thermal(double nbar, int dim, double tol) {
  check_dim(dim);
  if (nbar < 0.0) throw Error(ErrorKind::numerical_domain, "thermal occupation must be non-negative");
  Matrix rho = Matrix::Zero(dim, dim);
  const double q = nbar / (1.0 + nbar);
  double w = 1.0 / (1.0 + nbar);
  double sum = 0.0;
  for (int n = 0; n < dim; ++n) {
    rho(n, n) = w;
    sum += w;
    w *= q;
  }
  const double leak = (rho(dim - 1, dim - 1).real() + rho(dim - 2, dim - 2).real()) / sum;
  if (leak > tol) {
    throw TruncationError("thermal state n=" + std::to_string(nbar) + " does not fit in " +
                              std::to_string(dim) + " levels",
                          leak);
  }
  rho /= sum;
  return DensityMatrix(std::move(rho), false);
}

DensityMatrix squeezed_thermal(double nbar, double r, int dim, double tol) {
  check_dim(dim);
  // Build on a padded space so the squeeze unitary is exact on the kept block.
  const int big = std::min(kMaxDenseDim, 2 * dim + 20);
  const DensityMatrix th = thermal(nbar, big, tol);
  const Matrix s = squeeze(r, big).mat();
  const Matrix full = s.adjoint() * th.mat() * s;
  Matrix rho = full.topLeftCorner(dim, dim);
  const double kept = rho.trace().real();
  const double leak = 1.0 - kept + top_leakage(rho, {dim}, 0);
  if (leak > tol) {
    throw TruncationError("squeezed thermal state does not fit in " + std::to_string(dim) + " levels",
                          leak);
  }
  rho /= kept;
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return DensityMatrix(std::move(rho), false);
}

Vector squeezed_vacuum(double r, int dim) {
  check_dim(dim);
  const int big = std::min(kMaxDenseDim, 2 * dim + 20);
  const Matrix s = squeeze(r, big).mat();
  const Vector full = s.adjoint().col(0);
  Vector v = full.head(dim);
  const double kept = padded_crop_norm(full, dim);
  return v / kept;
}

double bose_occupation(double energy, double temperature) {
  if (temperature <= 0.0) return 0.0;
  const double x = energy / temperature;
  if (x > 700.0) return 0.0;
  return 1.0 / std::expm1(x);
}

double top_leakage(const Matrix& rho, const std::vector<int>& dims, int index, int levels) {
  const Eigen::VectorXd pops = level_populations(rho, dims, index);
  const int d = static_cast<int>(pops.size());
  double leak = 0.0;
  for (int k = std::max(0, d - levels); k < d; ++k) leak += pops(k);
  return leak;
}

double top_leakage(const DensityMatrix& rho, int index, int levels) {
  const auto& dims = rho.factor_dims();
  if (index >= 0) return top_leakage(rho.mat(), dims, index, levels);
  double worst = 0.0;
  for (int i = 0; i < static_cast<int>(dims.size()); ++i)
    worst = std::max(worst, top_leakage(rho.mat(), dims, i, levels));
  return worst;
}

double top_leakage(const Vector& psi, int levels) {
  const double total = psi.squaredNorm();
  double leak = 0.0;
  for (Eigen::Index k = std::max<Eigen::Index>(0, psi.size() - levels); k < psi.size(); ++k)
    leak += std::norm(psi(k));
  return total > 0.0 ? leak / total : 0.0;
}

void check_truncation(const DensityMatrix& rho, double tol, const char* what) {
  const double leak = top_leakage(rho);
  if (leak > tol) {
    throw TruncationError(std::string(what) + ": top-level population " + std::to_string(leak) +
                              " exceeds tolerance",
                          leak);
  }
}

double fidelity(const DensityMatrix& rho, const Vector& psi) {
  if (psi.size() != rho.dim()) throw Error(ErrorKind::shape, "state dimension mismatch");
  const Vector v = psi / psi.norm();
  return std::max(0.0, (v.adjoint() * rho.mat() * v)(0, 0).real());
}

double trace_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error(ErrorKind::shape, "trace distance of mismatched matrices");
  Matrix d = a - b;
  d = 0.5 * (d + d.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(d, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace gjj::fock
