#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "gjj/dynamics.hpp"
#include "gjj/error.hpp"

namespace gjj::dynamics {

Liouvillian::Liouvillian(const Operator& h, const std::vector<LindbladTerm>& terms)
    : dim_(h.dim()), dims_(h.factor_dims()), h_(h.mat()) {
  drift_ = cplx(0.0, -1.0) * h_;
  h_scale_ = h_.norm() / std::sqrt(static_cast<double>(dim_));
  for (const LindbladTerm& t : terms) {
    if (t.rate < 0.0) throw Error(ErrorKind::invalid_rate, "negative Lindblad rate");
    if (t.rate == 0.0) continue;
    rate_scale_ = std::max(rate_scale_, t.rate);
    if (t.basis) {
      if (t.basis->vectors.rows() != dim_) throw Error(ErrorKind::shape, "eigenbasis term dimension mismatch");
      Group* g = nullptr;
      for (Group& existing : groups_)
        if (existing.basis == t.basis) g = &existing;
      if (!g) {
        groups_.push_back(Group{t.basis, {}, {}, {}});
        g = &groups_.back();
      }
      g->from.push_back(t.from);
      g->to.push_back(t.to);
      g->rate.push_back(t.rate);
      continue;
    }
    if (t.jump.dim() != dim_) throw Error(ErrorKind::shape, "jump operator dimension mismatch");
    const Matrix l = std::sqrt(t.rate) * t.jump.mat();
    drift_ -= 0.5 * l.adjoint() * l;
    jumps_.push_back(l);
  }
  for (const Group& g : groups_) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(dim_);
    for (std::size_t i = 0; i < g.rate.size(); ++i) out(g.from[i]) += g.rate[i];
    const Matrix& v = g.basis->vectors;
    drift_ -= 0.5 * v * out.cast<cplx>().asDiagonal() * v.adjoint();
  }
}

Matrix Liouvillian::apply(const Matrix& rho) const {
  Matrix out = drift_ * rho + rho * drift_.adjoint();
  for (const Matrix& l : jumps_) out += l * rho * l.adjoint();
  for (const Group& g : groups_) {
    const Matrix& v = g.basis->vectors;
    const Matrix rt = v.adjoint() * rho * v;
    Eigen::VectorXcd gain = Eigen::VectorXcd::Zero(dim_);
    for (std::size_t i = 0; i < g.rate.size(); ++i) gain(g.to[i]) += g.rate[i] * rt(g.from[i], g.from[i]);
    out += v * gain.asDiagonal() * v.adjoint();
  }
  return out;
}

Matrix Liouvillian::apply_adjoint(const Matrix& x) const {
  Matrix out = drift_.adjoint() * x + x * drift_;
  for (const Matrix& l : jumps_) out += l.adjoint() * x * l;
  for (const Group& g : groups_) {
    const Matrix& v = g.basis->vectors;
    const Matrix xt = v.adjoint() * x * v;
    Eigen::VectorXcd gain = Eigen::VectorXcd::Zero(dim_);
    for (std::size_t i = 0; i < g.rate.size(); ++i) gain(g.from[i]) += g.rate[i] * xt(g.to[i], g.to[i]);
    out += v * gain.asDiagonal() * v.adjoint();
  }
  return out;
}

Matrix Liouvillian::superoperator() const {
  const int n = dim_;
  Matrix s(n * n, n * n);
  Matrix e = Matrix::Zero(n, n);
  for (int c = 0; c < n; ++c) {
    for (int r = 0; r < n; ++r) {
      e(r, c) = 1.0;
      const Matrix col = apply(e);
      s.col(c * n + r) = Eigen::Map<const Eigen::VectorXcd>(col.data(), n * n);
      e(r, c) = 0.0;
    }
  }
  return s;
}

// ---------------------------------------------------------------- secular

std::unique_ptr<SecularGenerator> SecularGenerator::detect(const Operator& h,
                                                           const std::vector<LindbladTerm>& terms) {
  if (terms.empty()) return nullptr;
  const auto& basis = terms.front().basis;
  if (!basis) return nullptr;
  for (const LindbladTerm& t : terms)
    if (t.basis != basis) return nullptr;
  const int n = h.dim();
  if (basis->vectors.rows() != n) return nullptr;
  const Matrix ht = basis->vectors.adjoint() * h.mat() * basis->vectors;
  const Matrix off = ht - Matrix(basis->energies.cast<cplx>().asDiagonal());
  const double scale = std::max(1.0, basis->energies.cwiseAbs().maxCoeff());
  if (off.cwiseAbs().maxCoeff() > 1e-9 * scale) return nullptr;

  auto gen = std::unique_ptr<SecularGenerator>(new SecularGenerator());
  gen->basis_ = basis;
  gen->w_ = Eigen::MatrixXd::Zero(n, n);
  gen->outflow_ = Eigen::VectorXd::Zero(n);
  for (const LindbladTerm& t : terms) {
    if (t.rate < 0.0) throw Error(ErrorKind::invalid_rate, "negative Lindblad rate");
    gen->w_(t.to, t.from) += t.rate;
    gen->w_(t.from, t.from) -= t.rate;
    gen->outflow_(t.from) += t.rate;
  }
  return gen;
}

Eigen::VectorXd SecularGenerator::stationary_populations() const {
  const int n = static_cast<int>(w_.rows());
  // Replace one balance equation by the normalization, scaled like W so the
  // conditioning estimate is meaningful.
  const double scale = std::max(w_.cwiseAbs().maxCoeff(), 1e-300);
  Eigen::MatrixXd a = w_;
  a.row(n - 1).setConstant(scale);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n - 1) = scale;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible() || lu.rcond() < 1e-14) {
    throw Error(ErrorKind::degeneracy, "rate matrix has more than one stationary distribution");
  }
  Eigen::VectorXd p = lu.solve(rhs);
  for (int k = 0; k < n; ++k) p(k) = std::max(p(k), 0.0);
  return p / p.sum();
}

Matrix SecularGenerator::steady_state() const {
  const Eigen::VectorXd p = stationary_populations();
  const Matrix& v = basis_->vectors;
  Matrix rho = v * p.cast<cplx>().asDiagonal() * v.adjoint();
  return 0.5 * (rho + rho.adjoint());
}

std::vector<Matrix> SecularGenerator::propagate(const Matrix& rho0,
                                                const std::vector<double>& times) const {
  const int n = static_cast<int>(w_.rows());
  const Matrix& v = basis_->vectors;
  const Eigen::VectorXd& e = basis_->energies;
  const Matrix rt0 = v.adjoint() * rho0 * v;
  Eigen::VectorXd p = rt0.diagonal().real();

  std::vector<Matrix> out;
  out.reserve(times.size());
  Eigen::MatrixXd step;
  double step_dt = -1.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i > 0) {
      const double dt = times[i] - times[i - 1];
      // Uniform grids reuse the same propagator.
      if (std::abs(dt - step_dt) > 1e-10 * std::abs(dt)) {
        step = (w_ * dt).exp();
        step_dt = dt;
      }
      p = step * p;
    }
    const double t = times[i] - times[0];
    Matrix rt(n, n);
    for (int c = 0; c < n; ++c) {
      for (int r = 0; r < n; ++r) {
        if (r == c) {
          rt(r, c) = p(r);
        } else {
          const cplx rate(-0.5 * (outflow_(r) + outflow_(c)), -(e(r) - e(c)));
          rt(r, c) = rt0(r, c) * std::exp(rate * t);
        }
      }
    }
    Matrix rho = v * rt * v.adjoint();
    out.push_back(0.5 * (rho + rho.adjoint()));
  }
  return out;
}

}  // namespace gjj::dynamics
