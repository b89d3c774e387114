#include <cmath>
#include <complex>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "gjj/dynamics.hpp"
#include "gjj/error.hpp"

namespace gjj::dynamics {

namespace {

cplx inner(const Matrix& a, const Matrix& b) { return (a.conjugate().cwiseProduct(b)).sum(); }

// Apply a complex Givens rotation (c, s) to the pair (x, y).
void rotate(cplx& x, cplx& y, double c, cplx s) {
  const cplx t = c * x + s * y;
  y = -std::conj(s) * x + c * y;
  x = t;
}

void make_rotation(cplx a, cplx b, double& c, cplx& s) {
  const double na = std::abs(a);
  const double nb = std::abs(b);
  if (nb == 0.0) {
    c = 1.0;
    s = 0.0;
    return;
  }
  if (na == 0.0) {
    c = 0.0;
    s = std::conj(b) / nb;
    return;
  }
  const double norm = std::hypot(na, nb);
  c = na / norm;
  s = (a / na) * std::conj(b) / norm;
}

// Shift applied to the Lyapunov preconditioner when the drift has an
// (almost) purely imaginary eigenvalue, e.g. a dark state.
double lyapunov_shift(const Matrix& r, double scale) {
  double smallest = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < r.rows(); ++k) smallest = std::min(smallest, std::abs(r(k, k).real()));
  return smallest < 1e-8 * scale ? 0.1 * scale : 0.0;
}

SteadyReport finish(const Liouvillian& liou, Matrix rho, const std::string& method, int iterations,
                    const SteadyOptions& opts) {
  rho = 0.5 * (rho + rho.adjoint()).eval();
  const cplx tr = rho.trace();
  if (!(std::abs(tr) > 0.0)) throw Error(ErrorKind::convergence, "steady state has zero trace");
  rho /= tr.real();
  const double scale = std::max(liou.drift().norm() / std::sqrt(static_cast<double>(liou.dim())), 1e-300);
  const double residual = liou.apply(rho).norm() / scale;
  if (!(residual < opts.residual_tol)) {
    throw Error(ErrorKind::convergence, "steady-state residual " + std::to_string(residual) +
                                            " above tolerance (" + method + ")");
  }
  SteadyReport rep;
  rep.rho = DensityMatrix(std::move(rho), liou.factor_dims(), false);
  rep.rho.validate(1e-9, 1e-10, -1e-8);
  rep.method = method;
  rep.residual = residual;
  rep.iterations = iterations;
  rep.leakage = fock::top_leakage(rep.rho);
  rep.unstable = rep.leakage > opts.leakage_tol;
  return rep;
}

Matrix dense_solve(const Liouvillian& liou, const SteadyOptions& opts) {
  const int n = liou.dim();
  const Matrix s = liou.superoperator();
  if (n * n <= 400) {
    Eigen::JacobiSVD<Matrix> svd(s);
    const auto& sv = svd.singularValues();
    const double smallest = sv(sv.size() - 1);
    const double second = sv(sv.size() - 2);
    if (!(second > opts.uniqueness_ratio * smallest)) {
      throw Error(ErrorKind::degeneracy, "Liouvillian null space is not one-dimensional");
    }
  }
  const double c = std::max(s.cwiseAbs().maxCoeff(), 1e-300);
  Matrix b = s;
  // Trace constraint: L(rho) + c tr(rho) I/n = c I/n.
  Eigen::VectorXcd idvec = Eigen::VectorXcd::Zero(n * n);
  for (int k = 0; k < n; ++k) idvec(k * n + k) = 1.0;
  b += (c / n) * idvec * idvec.transpose();
  Eigen::PartialPivLU<Matrix> lu(b);
  if (n * n > 400 && lu.rcond() < 1e-13) {
    throw Error(ErrorKind::degeneracy, "augmented Liouvillian is numerically singular");
  }
  const Eigen::VectorXcd x = lu.solve((c / n) * idvec);
  return Eigen::Map<const Matrix>(x.data(), n, n);
}

Matrix krylov_solve(const Liouvillian& liou, const SteadyOptions& opts, int& iterations) {
  const int n = liou.dim();
  const double scale = std::max(liou.drift().norm() / std::sqrt(static_cast<double>(n)), 1e-300);
  const Matrix id = Matrix::Identity(n, n);

  Eigen::ComplexSchur<Matrix> schur(liou.drift());
  const Matrix u = schur.matrixU();
  Matrix r = schur.matrixT();
  const double shift = lyapunov_shift(r, scale);
  if (shift > 0.0) r.diagonal().array() -= shift / 2.0;

  auto apply = [&](const Matrix& x) -> Matrix {
    return liou.apply(x) + scale * x.trace() * id / static_cast<double>(n);
  };
  auto precondition = [&](const Matrix& y) -> Matrix {
    const Matrix c = u.adjoint() * y * u;
    return u * solve_triangular_lyapunov(r, c) * u.adjoint();
  };
  const Matrix rhs = scale * id / static_cast<double>(n);
  // A pure decay chain leaves I - P^-1 J nilpotent-like with depth ~ n, so a
  // restart shorter than the chain stalls; the basis is capped at 256 MiB.
  const long long vector_bytes = 16LL * n * n;
  const int memory_cap = static_cast<int>((1LL << 28) / vector_bytes);
  const int restart = std::max(opts.gmres_restart, std::min(n + 10, memory_cap));
  GmresResult res = gmres(apply, precondition, rhs, opts.gmres_tol, restart, opts.gmres_max_iter);
  iterations = res.iterations;
  return res.x;
}

Matrix integrate_to_steady(const Operator& h, const std::vector<LindbladTerm>& terms,
                           const Liouvillian& liou, const SteadyOptions& opts) {
  double min_rate = std::numeric_limits<double>::infinity();
  for (const LindbladTerm& t : terms)
    if (t.rate > 0.0) min_rate = std::min(min_rate, t.rate);
  if (!std::isfinite(min_rate)) throw Error(ErrorKind::degeneracy, "no dissipation: steady state is not unique");
  const double window = opts.integration_step > 0.0 ? opts.integration_step : 1.0 / min_rate;
  const int n = liou.dim();
  DensityMatrix rho(Matrix::Identity(n, n) / static_cast<double>(n), liou.factor_dims(), false);
  EvolveOptions eo;
  eo.force_adaptive = true;
  eo.check_positivity = false;
  // The maximally mixed start fills the top levels by construction; leakage
  // is judged on the converged state in finish().
  eo.leakage_tol = std::numeric_limits<double>::infinity();
  // Each window carries a fixed local-error floor of order tol, so the step
  // tolerance has to sit well below the settling threshold.
  eo.tol = std::min(eo.tol, 1e-3 * opts.integration_tol);
  for (int k = 0; k < 10000; ++k) {
    const Trajectory tr = evolve(rho, h, terms, {0.0, window}, eo);
    const Matrix next = tr.states.back().mat();
    const double change = (next - rho.mat()).norm();
    rho = tr.states.back();
    if (change < opts.integration_tol) return rho.mat();
  }
  throw Error(ErrorKind::convergence, "long-time integration did not settle");
}

}  // namespace

Matrix solve_triangular_lyapunov(const Matrix& r, const Matrix& c) {
  const int n = static_cast<int>(r.rows());
  Matrix y = Matrix::Zero(n, n);
  // Column j of R Y + Y R^dag involves columns k >= j of Y only.
  for (int j = n - 1; j >= 0; --j) {
    Eigen::VectorXcd rhs = c.col(j);
    for (int k = j + 1; k < n; ++k) rhs -= std::conj(r(j, k)) * y.col(k);
    Matrix m = r;
    m.diagonal().array() += std::conj(r(j, j));
    y.col(j) = m.triangularView<Eigen::Upper>().solve(rhs);
  }
  return y;
}

GmresResult gmres(const MatrixMap& apply, const MatrixMap& precondition, const Matrix& rhs,
                  double tol, int restart, int max_iter) {
  const double bnorm = rhs.norm();
  GmresResult out;
  out.x = Matrix::Zero(rhs.rows(), rhs.cols());
  if (bnorm == 0.0) return out;

  Matrix resid = rhs;
  double rnorm = bnorm;
  int total = 0;
  while (total < max_iter) {
    std::vector<Matrix> v;
    v.reserve(restart + 1);
    v.push_back(resid / rnorm);
    Eigen::MatrixXcd hmat = Eigen::MatrixXcd::Zero(restart + 1, restart);
    std::vector<double> cs(restart);
    std::vector<cplx> sn(restart);
    Eigen::VectorXcd g = Eigen::VectorXcd::Zero(restart + 1);
    g(0) = rnorm;
    int k = 0;
    for (; k < restart && total < max_iter; ++k, ++total) {
      Matrix w = apply(precondition(v[k]));
      for (int i = 0; i <= k; ++i) {
        hmat(i, k) = inner(v[i], w);
        w -= hmat(i, k) * v[i];
      }
      // One reorthogonalization pass keeps the basis clean at tight tolerances.
      for (int i = 0; i <= k; ++i) {
        const cplx corr = inner(v[i], w);
        hmat(i, k) += corr;
        w -= corr * v[i];
      }
      const double wn = w.norm();
      hmat(k + 1, k) = wn;
      for (int i = 0; i < k; ++i) rotate(hmat(i, k), hmat(i + 1, k), cs[i], sn[i]);
      make_rotation(hmat(k, k), hmat(k + 1, k), cs[k], sn[k]);
      rotate(hmat(k, k), hmat(k + 1, k), cs[k], sn[k]);
      rotate(g(k), g(k + 1), cs[k], sn[k]);
      if (wn > 0.0) v.push_back(w / wn);
      if (std::abs(g(k + 1)) < tol * bnorm || wn == 0.0) {
        ++k;
        ++total;
        break;
      }
    }
    // Solve the k x k triangular least-squares system and update x.
    const Eigen::VectorXcd y =
        hmat.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    Matrix update = Matrix::Zero(rhs.rows(), rhs.cols());
    for (int i = 0; i < k; ++i) update += y(i) * v[i];
    out.x += precondition(update);
    resid = rhs - apply(out.x);
    rnorm = resid.norm();
    out.iterations = total;
    out.relative_residual = rnorm / bnorm;
    if (out.relative_residual < tol) return out;
  }
  throw Error(ErrorKind::convergence, "GMRES did not converge (relative residual " +
                                          std::to_string(out.relative_residual) + ")");
}

SteadyReport steady_state_report(const Operator& h, const std::vector<LindbladTerm>& terms,
                                 const SteadyOptions& opts) {
  if (opts.allow_secular) {
    if (auto gen = SecularGenerator::detect(h, terms)) {
      const Liouvillian liou(h, terms);
      return finish(liou, gen->steady_state(), "secular", 0, opts);
    }
  }
  const Liouvillian liou(h, terms);
  if (terms.empty()) throw Error(ErrorKind::degeneracy, "no dissipation: steady state is not unique");
  if (liou.dim() <= opts.dense_limit) return finish(liou, dense_solve(liou, opts), "dense", 0, opts);
  if (opts.integration_fallback) {
    return finish(liou, integrate_to_steady(h, terms, liou, opts), "integration", 0, opts);
  }
  int iterations = 0;
  Matrix rho = krylov_solve(liou, opts, iterations);
  return finish(liou, std::move(rho), "gmres", iterations, opts);
}

DensityMatrix steady_state(const Operator& h, const std::vector<LindbladTerm>& terms,
                           const SteadyOptions& opts) {
  return steady_state_report(h, terms, opts).rho;
}

}  // namespace gjj::dynamics
