#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include <Eigen/Eigenvalues>

#include "gjj/dynamics.hpp"
#include "gjj/error.hpp"

namespace gjj::dynamics {

namespace {

// Dormand-Prince 5(4) tableau; the generator is time independent so the
// nodes c_i are not needed.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// b - b* (fifth minus fourth order weights)
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

void check_grid(const std::vector<double>& times) {
  if (times.empty()) throw Error(ErrorKind::numerical_domain, "empty time grid");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] >= times[i - 1])) throw Error(ErrorKind::numerical_domain, "time grid must be non-decreasing");
}

void record(Trajectory& traj, double t, Matrix rho, const std::vector<int>& dims,
            const EvolveOptions& opts) {
  rho = 0.5 * (rho + rho.adjoint()).eval();
  StepDiagnostics d;
  d.trace_deviation = std::abs(rho.trace() - cplx(1.0, 0.0));
  if (d.trace_deviation > opts.trace_tol) {
    throw Error(ErrorKind::convergence, "trace drifted by " + std::to_string(d.trace_deviation) +
                                            " at t=" + std::to_string(t));
  }
  DensityMatrix state(std::move(rho), dims, false);
  if (opts.check_positivity) {
    d.min_eigenvalue = state.min_eigenvalue();
    if (d.min_eigenvalue < opts.positivity_floor) {
      throw Error(ErrorKind::numerical_domain, "state lost positivity (min eigenvalue " +
                                                   std::to_string(d.min_eigenvalue) + ") at t=" +
                                                   std::to_string(t));
    }
  }
  d.leakage = fock::top_leakage(state);
  if (d.leakage > opts.leakage_tol) {
    throw TruncationError("truncation leakage " + std::to_string(d.leakage) + " at t=" + std::to_string(t),
                          d.leakage);
  }
  traj.times.push_back(t);
  traj.states.push_back(std::move(state));
  traj.diagnostics.push_back(d);
}

Trajectory evolve_unitary(const DensityMatrix& rho0, const Operator& h, const std::vector<double>& times,
                          const EvolveOptions& opts) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h.mat() + h.mat().adjoint()));
  const Matrix& v = es.eigenvectors();
  const Eigen::VectorXd& e = es.eigenvalues();
  const Matrix rt0 = v.adjoint() * rho0.mat() * v;
  const int n = h.dim();
  Trajectory traj;
  traj.method = "unitary";
  for (double t : times) {
    const double dt = t - times.front();
    Matrix rt(n, n);
    for (int c = 0; c < n; ++c)
      for (int r = 0; r < n; ++r) rt(r, c) = rt0(r, c) * std::exp(cplx(0.0, -(e(r) - e(c)) * dt));
    record(traj, t, v * rt * v.adjoint(), rho0.factor_dims(), opts);
  }
  return traj;
}

Trajectory evolve_adaptive(const DensityMatrix& rho0, const Operator& h, const std::vector<LindbladTerm>& terms,
                           const std::vector<double>& times, const EvolveOptions& opts) {
  const Liouvillian liou(h, terms);
  Trajectory traj;
  traj.method = "dopri5";
  Matrix y = rho0.mat();
  double t = times.front();
  record(traj, t, y, rho0.factor_dims(), opts);

  const double scale = liou.drift().norm() / std::sqrt(static_cast<double>(liou.dim())) + liou.rate_scale();
  double step = scale > 0.0 ? 0.01 / scale : 1.0;
  Matrix k1 = liou.apply(y);
  long steps = 0;

  for (std::size_t i = 1; i < times.size(); ++i) {
    const double target = times[i];
    while (t < target) {
      if (++steps > opts.max_steps) throw Error(ErrorKind::stiffness, "integrator exceeded the step budget");
      const bool last = t + step >= target;
      const double hstep = last ? target - t : step;
      if (hstep < 1e-14 * std::max(1.0, std::abs(t))) {
        throw Error(ErrorKind::stiffness, "step-size underflow at t=" + std::to_string(t));
      }
      const Matrix k2 = liou.apply(y + hstep * a21 * k1);
      const Matrix k3 = liou.apply(y + hstep * (a31 * k1 + a32 * k2));
      const Matrix k4 = liou.apply(y + hstep * (a41 * k1 + a42 * k2 + a43 * k3));
      const Matrix k5 = liou.apply(y + hstep * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
      const Matrix k6 = liou.apply(y + hstep * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
      Matrix ynew = y + hstep * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
      const Matrix k7 = liou.apply(ynew);
      const Matrix err = hstep * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
      const double allowed = opts.tol * (1.0 + ynew.norm());
      const double ratio = err.norm() / allowed;
      if (ratio <= 1.0) {
        t = last ? target : t + hstep;
        y = 0.5 * (ynew + ynew.adjoint());
        k1 = liou.apply(y);
        ++traj.accepted_steps;
      } else {
        ++traj.rejected_steps;
      }
      const double factor = ratio > 0.0 ? 0.9 * std::pow(ratio, -0.2) : 5.0;
      // Keep the nominal step when a short final step to the grid point was taken.
      if (!(last && ratio <= 1.0 && hstep < step)) step = hstep * std::clamp(factor, 0.2, 5.0);
      step = std::max(step, 1e-300);
    }
    record(traj, t, y, rho0.factor_dims(), opts);
  }
  return traj;
}

}  // namespace

Trajectory evolve(const DensityMatrix& rho0, const Operator& h, const std::vector<LindbladTerm>& terms,
                  const std::vector<double>& times, const EvolveOptions& opts) {
  if (rho0.dim() != h.dim()) throw Error(ErrorKind::shape, "state and Hamiltonian dimensions differ");
  if (!(opts.tol > 0.0)) throw Error(ErrorKind::numerical_domain, "integration tolerance must be positive");
  check_grid(times);
  if (!opts.force_adaptive) {
    if (terms.empty()) return evolve_unitary(rho0, h, times, opts);
    if (auto gen = SecularGenerator::detect(h, terms)) {
      Trajectory traj;
      traj.method = "secular";
      std::vector<Matrix> states = gen->propagate(rho0.mat(), times);
      for (std::size_t i = 0; i < times.size(); ++i)
        record(traj, times[i], std::move(states[i]), rho0.factor_dims(), opts);
      return traj;
    }
  }
  return evolve_adaptive(rho0, h, terms, times, opts);
}

void write_binary_snapshots(const std::string& path, const std::vector<Matrix>& states) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::config, "cannot open " + path + " for writing");
  const std::uint64_t dim = states.empty() ? 0 : static_cast<std::uint64_t>(states.front().rows());
  const std::uint64_t count = states.size();
  auto put_u64 = [&](std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 8);
  };
  auto put_f64 = [&](double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    put_u64(bits);
  };
  put_u64(dim);
  put_u64(count);
  for (const Matrix& m : states) {
    if (static_cast<std::uint64_t>(m.rows()) != dim) throw Error(ErrorKind::shape, "snapshot dimensions differ");
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        put_f64(m(r, c).real());
        put_f64(m(r, c).imag());
      }
  }
}

std::vector<Matrix> read_binary_snapshots(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::config, "cannot open " + path);
  auto get_u64 = [&]() {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw Error(ErrorKind::shape, "truncated snapshot file " + path);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  };
  auto get_f64 = [&]() {
    const std::uint64_t bits = get_u64();
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
  };
  const std::uint64_t dim = get_u64();
  const std::uint64_t count = get_u64();
  std::vector<Matrix> out;
  for (std::uint64_t k = 0; k < count; ++k) {
    Matrix m(dim, dim);
    for (std::uint64_t r = 0; r < dim; ++r)
      for (std::uint64_t c = 0; c < dim; ++c) {
        const double re = get_f64();
        const double im = get_f64();
        m(r, c) = cplx(re, im);
      }
    out.push_back(std::move(m));
  }
  return out;
}

}  // namespace gjj::dynamics
