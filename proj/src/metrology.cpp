#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>
#include <thread>

#include "gjj/analysis.hpp"
#include "gjj/error.hpp"
#include "gjj/models.hpp"

namespace gjj::analysis {

namespace {

// Squeeze unitary S(r) restricted to the first `dim` levels, taken from a
// padded space so the kept block is not polluted by the truncation edge.
Matrix squeeze_block(double r, int dim) {
  const int big = std::min(fock::kMaxDenseDim, 2 * dim + 20);
  return fock::squeeze(r, big).mat().topLeftCorner(dim, dim);
}

struct FrameMap {
  bool active = false;
  Matrix s;  // S(r(w)) on the kept block
};

FrameMap frame_map(const SensingModel& m, double w) {
  FrameMap f;
  if (m.generator != Generator::squeezed_frame) return f;
  f.active = true;
  f.s = squeeze_block(models::squeeze_parameter(w, m.Lambda_at(w)), m.dim);
  return f;
}

Matrix to_lab(const FrameMap& f, const Matrix& rho) {
  if (!f.active) return rho;
  return f.s.adjoint() * rho * f.s;
}

Matrix to_frame(const FrameMap& f, const Matrix& rho) {
  if (!f.active) return rho;
  return f.s * rho * f.s.adjoint();
}

std::vector<Matrix> lab_trajectory(const SensingModel& m, double w, const std::vector<double>& times,
                                   const dynamics::EvolveOptions& eo) {
  const FrameMap f = frame_map(m, w);
  const DensityMatrix init = m.initial_state();
  const DensityMatrix start(to_frame(f, init.mat()), false);
  const dynamics::Trajectory tr = dynamics::evolve(start, m.hamiltonian(w), m.dissipators(w), times, eo);
  std::vector<Matrix> out;
  out.reserve(tr.states.size());
  for (const DensityMatrix& s : tr.states) out.push_back(to_lab(f, s.mat()));
  return out;
}

std::vector<double> qfi_series(const std::vector<Matrix>& plus, const std::vector<Matrix>& minus,
                               const std::vector<Matrix>& centre, double h) {
  std::vector<double> f(centre.size());
  for (std::size_t i = 0; i < centre.size(); ++i)
    f[i] = qfi_from_state(centre[i], (plus[i] - minus[i]) / (2.0 * h));
  return f;
}

Matrix steady_lab(const SensingModel& m, double w, const dynamics::SteadyOptions& so) {
  const FrameMap f = frame_map(m, w);
  const DensityMatrix rho = dynamics::steady_state(m.hamiltonian(w), m.dissipators(w), so);
  return to_lab(f, rho.mat());
}

}  // namespace

double SensingModel::Lambda_at(double w) const { return Lambda * std::pow(omega / w, scaling); }

double SensingModel::xi_at(double w) const { return xi * std::pow(omega / w, 2.0 * scaling); }

double SensingModel::gamma_at(double w) const { return gamma_tracks_omega ? gamma * w / omega : gamma; }

Operator SensingModel::hamiltonian(double w) const {
  if (generator == Generator::squeezed_frame) {
    const models::EffectiveParams e = models::effective_params_direct(w, Lambda_at(w), xi_at(w));
    return models::build_h_squeezed(dim, e);
  }
  return models::build_h_eff(dim, w, Lambda_at(w), xi_at(w));
}

std::vector<dynamics::LindbladTerm> SensingModel::dissipators(double w) const {
  switch (generator) {
    case Generator::eigenbasis:
      return dynamics::eigenbasis_dissipators(hamiltonian(w), fock::ladder(dim), gamma_at(w), temperature);
    case Generator::squeezed_frame: {
      const double lam = Lambda_at(w);
      return dynamics::squeezed_frame_dissipators(gamma_at(w), models::squeeze_parameter(w, lam),
                                                  models::effective_gap(w, lam), temperature, dim);
    }
    case Generator::local:
      return dynamics::local_dissipators(0.0, gamma_at(w), fock::bose_occupation(w, temperature), {dim});
  }
  return {};
}

DensityMatrix SensingModel::initial_state() const {
  if (initial.size() == 0) return DensityMatrix::pure(fock::fock_state(0, dim));
  if (initial.rows() != dim) throw Error(ErrorKind::shape, "initial state does not match the model dimension");
  return DensityMatrix(initial);
}

double default_fd_step(const SensingModel& model, double t_max) {
  double h = 1e-5 * model.omega;
  if (t_max > 0.0) h = std::min(h, 1e-3 / t_max);
  return h;
}

QfiCurve qfi_dynamic(const SensingModel& model, const std::vector<double>& times, double h, bool richardson,
                     const dynamics::EvolveOptions& eo) {
  if (times.empty()) throw Error(ErrorKind::numerical_domain, "empty time grid");
  const double w = model.omega;
  if (h <= 0.0) h = default_fd_step(model, times.back());
  const double distance = model.Lambda - models::critical_coupling(w);
  if (!(h < 1e-2 * distance)) {
    throw Error(ErrorKind::numerical_domain, "finite-difference step is not small against the distance to criticality");
  }
  const auto centre = lab_trajectory(model, w, times, eo);
  QfiCurve out;
  out.times = times;
  out.h = h;
  out.values = qfi_series(lab_trajectory(model, w + h, times, eo), lab_trajectory(model, w - h, times, eo),
                          centre, h);
  const auto peak = std::max_element(out.values.begin(), out.values.end());
  if (*peak <= 0.0) throw Error(ErrorKind::fit, "dynamical QFI never rises above zero");
  if (richardson) {
    const std::size_t i = static_cast<std::size_t>(peak - out.values.begin());
    const std::vector<double> sub{times.front(), times[i]};
    const auto p = lab_trajectory(model, w + h / 2, sub, eo);
    const auto m = lab_trajectory(model, w - h / 2, sub, eo);
    const double half = qfi_from_state(centre[i], (p[1] - m[1]) / h);
    out.richardson_discrepancy = std::abs(half - *peak) / *peak;
    out.richardson_warning = out.richardson_discrepancy > 0.01;
  }
  return out;
}

SteadyQfi qfi_steady_numeric(const SensingModel& model, double h, const dynamics::SteadyOptions& so) {
  const double w = model.omega;
  const Matrix centre = steady_lab(model, w, so);
  auto at_step = [&](double step) {
    return qfi_from_state(centre, (steady_lab(model, w + step, so) - steady_lab(model, w - step, so)) / (2.0 * step));
  };
  SteadyQfi out;
  out.h = h;
  out.value = at_step(h);
  const double half = at_step(h / 2);
  out.richardson_discrepancy = out.value > 0.0 ? std::abs(half - out.value) / out.value : 0.0;
  out.rho = DensityMatrix(centre, false);
  return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y, double* intercept) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorKind::fit, "log-log fit needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw Error(ErrorKind::fit, "log-log fit needs positive data");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  if (intercept) *intercept = (sy - slope * sx) / n;
  return slope;
}

ScanResult criticality_scan(const SensingModel& base, const std::vector<double>& Lambdas, const ScanOptions& opts) {
  const double lc = models::critical_coupling(base.omega);
  for (double l : Lambdas)
    if (!(l > lc && l <= 0.0)) throw Error(ErrorKind::numerical_domain, "scan couplings must lie in (Lambda_c, 0]");

  ScanResult result;
  result.rows.resize(Lambdas.size());
  auto run_point = [&](std::size_t i) {
    ScanRow& row = result.rows[i];
    row.Lambda = Lambdas[i];
    row.Lambda_ratio = Lambdas[i] / lc;
    auto evaluate = [&](SensingModel m) {
      row.dim = m.dim;
      double t_max = opts.t_max;
      if (t_max <= 0.0) {
        const double r = models::squeeze_parameter(m.omega, m.Lambda);
        const double rate = m.gamma * std::cosh(r) * std::cosh(r);
        if (!(rate > 0.0)) throw Error(ErrorKind::numerical_domain, "closed-system scan needs an explicit t_max");
        t_max = opts.t_max_factor / rate;
      }
      std::vector<double> times(opts.time_points);
      for (int k = 0; k < opts.time_points; ++k) times[k] = t_max * k / (opts.time_points - 1);
      const QfiCurve curve = qfi_dynamic(m, times, opts.fd_step, false);
      const auto peak = std::max_element(curve.values.begin(), curve.values.end());
      row.F_max = *peak;
      row.t_at_max = times[peak - curve.values.begin()];
      const QfiFit fit = fit_qfi(curve.times, curve.values, opts.fit);
      row.F_max_fit = fit.F_max;
      row.t_star = fit.t_star;
      row.zeta = fit.zeta;
      row.beta_decay = fit.beta_decay;
      row.fit_residual = fit.residual;
      const SteadyQfi ss = qfi_steady_numeric(m);
      row.F_ss = ss.value;
      row.C_l1_ss = l1_coherence(ss.rho);
    };
    SensingModel m = base;
    m.Lambda = Lambdas[i];
    try {
      try {
        evaluate(m);
      } catch (const TruncationError&) {
        if (!opts.escalate_truncation) throw;
        m.dim *= 2;
        evaluate(m);
      }
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  };

  const int workers = std::max(1, std::min<int>(opts.workers, static_cast<int>(Lambdas.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < Lambdas.size(); ++i) run_point(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        for (std::size_t i = next++; i < Lambdas.size(); i = next++) run_point(i);
      });
    }
    for (auto& t : pool) t.join();
  }

  std::vector<double> x, y;
  for (const ScanRow& row : result.rows) {
    if (!row.error.empty() || !(row.F_max > 0.0)) continue;
    x.push_back(row.Lambda - lc);
    y.push_back(row.F_max);
  }
  if (x.size() >= 2) {
    double c = 0.0;
    result.exponent = loglog_slope(x, y, &c);
    result.exponent_intercept = c;
  }
  return result;
}

}  // namespace gjj::analysis
