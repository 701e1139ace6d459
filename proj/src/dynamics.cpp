#include "ptdimer/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "ptdimer/parallel.hpp"
#include "ptdimer/signal.hpp"
#include "ptdimer/units.hpp"

namespace ptdimer {

namespace {

// Both closed forms share x = Gamma t / 2 and the damping e^{-gamma t / 4}.
// The pieces below return e^{-gamma t/4} cosh(x) and e^{-gamma t/4} sinh(x)/x
// without forming e^{|x|} on its own.
struct Damped {
  complex cosh;
  complex sinhc;
};

Damped damped_parts(double t, const DimerParams& p) {
  const complex gamma_big = p.Gamma();
  const double decay = p.gamma * t / 4.0;
  const complex x = 0.5 * gamma_big * t;
  if (std::abs(gamma_big) * t < 1e-6) {
    const double e = std::exp(-decay);
    return {e * (1.0 + x * x / 2.0), e * (1.0 + x * x / 6.0)};
  }
  const complex up = std::exp(x - decay), down = std::exp(-x - decay);
  return {0.5 * (up + down), 0.5 * (up - down) / x};
}

void check_times(std::span<const double> times, const char* who) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < 0.0 || (i > 0 && times[i] < times[i - 1])) {
      throw std::invalid_argument(std::string(who) + ": times must be non-negative and non-decreasing");
    }
  }
}

// Reuses one step propagator while the spacing stays put.
template <class Step>
void march(std::span<const double> times, Step&& step) {
  double t_prev = 0.0, dt_cached = -1.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double dt = times[i] - t_prev;
    const bool same = dt_cached >= 0.0 && std::abs(dt - dt_cached) <= 1e-12 * std::max(dt, dt_cached);
    step(i, dt, !same);
    if (!same) dt_cached = dt;
    t_prev = times[i];
  }
}

}  // namespace

double q1_population_analytic(double t, const DimerParams& p) {
  if (t < 0.0) throw std::invalid_argument("q1_population_analytic: t must be non-negative");
  const double a = p.gamma * t / 4.0;
  const complex x = 0.5 * p.Gamma() * t;
  if (std::abs(x) < 5e-7) {
    const Damped d = damped_parts(t, p);
    return std::norm(d.cosh + a * d.sinhc);
  }
  // Grouped by exponential so that at g = 0 the decaying branch cancels exactly
  // and the population stays pinned at one instead of wobbling by an ulp.
  const complex r = a / x;
  const complex up = std::exp(x - a), down = std::exp(-x - a);
  return std::norm(0.5 * (up * (1.0 + r) + down * (1.0 - r)));
}

double q2_coherence_analytic(double t, const DimerParams& p) {
  if (t < 0.0) throw std::invalid_argument("q2_coherence_analytic: t must be non-negative");
  const Damped d = damped_parts(t, p);
  return p.g * (t / 2.0) * std::abs(d.sinhc);
}

complex expectation(const ComplexMatrix& op, const ComplexVector& psi) { return psi.dot(op * psi); }

KetTrajectory evolve_nonhermitian(const ComplexMatrix& h, const ComplexVector& psi0, std::span<const double> times) {
  if (!h.is_square() || h.rows() != psi0.size()) throw std::invalid_argument("evolve_nonhermitian: dimension mismatch");
  check_times(times, "evolve_nonhermitian");
  KetTrajectory out;
  out.times.assign(times.begin(), times.end());
  out.states.reserve(times.size());
  ComplexVector psi = psi0;
  ComplexMatrix u;
  march(times, [&](std::size_t, double dt, bool fresh) {
    if (fresh) u = expm(complex(0.0, -dt) * h);
    psi = u * psi;
    out.states.push_back(psi);
  });
  if (psi0.size() == 4) {
    const Observables obs = observables();
    std::vector<complex> a(times.size()), b(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
      a[i] = expectation(obs.M0, out.states[i]);
      b[i] = expectation(obs.M1, out.states[i]);
    }
    out.m0 = TimeTrace(out.times, std::move(a), {0.0, 0.0, "population", 0});
    out.m1 = TimeTrace(out.times, std::move(b), {0.0, 0.0, "coherence", 0});
  }
  return out;
}

// ------------------------------------------------------------ DensityMatrix

DensityMatrix::DensityMatrix(ComplexMatrix rho) : rho_(std::move(rho)) {
  if (rho_.empty() || !rho_.is_square()) throw std::invalid_argument("DensityMatrix: matrix must be square and non-empty");
}

DensityMatrix DensityMatrix::pure(const ComplexVector& psi) {
  const std::size_t n = psi.size();
  ComplexMatrix rho(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) rho(i, j) = psi[i] * std::conj(psi[j]);
  }
  return DensityMatrix(std::move(rho));
}

DensityMatrix DensityMatrix::from_vectorized(const ComplexVector& v, std::size_t dim) {
  if (v.size() != dim * dim) throw std::invalid_argument("DensityMatrix::from_vectorized: length is not dim^2");
  ComplexMatrix rho(dim, dim);
  for (std::size_t c = 0; c < dim; ++c) {
    for (std::size_t r = 0; r < dim; ++r) rho(r, c) = v[c * dim + r];
  }
  return DensityMatrix(std::move(rho));
}

ComplexVector DensityMatrix::vectorized() const {
  const std::size_t n = dim();
  ComplexVector v(n * n);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t r = 0; r < n; ++r) v[c * n + r] = rho_(r, c);
  }
  return v;
}

double DensityMatrix::min_eigenvalue() const {
  const ComplexMatrix herm = 0.5 * (rho_ + rho_.adjoint());
  return eigh(herm).values.front();
}

complex DensityMatrix::expectation(const ComplexMatrix& op) const {
  if (op.rows() != dim() || op.cols() != dim()) throw std::invalid_argument("DensityMatrix::expectation: dimension mismatch");
  complex acc = 0.0;
  for (std::size_t i = 0; i < dim(); ++i) {
    for (std::size_t k = 0; k < dim(); ++k) acc += op(i, k) * rho_(k, i);
  }
  return acc;
}

void DensityMatrix::check(double trace_tol, double hermitian_tol, double positivity_tol) const {
  std::ostringstream msg;
  const double tr_err = std::abs(trace() - 1.0);
  if (!(tr_err <= trace_tol)) msg << "trace off by " << tr_err << "; ";
  const double herm = hermiticity_error();
  if (!(herm <= hermitian_tol)) msg << "Hermiticity error " << herm << "; ";
  const double lo = min_eigenvalue();
  if (!(lo >= -positivity_tol)) msg << "minimum eigenvalue " << lo << "; ";
  const std::string s = msg.str();
  if (!s.empty()) throw InvariantViolation("density matrix: " + s.substr(0, s.size() - 2));
}

// ----------------------------------------------------------------- Lindblad

ComplexMatrix liouvillian(const ComplexMatrix& h, const std::vector<CollapseOp>& collapse) {
  if (!h.is_square()) throw std::invalid_argument("liouvillian: Hamiltonian must be square");
  const std::size_t n = h.rows();
  const ComplexMatrix id = ComplexMatrix::identity(n);
  ComplexMatrix l = complex(0.0, -1.0) * (kron(id, h) - kron(h.transpose(), id));
  for (const auto& c : collapse) {
    if (c.op.rows() != n || c.op.cols() != n) throw std::invalid_argument("liouvillian: collapse operator dimension mismatch");
    if (c.rate < 0.0) throw std::invalid_argument("liouvillian: negative collapse rate");
    if (c.rate == 0.0) continue;
    const ComplexMatrix od = c.op.adjoint() * c.op;
    ComplexMatrix d = kron(c.op.conj(), c.op);
    d -= 0.5 * kron(id, od);
    d -= 0.5 * kron(od.transpose(), id);
    l += c.rate * d;
  }
  return l;
}

std::vector<DensityMatrix> lindblad_evolve(const ComplexMatrix& h, const std::vector<CollapseOp>& collapse,
                                           const DensityMatrix& rho0, std::span<const double> times) {
  if (h.rows() != rho0.dim()) throw std::invalid_argument("lindblad_evolve: dimension mismatch");
  if (h.hermiticity_error() > 1e-12 * std::max(1.0, h.max_abs())) {
    throw std::invalid_argument("lindblad_evolve: Hamiltonian is not Hermitian");
  }
  check_times(times, "lindblad_evolve");
  const ComplexMatrix l = liouvillian(h, collapse);
  std::vector<DensityMatrix> out;
  out.reserve(times.size());
  ComplexVector v = rho0.vectorized();
  ComplexMatrix prop;
  march(times, [&](std::size_t, double dt, bool fresh) {
    if (fresh) prop = expm(complex(dt, 0.0) * l);
    v = prop * v;
    out.push_back(DensityMatrix::from_vectorized(v, rho0.dim()));
  });
  return out;
}

DensityMatrix steady_state(const ComplexMatrix& h, const std::vector<CollapseOp>& collapse) {
  const std::size_t n = h.rows();
  ComplexMatrix l = liouvillian(h, collapse);
  const std::size_t kernel = numerical_nullity(l, 1e-12);
  if (kernel > 1) {
    std::ostringstream msg;
    msg << "steady_state: Liouvillian kernel looks " << kernel << "-dimensional";
    throw DegenerateSteadyState(msg.str(), kernel);
  }
  const double scale = l.max_abs();
  ComplexMatrix a = l;
  for (std::size_t c = 0; c < n * n; ++c) a(0, c) = 0.0;
  for (std::size_t k = 0; k < n; ++k) a(0, k * n + k) = scale;  // trace row, scaled like the rest
  ComplexVector rhs(n * n);
  rhs[0] = scale;
  ComplexVector v;
  try {
    v = solve_linear(a, rhs);
  } catch (const SingularMatrixError&) {
    throw DegenerateSteadyState("steady_state: constrained Liouvillian is singular; kernel is not one-dimensional", 2);
  }
  const double resid = (l * v).norm() / (l.norm1() * v.norm());
  if (!(resid <= 1e-9)) {
    std::ostringstream msg;
    msg << "steady_state: relative residual " << resid << " exceeds 1e-9";
    throw InvariantViolation(msg.str());
  }
  return DensityMatrix::from_vectorized(v, n);
}

std::vector<CollapseOp> dimer_collapse(const DimerParams& p) { return {{p.gamma, lowering_op(1, 2)}}; }

std::vector<CollapseOp> three_mode_collapse(const ThreeModeParams& p) { return {{p.gamma, lowering_op(2, 3)}}; }

// ------------------------------------------------------------ input-output

TimeTrace emission_amplitude(const TimeTrace& coherence, const DimerParams& p) {
  TimeTrace out = coherence;
  const double k = std::sqrt(p.gamma / 2.0);
  for (auto& v : out.values) v *= k;
  out.meta.observable = "field";
  return out;
}

namespace {

Spectrum sweep_s21(std::span<const double> detunings, double gamma, double Omega_p, const ComplexMatrix& sigma2,
                   const std::function<ComplexMatrix(double)>& hamiltonian, const std::vector<CollapseOp>& collapse) {
  if (!(Omega_p > 0.0)) throw std::invalid_argument("transmission_spectrum: Omega_p must be positive");
  Spectrum s;
  s.detunings.assign(detunings.begin(), detunings.end());
  s.s21.resize(detunings.size());
  parallel_for(detunings.size(), [&](std::size_t k) {
    const DensityMatrix rho = steady_state(hamiltonian(detunings[k]), collapse);
    rho.check();
    s.s21[k] = 1.0 - complex(0.0, gamma / Omega_p) * rho.expectation(sigma2);
  });
  s.meta.Omega_p = Omega_p;
  return s;
}

}  // namespace

Spectrum transmission_spectrum(const ThreeModeParams& p, double Omega_p, std::span<const double> detunings,
                               double reference_shift, double g_tilde) {
  p.validate();
  Spectrum s = sweep_s21(
      detunings, p.gamma, Omega_p, lowering_op(2, 3),
      [&](double dp) { return driven_hamiltonian(p, {dp - reference_shift, Omega_p}); }, three_mode_collapse(p));
  s.meta.reference_shift = reference_shift;
  s.meta.g_tilde = g_tilde;
  return s;
}

Spectrum transmission_spectrum(const DimerParams& p, double Omega_p, std::span<const double> detunings) {
  if (p.g == 0.0) {
    // Q1 is a lossless spectator with no unique steady state; it stays in |g>,
    // so the probe sees Q2 alone.
    const std::vector<CollapseOp> decay{{p.gamma, lowering_op(0, 1)}};
    Spectrum s = sweep_s21(
        detunings, p.gamma, Omega_p, lowering_op(0, 1),
        [&](double dp) { return (0.5 * dp) * sigma_z(0, 1) + (0.5 * Omega_p) * sigma_x(0, 1); }, decay);
    s.meta.g_tilde = 0.0;
    return s;
  }
  Spectrum s = sweep_s21(
      detunings, p.gamma, Omega_p, lowering_op(1, 2),
      [&](double dp) { return driven_dimer_hamiltonian(p, {dp, Omega_p}); }, dimer_collapse(p));
  s.meta.g_tilde = p.g_tilde();
  return s;
}

// ---------------------------------------------------------- emission sweep

EmissionSweep simulate_q2_emission_sweep(const CouplerMap& map, std::span<const double> g_tilde,
                                         std::span<const double> times, const EmissionSweepOptions& opts) {
  if (times.empty() || times.front() != 0.0 || times.back() < units::ns(100.0) * (1.0 - 1e-9)) {
    throw std::invalid_argument("simulate_q2_emission_sweep: time grid must cover [0, 100 ns]");
  }
  const double gamma = map.params().gamma;
  EmissionSweep out;
  out.g_tilde.assign(g_tilde.begin(), g_tilde.end());
  out.times.assign(times.begin(), times.end());
  out.omega_c.resize(g_tilde.size());
  out.raw = Field2D(g_tilde.size(), times.size());
  out.filtered = out.raw;

  const double r = 1.0 / std::sqrt(2.0);
  const DensityMatrix rho0 = DensityMatrix::pure(product_state({{r, r}, {0.0, 1.0}, {0.0, 1.0}}));
  const ComplexMatrix sigma2 = lowering_op(2, 3);
  parallel_for(g_tilde.size(), [&](std::size_t i) {
    const ThreeModeParams p = map.at_g(g_tilde[i] * gamma / 4.0);
    out.omega_c[i] = p.omega_c;
    const std::vector<DensityMatrix> traj = lindblad_evolve(three_mode_hamiltonian(p), three_mode_collapse(p), rho0, times);
    std::vector<complex> s2(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
      traj[k].check();
      s2[k] = traj[k].expectation(sigma2);
      out.raw(i, k) = std::abs(s2[k]);
    }
    if (opts.filter) {
      // The complex coherence is filtered before taking the magnitude: rectifying the
      // coupler ripple first would leave a DC offset the filter cannot remove.
      const TimeTrace f = butterworth_lowpass(TimeTrace(out.times, std::move(s2), {g_tilde[i], 0.0, "coherence", 0}),
                                              opts.cutoff_hz, opts.order);
      for (std::size_t k = 0; k < times.size(); ++k) out.filtered(i, k) = std::abs(f.values[k]);
    } else {
      for (std::size_t k = 0; k < times.size(); ++k) out.filtered(i, k) = out.raw(i, k);
    }
  });
  return out;
}

}  // namespace ptdimer
