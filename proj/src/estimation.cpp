#include "ptdimer/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "ptdimer/dynamics.hpp"

namespace ptdimer {

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

TimeTrace synth_population(const DimerParams& p, std::span<const double> times, std::size_t shots, std::uint64_t seed) {
  if (shots == 0) throw std::invalid_argument("synth_population: shots must be at least 1");
  std::mt19937_64 rng(seed);
  std::vector<complex> values(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double prob = std::clamp(q1_population_analytic(times[i], p), 0.0, 1.0);
    std::binomial_distribution<std::size_t> draw(shots, prob);
    values[i] = static_cast<double>(draw(rng)) / static_cast<double>(shots);
  }
  return TimeTrace({times.begin(), times.end()}, std::move(values), {p.g_tilde(), 0.0, "population", shots});
}

TimeTrace synth_emission(const DimerParams& p, std::span<const double> times, double sigma_add, std::uint64_t seed) {
  if (!(sigma_add >= 0.0)) throw std::invalid_argument("synth_emission: sigma_add must be non-negative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<complex> values(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double s = times[i] < 0.0 ? 0.0 : q2_coherence_analytic(times[i], p);
    double re = s, im = 0.0;
    if (sigma_add > 0.0) {
      re += sigma_add * noise(rng);
      im += sigma_add * noise(rng);
    }
    values[i] = std::hypot(re, im);
  }
  return TimeTrace({times.begin(), times.end()}, std::move(values), {p.g_tilde(), 0.0, "coherence", 0});
}

namespace {

using Params = std::vector<double>;
using Residuals = std::function<std::vector<double>(const Params&)>;

double sum_sq(const std::vector<double>& r) {
  return std::inner_product(r.begin(), r.end(), r.begin(), 0.0);
}

// Gaussian elimination with partial pivoting for the tiny normal equations.
bool solve_small(std::vector<std::vector<double>> a, std::vector<double>& b) {
  const std::size_t n = b.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(a[i][k]) > std::abs(a[piv][k])) piv = i;
    }
    if (!(std::abs(a[piv][k]) > 0.0) || !std::isfinite(a[piv][k])) return false;
    std::swap(a[k], a[piv]);
    std::swap(b[k], b[piv]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a[i][k] / a[k][k];
      for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
      b[i] -= f * b[k];
    }
  }
  for (std::size_t k = n; k-- > 0;) {
    double s = b[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= a[k][j] * b[j];
    b[k] = s / a[k][k];
  }
  return true;
}

std::vector<std::vector<double>> jacobian(const Residuals& f, const Params& x, const std::vector<double>& r0) {
  std::vector<std::vector<double>> jac(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(x[j]));
    Params xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    const std::vector<double> rp = f(xp), rm = f(xm);
    jac[j].resize(r0.size());
    for (std::size_t i = 0; i < r0.size(); ++i) jac[j][i] = (rp[i] - rm[i]) / (2.0 * h);
  }
  return jac;
}

std::vector<std::vector<double>> normal_matrix(const std::vector<std::vector<double>>& jac) {
  const std::size_t n = jac.size();
  std::vector<std::vector<double>> a(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      a[i][j] = a[j][i] = std::inner_product(jac[i].begin(), jac[i].end(), jac[j].begin(), 0.0);
    }
  }
  return a;
}

struct LmOutcome {
  Params x;
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Levenberg-Marquardt with Marquardt's diagonal scaling.
LmOutcome levenberg_marquardt(const Residuals& f, Params x, int max_iterations) {
  std::vector<double> r = f(x);
  double cost = sum_sq(r);
  double lambda = 1e-3;
  LmOutcome out;
  for (int it = 0; it < max_iterations; ++it) {
    out.iterations = it + 1;
    const auto jac = jacobian(f, x, r);
    const auto a = normal_matrix(jac);
    std::vector<double> g(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) g[j] = -std::inner_product(jac[j].begin(), jac[j].end(), r.begin(), 0.0);
    bool improved = false;
    double step_norm = 0.0;
    for (int tries = 0; tries < 30 && !improved; ++tries) {
      auto damped = a;
      for (std::size_t j = 0; j < x.size(); ++j) damped[j][j] += lambda * std::max(a[j][j], 1e-300);
      std::vector<double> step = g;
      if (!solve_small(damped, step)) {
        lambda *= 10.0;
        continue;
      }
      Params trial = x;
      for (std::size_t j = 0; j < x.size(); ++j) trial[j] += step[j];
      const std::vector<double> rt = f(trial);
      const double ct = sum_sq(rt);
      if (std::isfinite(ct) && ct <= cost) {
        step_norm = 0.0;
        for (double s : step) step_norm = std::max(step_norm, std::abs(s));
        const double prev = cost;
        x = std::move(trial);
        r = rt;
        cost = ct;
        lambda = std::max(lambda / 10.0, 1e-12);
        improved = true;
        if (step_norm < 1e-12 || cost <= 1e-300 || prev - cost <= 1e-15 * prev) {
          out.converged = true;
        }
      } else {
        lambda *= 10.0;
      }
    }
    if (!improved) {
      // No downhill step at any damping: a stationary point to working precision.
      out.converged = true;
    }
    if (out.converged) break;
  }
  out.x = std::move(x);
  out.cost = cost;
  return out;
}

enum class Model { population, coherence };

double model_value(Model m, double t, double g, double gamma) {
  const DimerParams p{gamma, g};
  return m == Model::population ? q1_population_analytic(t, p) : q2_coherence_analytic(t, p);
}

struct Prepared {
  std::vector<double> t;
  std::vector<double> y;
  std::vector<double> w;  // residual weights (1 / sigma), or all ones
};

FitResult fit_model(Model m, const Prepared& data, const FitOptions& opts) {
  const bool with_scale = m == Model::coherence && opts.free_scale;
  const std::size_t n = data.t.size();
  // Parameters: log g, log gamma [, log scale].
  auto residuals = [&](const Params& x) {
    const double g = std::exp(x[0]), gamma = std::exp(x[1]);
    const double scale = with_scale ? std::exp(x[2]) : 1.0;
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = data.w[i] * (scale * model_value(m, data.t[i], g, gamma) - data.y[i]);
    return r;
  };
  const Residuals f = residuals;

  std::vector<Params> starts;
  auto make_start = [&](double g, double gamma) {
    Params s{std::log(g), std::log(gamma)};
    if (with_scale) {
      double peak = 0.0, model_peak = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        peak = std::max(peak, data.y[i]);
        model_peak = std::max(model_peak, model_value(m, data.t[i], g, gamma));
      }
      s.push_back(std::log(peak > 0.0 && model_peak > 0.0 ? peak / model_peak : 1.0));
    }
    return s;
  };
  if (opts.init) {
    starts.push_back(make_start(opts.init->first, opts.init->second));
  } else {
    // For each relative-coupling start, pick gamma by a coarse scan against the
    // window length before handing over to Levenberg-Marquardt.
    const double window = std::max(data.t.back() - data.t.front(), 1e-30);
    for (double gt : {0.2, 0.5, 1.0, 1.5, 2.0}) {
      double best_gamma = 1.0 / window, best_cost = std::numeric_limits<double>::infinity();
      for (int k = 0; k <= 48; ++k) {
        const double gamma = std::pow(10.0, -0.5 + 3.5 * k / 48.0) / window;
        const double c = sum_sq(residuals(make_start(gt * gamma / 4.0, gamma)));
        if (c < best_cost) {
          best_cost = c;
          best_gamma = gamma;
        }
      }
      starts.push_back(make_start(gt * best_gamma / 4.0, best_gamma));
    }
  }

  LmOutcome best;
  best.cost = std::numeric_limits<double>::infinity();
  for (const auto& s : starts) {
    LmOutcome o = levenberg_marquardt(f, s, opts.max_iterations);
    if (o.cost < best.cost) best = std::move(o);
  }

  FitResult res;
  res.g_hat = std::exp(best.x[0]);
  res.gamma_hat = std::exp(best.x[1]);
  res.scale = with_scale ? std::exp(best.x[2]) : 1.0;
  res.iterations = best.iterations;
  res.converged = best.converged;
  const auto [e1, e2] = eig2x2(dimer_hamiltonian_1exc({res.gamma_hat, res.g_hat}));
  res.eps1 = e1;
  res.eps2 = e2;

  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = res.scale * model_value(m, data.t[i], res.g_hat, res.gamma_hat) - data.y[i];
    rss += d * d;
  }
  res.residual_rms = std::sqrt(rss / static_cast<double>(n));

  // Covariance: (J^T J)^-1 in log coordinates times reduced chi-square, mapped
  // to (g, gamma) by the diagonal Jacobian of exp.
  const std::vector<double> r = f(best.x);
  const auto jac = jacobian(f, best.x, r);
  const auto a = normal_matrix(jac);
  const std::size_t np = best.x.size();
  const double dof = n > np ? static_cast<double>(n - np) : 1.0;
  const double s2 = std::max(best.cost / dof, std::numeric_limits<double>::min());
  bool singular = false;
  std::array<std::array<double, 2>, 2> cov{};
  for (std::size_t j = 0; j < 2; ++j) {
    std::vector<double> e(np, 0.0);
    e[j] = 1.0;
    if (!solve_small(a, e)) {
      singular = true;
      break;
    }
    for (std::size_t i = 0; i < 2; ++i) cov[i][j] = e[i] * s2;
  }
  const double inf = std::numeric_limits<double>::infinity();
  const double scale_g[2] = {res.g_hat, res.gamma_hat};
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) res.covariance[i][j] = singular ? inf : cov[i][j] * scale_g[i] * scale_g[j];
  }
  const double rel_sd_gamma = singular ? inf : std::sqrt(std::abs(cov[1][1]));
  res.degenerate = singular || res.g_hat < 1e-3 * res.gamma_hat || rel_sd_gamma > 1.0;
  return res;
}

Prepared prepare(const TimeTrace& trace, bool keep_negative_times) {
  trace.validate();
  Prepared d;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (!keep_negative_times && trace.times[i] < 0.0) continue;
    d.t.push_back(trace.times[i]);
    d.y.push_back(trace.values[i].real());
  }
  if (d.t.size() < 8) throw std::invalid_argument("fit: need at least 8 samples at t >= 0");
  d.w.assign(d.t.size(), 1.0);
  return d;
}

}  // namespace

FitResult fit_population(const TimeTrace& trace, const FitOptions& opts) {
  Prepared d = prepare(trace, false);
  for (double y : d.y) {
    if (y < 0.0 || y > 1.0) throw std::invalid_argument("fit_population: populations must lie in [0, 1]");
  }
  if (trace.meta.shots > 0) {
    const double n = static_cast<double>(trace.meta.shots);
    for (std::size_t i = 0; i < d.y.size(); ++i) {
      // Binomial variance of the estimate, floored at one count so P = 0 or 1 stays finite.
      const double var = std::max(d.y[i] * (1.0 - d.y[i]), 1.0 / n) / n;
      d.w[i] = 1.0 / std::sqrt(var);
    }
  }
  return fit_model(Model::population, d, opts);
}

FitResult fit_coherence(const TimeTrace& trace, const FitOptions& opts) {
  Prepared d = prepare(trace, false);
  if (opts.rayleigh_debias) {
    // |signal + complex noise|^2 averages to A^2 + 2 sigma^2; pre-trigger samples give 2 sigma^2.
    double floor2 = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < trace.size(); ++i) {
      if (trace.times[i] < 0.0) {
        floor2 += std::norm(trace.values[i]);
        ++count;
      }
    }
    if (count > 0) {
      floor2 /= static_cast<double>(count);
      for (double& y : d.y) y = std::sqrt(std::max(y * y - floor2, 0.0));
    }
  }
  double peak = 0.0;
  for (double y : d.y) peak = std::max(peak, std::abs(y));
  if (peak == 0.0) {
    FitResult res;
    res.degenerate = true;
    res.converged = true;
    const double window = d.t.back() - d.t.front();
    res.gamma_hat = window > 0.0 ? 1.0 / window : 1.0;
    const auto [e1, e2] = eig2x2(dimer_hamiltonian_1exc({res.gamma_hat, 0.0}));
    res.eps1 = e1;
    res.eps2 = e2;
    const double inf = std::numeric_limits<double>::infinity();
    res.covariance = {{{inf, inf}, {inf, inf}}};
    return res;
  }
  return fit_model(Model::coherence, d, opts);
}

EigenRow eigen_row(double g, double gamma) {
  EigenRow row;
  row.g_tilde = 4.0 * g / gamma;
  const auto [e1, e2] = eig2x2(dimer_hamiltonian_1exc({gamma, g}));
  row.eps1 = e1;
  row.eps2 = e2;
  row.eps1_doubled = 2.0 * e1;
  row.eps2_doubled = 2.0 * e2;
  return row;
}

std::vector<EigenRow> eigenenergy_trace(std::span<const FitResult> fits) {
  std::vector<EigenRow> rows;
  rows.reserve(fits.size());
  for (const auto& f : fits) {
    if (!f.converged) throw std::invalid_argument("eigenenergy_trace: fit did not converge");
    rows.push_back(eigen_row(f.g_hat, f.gamma_hat));
  }
  return rows;
}

std::vector<Dip> find_dips(const Spectrum& spec, double threshold) {
  const std::vector<double> m = spec.magnitude();
  std::vector<Dip> dips;
  for (std::size_t i = 1; i + 1 < m.size(); ++i) {
    if (!(m[i] < threshold && m[i] <= m[i - 1] && m[i] < m[i + 1])) continue;
    const double h = spec.detunings[i + 1] - spec.detunings[i];
    const double denom = m[i - 1] - 2.0 * m[i] + m[i + 1];
    double offset = 0.0, depth = m[i];
    if (denom > 0.0) {
      offset = 0.5 * (m[i - 1] - m[i + 1]) / denom;
      depth = m[i] - 0.25 * (m[i - 1] - m[i + 1]) * offset;
    }
    dips.push_back({spec.detunings[i] + offset * h, depth});
  }
  std::sort(dips.begin(), dips.end(), [](const Dip& a, const Dip& b) { return a.depth < b.depth; });
  return dips;
}

double peak_splitting(const Spectrum& spec) {
  const std::vector<Dip> dips = find_dips(spec, 0.9);
  if (dips.size() < 2) throw std::runtime_error("peak_splitting: fewer than two transmission dips below 0.9");
  return std::abs(dips[0].position - dips[1].position);
}

}  // namespace ptdimer
