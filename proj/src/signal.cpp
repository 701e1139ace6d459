#include "ptdimer/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ptdimer {

namespace {

// Half-sample symmetric reflection of an arbitrary index into [0, n).
std::size_t reflect(long i, long n) {
  const long period = 2 * n;
  long k = i % period;
  if (k < 0) k += period;
  return static_cast<std::size_t>(k < n ? k : period - 1 - k);
}

double smooth_at(std::span<const double> v, std::size_t i, double width) {
  const long n = static_cast<long>(v.size());
  const long radius = static_cast<long>(std::ceil(4.0 * width));
  double acc = 0.0, mass = 0.0;
  for (long k = -radius; k <= radius; ++k) {
    const double w = std::exp(-0.5 * (k / width) * (k / width));
    acc += w * v[reflect(static_cast<long>(i) + k, n)];
    mass += w;
  }
  return acc / mass;
}

void check_field(const Field2D& f, std::size_t rows, std::size_t cols, const char* who) {
  if (f.rows != rows || f.cols != cols) throw std::invalid_argument(std::string(who) + ": field shape does not match grids");
}

double uniform_step(std::span<const double> grid, const char* who) {
  if (grid.size() < 3) throw std::invalid_argument(std::string(who) + ": need at least 3 grid points");
  const double h = (grid.back() - grid.front()) / static_cast<double>(grid.size() - 1);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (std::abs(grid[i] - grid[i - 1] - h) > 1e-6 * std::abs(h)) {
      throw std::invalid_argument(std::string(who) + ": grid is not uniform");
    }
  }
  return h;
}

}  // namespace

std::vector<double> gaussian_smooth(std::span<const double> values, double width) {
  if (values.empty()) throw std::invalid_argument("gaussian_smooth: empty input");
  if (!(width > 0.0)) throw std::invalid_argument("gaussian_smooth: width must be positive");
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = smooth_at(values, i, width);
  return out;
}

std::vector<double> gaussian_smooth(std::span<const double> values, std::span<const double> widths) {
  if (values.empty()) throw std::invalid_argument("gaussian_smooth: empty input");
  if (widths.size() != values.size()) throw std::invalid_argument("gaussian_smooth: one width per sample required");
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(widths[i] > 0.0)) throw std::invalid_argument("gaussian_smooth: width must be positive");
    out[i] = smooth_at(values, i, widths[i]);
  }
  return out;
}

std::vector<double> smoothing_widths(std::span<const double> g_tilde, const SmoothingConfig& cfg) {
  if (!(cfg.min_width > 0.0) || cfg.max_width < cfg.min_width) throw std::invalid_argument("smoothing_widths: bad bounds");
  std::vector<double> w(g_tilde.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double g = std::abs(g_tilde[i]);
    w[i] = g == 0.0 ? cfg.max_width : std::clamp(cfg.c / g, cfg.min_width, cfg.max_width);
  }
  return w;
}

Field2D smooth_along_g(const Field2D& field, std::span<const double> g_tilde, const SmoothingConfig& cfg) {
  if (field.rows != g_tilde.size()) throw std::invalid_argument("smooth_along_g: row count differs from g grid");
  if (!cfg.enabled) return field;
  const std::vector<double> widths = smoothing_widths(g_tilde, cfg);
  Field2D out = field;
  for (std::size_t c = 0; c < field.cols; ++c) out.set_column(c, gaussian_smooth(field.column(c), widths));
  return out;
}

// ------------------------------------------------------------- Butterworth

ButterworthLowpass::ButterworthLowpass(double cutoff_hz, double sample_rate_hz, int order)
    : sample_rate_(sample_rate_hz), order_(order) {
  if (order < 1) throw std::invalid_argument("ButterworthLowpass: order must be at least 1");
  if (!(sample_rate_hz > 0.0)) throw std::invalid_argument("ButterworthLowpass: sample rate must be positive");
  if (!(cutoff_hz > 0.0) || cutoff_hz >= 0.5 * sample_rate_hz) {
    throw std::invalid_argument("ButterworthLowpass: cutoff must lie strictly between 0 and Nyquist");
  }
  const double k = 2.0 * sample_rate_hz;
  const double wa = k * std::tan(std::numbers::pi * cutoff_hz / sample_rate_hz);
  for (int i = 0; i < order / 2; ++i) {
    const double theta = std::numbers::pi * (2.0 * i + order + 1) / (2.0 * order);
    const double re = wa * std::cos(theta);  // negative
    const double a0 = k * k - 2.0 * re * k + wa * wa;
    const double g = wa * wa / a0;
    sections_.push_back({g, 2.0 * g, g, (2.0 * wa * wa - 2.0 * k * k) / a0, (k * k + 2.0 * re * k + wa * wa) / a0});
  }
  if (order % 2 == 1) {
    const double a0 = k + wa;
    sections_.push_back({wa / a0, wa / a0, 0.0, (wa - k) / a0, 0.0});
  }
}

std::complex<double> ButterworthLowpass::response(double f_hz) const {
  const std::complex<double> zi = std::polar(1.0, -2.0 * std::numbers::pi * f_hz / sample_rate_);
  std::complex<double> h = 1.0;
  for (const auto& s : sections_) {
    h *= (s.b0 + s.b1 * zi + s.b2 * zi * zi) / (1.0 + s.a1 * zi + s.a2 * zi * zi);
  }
  return h;
}

std::vector<double> ButterworthLowpass::run(std::span<const double> x, bool steady_start) const {
  std::vector<double> y(x.begin(), x.end());
  if (y.empty()) return y;
  double level = y.front();
  for (const auto& s : sections_) {
    double z1 = 0.0, z2 = 0.0;
    if (steady_start) {
      // Transposed direct form II state that a constant input `level` would settle into.
      const double dc = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
      z2 = (s.b2 - s.a2 * dc) * level;
      z1 = (s.b1 - s.a1 * dc) * level + z2;
      level *= dc;
    }
    for (double& v : y) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
  return y;
}

std::vector<double> ButterworthLowpass::filter(std::span<const double> x) const { return run(x, false); }

std::vector<double> ButterworthLowpass::filtfilt(std::span<const double> x) const {
  const std::size_t n = x.size();
  if (n == 0) return {};
  const std::size_t pad = std::min<std::size_t>(3 * (2 * sections_.size() + 1), n - 1);
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  std::vector<double> fwd = run(ext, true);
  std::reverse(fwd.begin(), fwd.end());
  std::vector<double> back = run(fwd, true);
  std::reverse(back.begin(), back.end());
  return {back.begin() + static_cast<std::ptrdiff_t>(pad), back.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

TimeTrace butterworth_lowpass(const TimeTrace& trace, double cutoff_hz, int order) {
  trace.validate();
  if (trace.size() < 2) throw std::invalid_argument("butterworth_lowpass: need at least two samples");
  const double dt = trace.times[1] - trace.times[0];
  const ButterworthLowpass lp(cutoff_hz, 1.0 / dt, order);
  std::vector<double> re(trace.size()), im(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    re[i] = trace.values[i].real();
    im[i] = trace.values[i].imag();
  }
  re = lp.filtfilt(re);
  im = lp.filtfilt(im);
  TimeTrace out = trace;
  for (std::size_t i = 0; i < trace.size(); ++i) out.values[i] = {re[i], im[i]};
  return out;
}

// --------------------------------------------------------------- derivative

std::vector<double> d_dg(std::span<const double> values, double h) {
  const std::size_t n = values.size();
  if (n < 3) throw std::invalid_argument("d_dg: need at least 3 grid points");
  if (!(h != 0.0)) throw std::invalid_argument("d_dg: zero grid spacing");
  std::vector<double> d(n);
  d[0] = (values[1] - values[0]) / h;
  d[n - 1] = (values[n - 1] - values[n - 2]) / h;
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (values[i + 1] - values[i - 1]) / (2.0 * h);
  return d;
}

Field2D d_dg(const Field2D& field, double h) {
  Field2D out(field.rows, field.cols);
  for (std::size_t c = 0; c < field.cols; ++c) out.set_column(c, d_dg(field.column(c), h));
  return out;
}

// ------------------------------------------------------------- sensitivity

double SensitivityCurve::max() const { return eta.empty() ? 0.0 : *std::max_element(eta.begin(), eta.end()); }

std::size_t SensitivityCurve::argmax_index() const {
  return static_cast<std::size_t>(std::max_element(eta.begin(), eta.end()) - eta.begin());
}

SensitivityCurve SensitivityCurve::normalized() const {
  SensitivityCurve out = *this;
  const double m = max();
  if (m > 0.0) {
    for (double& e : out.eta) e /= m;
  }
  return out;
}

std::vector<std::size_t> local_maxima(std::span<const double> v, double tolerance) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    // Plateaus count once, at their left edge.
    std::size_t j = i;
    while (j + 1 < v.size() && v[j + 1] == v[i]) ++j;
    if (j + 1 < v.size() && v[i] > v[i - 1] + tolerance && v[i] > v[j + 1] + tolerance) out.push_back(i);
    i = j;
  }
  return out;
}

bool has_local_max_in(const SensitivityCurve& c, double lo, double hi, double tolerance) {
  for (std::size_t i : local_maxima(c.eta, tolerance)) {
    if (c.g_tilde[i] > lo && c.g_tilde[i] < hi) return true;
  }
  return false;
}

SensitivityCurve sensitivity_cw(const Field2D& magnitude, std::span<const double> g_tilde,
                                std::span<const double> detunings, std::span<const double> sigma,
                                const SmoothingConfig& smoothing) {
  check_field(magnitude, g_tilde.size(), detunings.size(), "sensitivity_cw");
  if (sigma.size() != g_tilde.size()) throw std::invalid_argument("sensitivity_cw: one noise value per g_tilde required");
  for (double s : sigma) {
    if (!(s > 0.0)) throw std::invalid_argument("sensitivity_cw: noise must be positive");
  }
  const double h = uniform_step(g_tilde, "sensitivity_cw");
  const Field2D deriv = d_dg(smooth_along_g(magnitude, g_tilde, smoothing), h);

  SensitivityCurve out;
  out.g_tilde.assign(g_tilde.begin(), g_tilde.end());
  out.eta.resize(g_tilde.size());
  out.argmax.resize(g_tilde.size());
  out.observable = "|S21|";
  out.axis = "detuning";
  out.noise_model = "constant";
  for (std::size_t r = 0; r < deriv.rows; ++r) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < deriv.cols; ++c) {
      if (std::abs(deriv(r, c)) > std::abs(deriv(r, best))) best = c;
    }
    out.eta[r] = std::abs(deriv(r, best)) / sigma[r];
    out.argmax[r] = detunings[best];
  }
  return out;
}

double PopulationNoise::sigma(double p) const {
  if (shots == 0) throw std::invalid_argument("PopulationNoise: shots must be positive");
  const double q = std::clamp(readout_error + (1.0 - 2.0 * readout_error) * p, 0.0, 1.0);
  return std::sqrt(q * (1.0 - q) / static_cast<double>(shots));
}

SensitivityCurve sensitivity_q1(const Field2D& population, std::span<const double> g_tilde,
                                std::span<const double> times, const PopulationNoise& noise,
                                const SmoothingConfig& smoothing) {
  check_field(population, g_tilde.size(), times.size(), "sensitivity_q1");
  const double h = uniform_step(g_tilde, "sensitivity_q1");
  const Field2D smooth = smooth_along_g(population, g_tilde, smoothing);
  const Field2D deriv = d_dg(smooth, h);

  SensitivityCurve out;
  out.g_tilde.assign(g_tilde.begin(), g_tilde.end());
  out.eta.assign(g_tilde.size(), 0.0);
  out.argmax.assign(g_tilde.size(), 0.0);
  out.observable = "P_e(Q1)";
  out.axis = "time";
  out.noise_model = "binomial";
  for (std::size_t r = 0; r < deriv.rows; ++r) {
    for (std::size_t c = 0; c < deriv.cols; ++c) {
      const double s = noise.sigma(smooth(r, c));
      if (!(s > 0.0)) continue;  // noiseless readout of a definite outcome carries no slope either
      const double eta = std::abs(deriv(r, c)) / s;
      if (eta > out.eta[r]) {
        out.eta[r] = eta;
        out.argmax[r] = times[c];
      }
    }
  }
  return out;
}

SensitivityCurve sensitivity_q2(const Field2D& coherence, std::span<const double> g_tilde,
                                std::span<const double> times, double t_final, double sigma,
                                const SmoothingConfig& smoothing) {
  check_field(coherence, g_tilde.size(), times.size(), "sensitivity_q2");
  if (!(sigma > 0.0)) throw std::invalid_argument("sensitivity_q2: noise must be positive");
  if (times.empty() || times.front() > 0.0 || times.back() < t_final * (1.0 - 1e-9)) {
    throw std::invalid_argument("sensitivity_q2: traces must cover [0, t_final]");
  }
  const double h = uniform_step(g_tilde, "sensitivity_q2");
  const Field2D deriv = d_dg(smooth_along_g(coherence, g_tilde, smoothing), h);

  SensitivityCurve out;
  out.g_tilde.assign(g_tilde.begin(), g_tilde.end());
  out.eta.assign(g_tilde.size(), 0.0);
  out.observable = "|s2|";
  out.axis = "integrated";
  out.noise_model = "constant";
  const double t_end = t_final * (1.0 + 1e-9);
  for (std::size_t r = 0; r < deriv.rows; ++r) {
    double acc = 0.0;
    for (std::size_t c = 1; c < deriv.cols && times[c] <= t_end; ++c) {
      if (times[c - 1] < 0.0) continue;
      acc += 0.5 * (times[c] - times[c - 1]) * (std::abs(deriv(r, c)) + std::abs(deriv(r, c - 1)));
    }
    out.eta[r] = acc / sigma;
  }
  return out;
}

}  // namespace ptdimer
