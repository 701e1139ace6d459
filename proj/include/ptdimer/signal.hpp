#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ptdimer/trace.hpp"

namespace ptdimer {

/// Gaussian smoothing along one axis with reflective ("d c b a | a b c d") edges.
/// The kernel spans +-ceil(4 width) samples and is normalized to unit mass.
std::vector<double> gaussian_smooth(std::span<const double> values, double width);
/// Same, with a separate kernel width for every output sample.
std::vector<double> gaussian_smooth(std::span<const double> values, std::span<const double> widths);

struct SmoothingConfig {
  bool enabled = true;
  double c = 1.0;  // width = c / g_tilde samples
  double min_width = 0.5;
  double max_width = 10.0;
};

/// c / |g_tilde| clamped to [min_width, max_width]; g_tilde = 0 takes max_width.
std::vector<double> smoothing_widths(std::span<const double> g_tilde, const SmoothingConfig& cfg);

/// Smooths every column of a (g_tilde row, axis column) field along g_tilde.
Field2D smooth_along_g(const Field2D& field, std::span<const double> g_tilde, const SmoothingConfig& cfg);

/// Second-order sections of a digital Butterworth low-pass (bilinear transform,
/// cutoff prewarped). Each row holds b0 b1 b2 a1 a2 with a0 = 1.
struct Biquad {
  double b0, b1, b2, a1, a2;
};

class ButterworthLowpass {
 public:
  /// Throws std::invalid_argument unless 0 < cutoff_hz < sample_rate_hz / 2.
  ButterworthLowpass(double cutoff_hz, double sample_rate_hz, int order = 4);

  const std::vector<Biquad>& sections() const { return sections_; }
  int order() const { return order_; }

  /// Single causal pass, starting from rest.
  std::vector<double> filter(std::span<const double> x) const;
  /// Forward-backward pass with odd-extension padding and steady-state initial
  /// conditions. Zero phase, squared magnitude response.
  std::vector<double> filtfilt(std::span<const double> x) const;
  /// Complex single-pass response at frequency f_hz.
  std::complex<double> response(double f_hz) const;

 private:
  std::vector<double> run(std::span<const double> x, bool steady_start) const;

  std::vector<Biquad> sections_;
  double sample_rate_ = 0.0;
  int order_ = 0;
};

/// Zero-phase Butterworth low-pass of a trace. Real and imaginary parts are
/// filtered independently.
TimeTrace butterworth_lowpass(const TimeTrace& trace, double cutoff_hz, int order = 4);

/// Derivative on a uniform grid of spacing h: central differences inside,
/// first-order one-sided at the ends. Needs at least 3 points.
std::vector<double> d_dg(std::span<const double> values, double h);
/// d_dg applied down every column of a (g_tilde row, axis column) field.
Field2D d_dg(const Field2D& field, double h);

struct SensitivityCurve {
  std::vector<double> g_tilde;
  std::vector<double> eta;     // raw, in units of 1 / noise
  std::vector<double> argmax;  // optimal time (s) or detuning (rad/s); empty for integrated curves
  std::string observable;
  std::string axis;         // "time", "detuning" or "integrated"
  std::string noise_model;

  double max() const;
  std::size_t argmax_index() const;
  /// eta divided by its own maximum (left unchanged when the maximum is zero).
  SensitivityCurve normalized() const;
};

/// Indices of strict interior local maxima of v whose value exceeds both
/// neighbours by more than `tolerance`.
std::vector<std::size_t> local_maxima(std::span<const double> v, double tolerance = 0.0);

/// True when some interior sample with g_tilde in (lo, hi) is a local maximum.
bool has_local_max_in(const SensitivityCurve& c, double lo, double hi, double tolerance = 0.0);

/// Continuous-wave sensitivity: eta(g) = max over detuning of |d|S21|/dg| / sigma(g).
/// `magnitude` rows follow g_tilde, columns follow `detunings`.
SensitivityCurve sensitivity_cw(const Field2D& magnitude, std::span<const double> g_tilde,
                                std::span<const double> detunings, std::span<const double> sigma,
                                const SmoothingConfig& smoothing);

/// Q1 population noise: binomial standard error over `shots` of the measured
/// probability readout_error + (1 - 2 readout_error) P.
struct PopulationNoise {
  std::size_t shots = 10000;
  double readout_error = 0.05;

  double sigma(double p) const;
};

/// Pulsed Q1 sensitivity: eta(g) = max over t of |dP/dg| / sigma(t, g).
SensitivityCurve sensitivity_q1(const Field2D& population, std::span<const double> g_tilde,
                                std::span<const double> times, const PopulationNoise& noise,
                                const SmoothingConfig& smoothing);

/// Integrated emission sensitivity: (1/sigma) * trapezoid of |d|s2|/dg| over [0, t_f].
/// sigma is constant in g.
SensitivityCurve sensitivity_q2(const Field2D& coherence, std::span<const double> g_tilde,
                                std::span<const double> times, double t_final, double sigma,
                                const SmoothingConfig& smoothing);

}  // namespace ptdimer
