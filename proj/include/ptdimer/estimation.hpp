#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ptdimer/model.hpp"
#include "ptdimer/trace.hpp"

namespace ptdimer {

/// Independent RNG seed for task `index` of a run seeded with `seed` (splitmix64).
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index);

/// Q1 population estimated from `shots` projective readouts per sample.
TimeTrace synth_population(const DimerParams& p, std::span<const double> times, std::size_t shots, std::uint64_t seed);

/// Heterodyne-style |<sigma_2^->|: Gaussian noise of standard deviation sigma_add on
/// each quadrature, magnitude taken afterwards. Samples at t < 0 carry no signal.
TimeTrace synth_emission(const DimerParams& p, std::span<const double> times, double sigma_add, std::uint64_t seed);

struct FitOptions {
  std::optional<std::pair<double, double>> init;  // (g, gamma), rad/s
  int max_iterations = 200;
  /// Coherence only: fit an overall amplitude as well.
  bool free_scale = false;
  /// Coherence only: subtract the Rayleigh floor estimated from t < 0 samples.
  bool rayleigh_debias = false;
};

struct FitResult {
  double g_hat = 0.0;
  double gamma_hat = 0.0;
  complex eps1;  // eigenvalues of [[0, g], [g, -i gamma / 2]] at the fit
  complex eps2;
  double scale = 1.0;         // fitted amplitude (1 unless free_scale)
  double residual_rms = 0.0;  // unweighted RMS of model - data
  /// Gauss-Newton covariance of (g, gamma), scaled by the reduced chi-square.
  std::array<std::array<double, 2>, 2> covariance{};
  int iterations = 0;
  bool converged = false;
  /// g_hat collapsed toward zero: the model shape no longer pins gamma.
  bool degenerate = false;

  double g_tilde() const { return 4.0 * g_hat / gamma_hat; }
};

/// Least-squares fit of the Q1 population closed form. Samples are weighted by
/// binomial variance when trace.meta.shots > 0.
FitResult fit_population(const TimeTrace& trace, const FitOptions& opts = {});
/// Least-squares fit of the Q2 coherence closed form (unweighted).
FitResult fit_coherence(const TimeTrace& trace, const FitOptions& opts = {});

struct EigenRow {
  double g_tilde = 0.0;
  complex eps1, eps2;                  // matrix eigenvalues
  complex eps1_doubled, eps2_doubled;  // population-rate view, 2 eps
};

EigenRow eigen_row(double g, double gamma);
/// Eigenvalues at each fit. Throws std::invalid_argument on an unconverged fit.
std::vector<EigenRow> eigenenergy_trace(std::span<const FitResult> fits);

struct Dip {
  double position = 0.0;  // parabola-refined detuning
  double depth = 0.0;     // refined |S21| at the minimum
};

/// Local minima of |S21| below `threshold`, deepest first.
std::vector<Dip> find_dips(const Spectrum& spec, double threshold = 0.9);
/// Separation of the two deepest dips. Throws std::runtime_error with fewer than two.
double peak_splitting(const Spectrum& spec);

}  // namespace ptdimer
