#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "ptdimer/coupler.hpp"
#include "ptdimer/model.hpp"
#include "ptdimer/trace.hpp"

namespace ptdimer {

/// Thrown when a density matrix or trajectory breaks trace, Hermiticity or
/// positivity bounds.
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ------------------------------------------------------------ closed forms

/// Q1 excited population after Q1 starts excited. Stable through Gamma = 0.
double q1_population_analytic(double t, const DimerParams& p);
/// |<sigma_2^->| after Q1 starts in (|g> + |e>)/sqrt 2. Stable through Gamma = 0.
double q2_coherence_analytic(double t, const DimerParams& p);

// ------------------------------------------------------ non-Hermitian kets

struct KetTrajectory {
  std::vector<double> times;
  std::vector<ComplexVector> states;
  TimeTrace m0;  // <psi|M0|psi>, only for 4-dimensional states
  TimeTrace m1;  // <psi|M1|psi>, only for 4-dimensional states
};

/// psi(t) = exp(-i H t) psi0 on the given times (t >= 0, increasing).
KetTrajectory evolve_nonhermitian(const ComplexMatrix& h, const ComplexVector& psi0, std::span<const double> times);

/// Unnormalized <psi|op|psi>.
complex expectation(const ComplexMatrix& op, const ComplexVector& psi);

// ----------------------------------------------------------------- Lindblad

class DensityMatrix {
 public:
  explicit DensityMatrix(ComplexMatrix rho);
  static DensityMatrix pure(const ComplexVector& psi);
  /// Inverse of vectorized(): column-stacked entries.
  static DensityMatrix from_vectorized(const ComplexVector& v, std::size_t dim);

  const ComplexMatrix& matrix() const { return rho_; }
  std::size_t dim() const { return rho_.rows(); }
  complex trace() const { return rho_.trace(); }
  double hermiticity_error() const { return rho_.hermiticity_error(); }
  /// Smallest eigenvalue of the Hermitian part.
  double min_eigenvalue() const;
  /// tr(op rho).
  complex expectation(const ComplexMatrix& op) const;
  ComplexVector vectorized() const;

  /// Throws InvariantViolation when |tr - 1|, Hermiticity or negativity exceed the bounds.
  void check(double trace_tol = 1e-9, double hermitian_tol = 1e-10, double positivity_tol = 1e-8) const;

 private:
  ComplexMatrix rho_;
};

struct CollapseOp {
  double rate = 0.0;
  ComplexMatrix op;
};

/// Column-stacked Liouvillian, vec(A rho B) = (B^T kron A) vec(rho).
ComplexMatrix liouvillian(const ComplexMatrix& h, const std::vector<CollapseOp>& collapse);

/// rho(t) on the given times (t >= 0, increasing). Rejects non-Hermitian h and
/// negative rates.
std::vector<DensityMatrix> lindblad_evolve(const ComplexMatrix& h, const std::vector<CollapseOp>& collapse,
                                           const DensityMatrix& rho0, std::span<const double> times);

/// Steady state with more than one zero mode.
class DegenerateSteadyState : public std::runtime_error {
 public:
  DegenerateSteadyState(const std::string& what, std::size_t kernel_dim)
      : std::runtime_error(what), kernel_dim_(kernel_dim) {}
  std::size_t kernel_dim() const { return kernel_dim_; }

 private:
  std::size_t kernel_dim_;
};

/// Solves L rho = 0 with tr rho = 1 in place of one row. Checks the kernel is
/// one-dimensional and ||L rho|| <= 1e-9 ||L||.
DensityMatrix steady_state(const ComplexMatrix& h, const std::vector<CollapseOp>& collapse);

/// Decay sqrt(gamma) sigma_2^- of the dimer (Q2 = site 1 of 2).
std::vector<CollapseOp> dimer_collapse(const DimerParams& p);
/// Decay of Q2 (site 2 of 3) into the waveguide.
std::vector<CollapseOp> three_mode_collapse(const ThreeModeParams& p);

// ------------------------------------------------------------ input-output

/// Emitted field sqrt(gamma / 2) <sigma_2^->.
TimeTrace emission_amplitude(const TimeTrace& coherence, const DimerParams& p);

/// S21 = 1 - i gamma <sigma_2^->_ss / Omega_p, so a lone resonant emitter
/// extinguishes the probe. `reference_shift` moves the detuning origin to
/// omega1 + reference_shift; the solver sees delta_p - reference_shift.
Spectrum transmission_spectrum(const ThreeModeParams& p, double Omega_p, std::span<const double> detunings,
                               double reference_shift = 0.0, double g_tilde = 0.0);
/// Same for the two-mode dimer with the drive on Q2.
Spectrum transmission_spectrum(const DimerParams& p, double Omega_p, std::span<const double> detunings);

// ---------------------------------------------------------- emission sweep

struct EmissionSweepOptions {
  bool filter = true;
  double cutoff_hz = 80e6;
  int order = 4;
};

struct EmissionSweep {
  std::vector<double> g_tilde;
  std::vector<double> times;
  std::vector<double> omega_c;  // coupler frequency used for each row
  Field2D raw;                  // |<sigma_2^->|, rows g_tilde, columns time
  Field2D filtered;             // raw after the zero-phase low-pass (equal to raw when disabled)
};

/// Three-mode Lindblad emission maps: for each g_tilde the coupler is parked at
/// omega_c_for_g(g_tilde gamma / 4) and Q1 starts in (|g> + |e>)/sqrt 2.
EmissionSweep simulate_q2_emission_sweep(const CouplerMap& map, std::span<const double> g_tilde,
                                         std::span<const double> times, const EmissionSweepOptions& opts = {});

}  // namespace ptdimer
