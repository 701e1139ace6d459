#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ptdimer/linalg.hpp"

namespace ptdimer {

// Basis conventions
// -----------------
// Single site: index 0 = |1> (excited), index 1 = |0> (ground); sigma^- |1> = |0>.
// Multi-site: site 0 is the most significant factor of the Kronecker product.
// Two qubits (Q1, Q2) therefore enumerate {|11>, |01>, |10>, |00>} exactly as the
// literal 4x4 dimer matrices and M0/M1 observables are written, with the
// second label standing for Q1. Three modes are ordered (Q1, coupler, Q2).

/// Passive two-mode dimer: Q2 decays into the waveguide at gamma, Q1 is lossless.
struct DimerParams {
  double gamma = 0.0;  // rad/s
  double g = 0.0;      // rad/s

  DimerParams() = default;
  DimerParams(double gamma_, double g_);

  static DimerParams from_hz(double gamma_hz, double g_hz);
  static DimerParams from_g_tilde(double gamma, double g_tilde);

  /// 4 g / gamma; exactly 1 at the exceptional point.
  double g_tilde() const { return 4.0 * g / gamma; }
  /// 2 sqrt((gamma/4)^2 - g^2): real below the EP, imaginary above, zero at it.
  complex Gamma() const;
};

struct ThreeModeParams {
  double omega1 = 0.0;       // Q1, rad/s
  double omega2 = 0.0;       // Q2, rad/s
  double omega_c = 0.0;      // coupler, rad/s
  double omega_c_ref = 0.0;  // reference coupler frequency of the coupling fit
  double g12 = 0.0;
  double g1c_ref = 0.0;
  double g2c_ref = 0.0;
  double gamma = 0.0;
  /// Include the static second-order counter-rotating (Bloch-Siegert) correction
  /// in the rotating-frame Hamiltonian. Matches the 1/Sigma terms of g_eff.
  bool counter_rotating = true;
  /// Scale g1c, g2c with coupler frequency; off pins them at their reference values.
  bool scale_couplings = true;

  /// omega - omega_c, negative for a coupler parked above the qubits.
  double delta() const { return omega1 - omega_c; }
  double Sigma() const { return omega1 + omega_c; }
  /// Coupler couplings at the current omega_c; each scales as sqrt(omega_c / omega_c_ref)
  /// so that g1c * g2c carries the single omega_c / omega_c_ref factor of g_eff.
  double g1c() const;
  double g2c() const;

  /// Human-readable reasons the dispersive picture is questionable (empty if fine).
  std::vector<std::string> validity_warnings() const;
  /// Throws std::invalid_argument on non-physical values.
  void validate() const;

  /// Coupler fit presets: reference idle frequency, GHz.
  static constexpr double kFitReferenceGHz = 7.25;
  static constexpr double kMainTextReferenceGHz = 7.29;

  /// omega/2pi = 5 GHz qubits, gamma/2pi = 17 MHz and the coupler fit at the given
  /// reference frequency, with omega_c parked at the reference.
  static ThreeModeParams paper_default(double omega_c_ref_ghz = kFitReferenceGHz);
};

struct DriveParams {
  double delta_p = 0.0;  // omega - omega_p, rad/s
  double Omega_p = 0.0;  // drive Rabi rate, rad/s
};

/// Common dimer presets.
inline constexpr double kPaperGammaMHz = 17.0;
inline constexpr double kPaperQubitGHz = 5.0;

ComplexMatrix lowering_op(std::size_t site, std::size_t n_sites);
ComplexMatrix raising_op(std::size_t site, std::size_t n_sites);
ComplexMatrix sigma_z(std::size_t site, std::size_t n_sites);
ComplexMatrix sigma_x(std::size_t site, std::size_t n_sites);
ComplexMatrix number_op(std::size_t site, std::size_t n_sites);
ComplexMatrix total_excitation(std::size_t n_sites);

/// Full two-qubit non-Hermitian Hamiltonian in {|11>, |01>, |10>, |00>}.
ComplexMatrix dimer_hamiltonian_full(const DimerParams& p);
/// Hermitian coupling part of the dimer (used with a sqrt(gamma) sigma_2^- jump).
ComplexMatrix dimer_hamiltonian_hermitian(const DimerParams& p);
/// Single-excitation block [[0, g], [g, -i gamma/2]].
ComplexMatrix dimer_hamiltonian_1exc(const DimerParams& p);

/// Rotating-frame (at omega1) three-mode Hamiltonian, sites (Q1, coupler, Q2).
ComplexMatrix three_mode_hamiltonian(const ThreeModeParams& p);
/// Lab-frame three-mode Hamiltonian with full sigma_x sigma_x qubit-coupler terms.
/// Not excitation conserving; used as an independent diagonalization check.
ComplexMatrix three_mode_hamiltonian_lab(const ThreeModeParams& p);
/// Three-mode Hamiltonian in the probe frame with a coherent drive on Q2.
ComplexMatrix driven_hamiltonian(const ThreeModeParams& p, const DriveParams& d);
/// Dimer coupling Hamiltonian in the probe frame with a drive on Q2.
ComplexMatrix driven_dimer_hamiltonian(const DimerParams& p, const DriveParams& d);

struct Observables {
  ComplexMatrix M0;  // Q1 excited-population projector
  ComplexMatrix M1;  // Q2 coherence, sigma_2^-
};
Observables observables();

/// Q1 excited: (0, 1, 0, 0).
ComplexVector dimer_psi0();
/// Q1 in (|g> + |e>)/sqrt 2: (0, 1/sqrt 2, 0, 1/sqrt 2).
ComplexVector dimer_psi1();

/// Product state from per-site amplitudes (amp_excited, amp_ground).
ComplexVector product_state(const std::vector<std::pair<complex, complex>>& sites);

}  // namespace ptdimer
