#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "ptdimer/model.hpp"

namespace ptdimer {

/// Coupler tuned onto (or opposite to) the qubit frequency: 1/delta or 1/Sigma diverges.
class SingularDetuningError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Effective qubit-qubit exchange through the coupler,
///   g1c_ref g2c_ref (omega_c / omega_c_ref) (1/delta - 1/Sigma) + g12.
/// The omega_c / omega_c_ref factor is dropped when p.scale_couplings is off.
double g_eff(const ThreeModeParams& p, double omega_c);

/// Dispersive shift of qubit j (0 = Q1, 1 = Q2), g_jc^2 (1/delta - 1/Sigma).
/// `scaled` applies the same omega_c / omega_c_ref factor as g_eff.
double lamb_shift(const ThreeModeParams& p, double omega_c, std::size_t j, bool scaled = true);

/// Inverse calibration g -> omega_c on the downward-tuning branch
/// (omega_lo, omega_zero], where omega_zero is the zero crossing of g_eff next to
/// the reference point and omega_lo is where max |g_jc / delta| reaches
/// `dispersive_limit`. |g_eff| falls strictly monotonically across the branch.
class CouplerMap {
 public:
  explicit CouplerMap(ThreeModeParams params, double dispersive_limit = 0.2);

  const ThreeModeParams& params() const { return params_; }
  double branch_low() const { return lo_; }
  double branch_high() const { return hi_; }
  /// omega_c where g_eff changes sign (the idle point).
  double zero_crossing() const { return hi_; }
  /// Largest |g_eff| reachable on the branch.
  double max_abs_g() const { return max_abs_g_; }

  double g_eff(double omega_c) const { return ptdimer::g_eff(params_, omega_c); }

  /// omega_c with |g_eff(omega_c)| = |g_target|, bisected to well below 2 pi * 1 Hz.
  /// Throws std::out_of_range when |g_target| exceeds max_abs_g().
  double omega_c_for_g(double g_target) const;

  /// Copy of the parameters with the coupler parked at omega_c.
  ThreeModeParams at(double omega_c) const;
  /// Copy of the parameters with the coupler parked for |g_eff| = |g|.
  ThreeModeParams at_g(double g) const { return at(omega_c_for_g(g)); }

 private:
  ThreeModeParams params_;
  double lo_ = 0.0;
  double hi_ = 0.0;
  double max_abs_g_ = 0.0;
};

struct CalibrationRow {
  double omega_c = 0.0;
  double g_eff = 0.0;
  double lamb1 = 0.0;
  double lamb2 = 0.0;
};

/// `count` evenly spaced points across the branch, low end first.
std::vector<CalibrationRow> calibration_table(const CouplerMap& map, std::size_t count, bool scaled_lamb = true);

struct Splitting {
  double value = 0.0;       // minimum separation of the two qubit-like levels, rad/s
  double q2_detuning = 0.0;  // omega2 - omega1 at which the minimum sits
};

/// Minimum separation of the two qubit-like single-excitation levels of the 8x8
/// model, minimized over the Q2 frequency. `lab_frame` diagonalizes the
/// non-RWA lab Hamiltonian instead of the rotating-frame one.
Splitting min_qubit_splitting(const ThreeModeParams& p, bool lab_frame = false);

/// Energies (ascending) of the two eigenstates with the most weight on
/// |Q1 excited> and |Q2 excited>, measured from the dressed ground state.
std::pair<double, double> qubit_like_levels(const ComplexMatrix& h);

/// Rotating-frame energy of the eigenstate with the most weight on |Q_j excited>
/// (j = 0 for Q1, 1 for Q2), relative to the dressed ground state. Adding it to
/// omega1 gives the dressed qubit frequency.
double dressed_qubit_shift(const ThreeModeParams& p, std::size_t j);

}  // namespace ptdimer
