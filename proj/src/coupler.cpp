#include "ptdimer/coupler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ptdimer/units.hpp"

namespace ptdimer {

namespace {

// 1/delta - 1/Sigma = 2 omega_c / (omega^2 - omega_c^2).
double dispersive_factor(double omega, double omega_c) {
  const double delta = omega - omega_c, sigma = omega + omega_c;
  if (delta == 0.0 || sigma == 0.0) {
    std::ostringstream msg;
    msg << "coupler at " << units::to_hz(omega_c) << " Hz is resonant with a qubit";
    throw SingularDetuningError(msg.str());
  }
  return 1.0 / delta - 1.0 / sigma;
}

double frequency_scale(const ThreeModeParams& p, double omega_c, bool scaled) {
  return scaled ? omega_c / p.omega_c_ref : 1.0;
}

// Basis indices of the three-mode register (Q1, coupler, Q2); bit value 0 = excited.
constexpr std::size_t kQ1Excited = 0b011;
constexpr std::size_t kQ2Excited = 0b110;
constexpr std::size_t kAllGround = 0b111;

}  // namespace

double g_eff(const ThreeModeParams& p, double omega_c) {
  const double f = dispersive_factor(p.omega1, omega_c);
  return p.g1c_ref * p.g2c_ref * frequency_scale(p, omega_c, p.scale_couplings) * f + p.g12;
}

double lamb_shift(const ThreeModeParams& p, double omega_c, std::size_t j, bool scaled) {
  if (j > 1) throw std::invalid_argument("lamb_shift: qubit index must be 0 or 1");
  const double omega = j == 0 ? p.omega1 : p.omega2;
  const double gref = j == 0 ? p.g1c_ref : p.g2c_ref;
  return gref * gref * frequency_scale(p, omega_c, scaled) * dispersive_factor(omega, omega_c);
}

CouplerMap::CouplerMap(ThreeModeParams params, double dispersive_limit) : params_(params) {
  params_.validate();
  if (!(dispersive_limit > 0.0)) throw std::invalid_argument("CouplerMap: dispersive limit must be positive");
  const double omega = params_.omega1;
  auto ratio = [&](double wc) {
    ThreeModeParams q = params_;
    q.omega_c = wc;
    return std::max(std::abs(q.g1c()), std::abs(q.g2c())) / std::abs(omega - wc);
  };

  // Lower end: the coupler approaches the qubits until the dispersive ratio hits
  // the limit. ratio falls monotonically with omega_c above omega.
  double a = omega * (1.0 + 1e-9), b = 10.0 * params_.omega_c_ref;
  if (ratio(b) > dispersive_limit) throw std::invalid_argument("CouplerMap: couplings too strong for a dispersive branch");
  for (int it = 0; it < 200 && b - a > 1e-6; ++it) {
    const double m = 0.5 * (a + b);
    (ratio(m) > dispersive_limit ? a : b) = m;
  }
  lo_ = b;

  // Upper end: first sign change of g_eff above the low end.
  const double g_lo = g_eff(lo_);
  double c = lo_, d = lo_;
  const double step = units::mhz(10.0);
  bool bracketed = false;
  while (d < 10.0 * params_.omega_c_ref) {
    d = c + step;
    if (std::signbit(g_eff(d)) != std::signbit(g_lo)) {
      bracketed = true;
      break;
    }
    c = d;
  }
  if (!bracketed) throw std::invalid_argument("CouplerMap: g_eff has no zero crossing above the dispersive limit");
  for (int it = 0; it < 200 && d - c > 1e-6; ++it) {
    const double m = 0.5 * (c + d);
    (std::signbit(g_eff(m)) == std::signbit(g_lo) ? c : d) = m;
  }
  hi_ = c;
  max_abs_g_ = std::abs(g_lo);

  // Strict monotonicity of |g_eff| on a 1 kHz grid.
  const double grid = units::khz(1.0);
  const auto n = static_cast<std::size_t>(std::ceil((hi_ - lo_) / grid));
  double prev = std::abs(g_eff(lo_));
  for (std::size_t k = 1; k <= n; ++k) {
    const double wc = std::min(hi_, lo_ + static_cast<double>(k) * grid);
    const double cur = std::abs(g_eff(wc));
    if (!(cur < prev)) {
      std::ostringstream msg;
      msg << "CouplerMap: |g_eff| not monotone near " << units::to_hz(wc) << " Hz";
      throw std::invalid_argument(msg.str());
    }
    prev = cur;
  }
}

double CouplerMap::omega_c_for_g(double g_target) const {
  const double target = std::abs(g_target);
  if (!std::isfinite(target) || target > max_abs_g_) {
    std::ostringstream msg;
    msg << "omega_c_for_g: |g| = " << units::to_hz(target) << " Hz exceeds the branch maximum "
        << units::to_hz(max_abs_g_) << " Hz";
    throw std::out_of_range(msg.str());
  }
  if (target == 0.0) return hi_;
  double a = lo_, b = hi_;  // |g_eff(a)| >= target >= |g_eff(b)|
  for (int it = 0; it < 200 && b - a > 1e-7; ++it) {
    const double m = 0.5 * (a + b);
    (std::abs(g_eff(m)) > target ? a : b) = m;
  }
  return 0.5 * (a + b);
}

ThreeModeParams CouplerMap::at(double omega_c) const {
  ThreeModeParams q = params_;
  q.omega_c = omega_c;
  return q;
}

std::vector<CalibrationRow> calibration_table(const CouplerMap& map, std::size_t count, bool scaled_lamb) {
  if (count < 2) throw std::invalid_argument("calibration_table: need at least two rows");
  std::vector<CalibrationRow> rows(count);
  const double lo = map.branch_low(), hi = map.branch_high();
  for (std::size_t k = 0; k < count; ++k) {
    const double wc = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count - 1);
    rows[k] = {wc, map.g_eff(wc), lamb_shift(map.params(), wc, 0, scaled_lamb),
               lamb_shift(map.params(), wc, 1, scaled_lamb)};
  }
  return rows;
}

std::pair<double, double> qubit_like_levels(const ComplexMatrix& h) {
  if (h.rows() != 8 || !h.is_square()) throw std::invalid_argument("qubit_like_levels: expected an 8x8 Hamiltonian");
  const HermitianEigen eig = eigh(h);
  auto weight = [&](std::size_t col, std::size_t basis) { return std::norm(eig.vectors(basis, col)); };
  std::size_t ground = 0;
  for (std::size_t k = 1; k < 8; ++k) {
    if (weight(k, kAllGround) > weight(ground, kAllGround)) ground = k;
  }
  std::vector<std::size_t> order(8);
  for (std::size_t k = 0; k < 8; ++k) order[k] = k;
  auto qubit_weight = [&](std::size_t k) { return weight(k, kQ1Excited) + weight(k, kQ2Excited); };
  std::partial_sort(order.begin(), order.begin() + 2, order.end(),
                    [&](std::size_t x, std::size_t y) { return qubit_weight(x) > qubit_weight(y); });
  double e1 = eig.values[order[0]] - eig.values[ground];
  double e2 = eig.values[order[1]] - eig.values[ground];
  if (e1 > e2) std::swap(e1, e2);
  return {e1, e2};
}

double dressed_qubit_shift(const ThreeModeParams& p, std::size_t j) {
  if (j > 1) throw std::invalid_argument("dressed_qubit_shift: qubit index must be 0 or 1");
  const HermitianEigen eig = eigh(three_mode_hamiltonian(p));
  const std::size_t basis = j == 0 ? kQ1Excited : kQ2Excited;
  std::size_t ground = 0, level = 0;
  for (std::size_t k = 1; k < 8; ++k) {
    if (std::norm(eig.vectors(kAllGround, k)) > std::norm(eig.vectors(kAllGround, ground))) ground = k;
    if (std::norm(eig.vectors(basis, k)) > std::norm(eig.vectors(basis, level))) level = k;
  }
  return eig.values[level] - eig.values[ground];
}

Splitting min_qubit_splitting(const ThreeModeParams& p, bool lab_frame) {
  auto split_at = [&](double detuning) {
    ThreeModeParams q = p;
    q.omega2 = p.omega1 + detuning;
    const auto [a, b] = qubit_like_levels(lab_frame ? three_mode_hamiltonian_lab(q) : three_mode_hamiltonian(q));
    return b - a;
  };
  // The dressed qubits cross near the difference of their dispersive shifts.
  const double center = lamb_shift(p, p.omega_c, 0, p.scale_couplings) - lamb_shift(p, p.omega_c, 1, p.scale_couplings);
  const double width = 8.0 * (std::abs(g_eff(p, p.omega_c)) + units::mhz(1.0));
  constexpr int kScan = 161;
  double best_x = center, best = std::numeric_limits<double>::infinity();
  const double h = 2.0 * width / (kScan - 1);
  for (int k = 0; k < kScan; ++k) {
    const double x = center - width + h * k;
    const double s = split_at(x);
    if (s < best) {
      best = s;
      best_x = x;
    }
  }
  // Golden-section refinement inside the neighbouring scan cells.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = best_x - h, b = best_x + h;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = split_at(c), fd = split_at(d);
  for (int it = 0; it < 100 && b - a > 1e-3; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = split_at(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = split_at(d);
    }
  }
  Splitting out;
  out.q2_detuning = 0.5 * (a + b);
  out.value = std::min({split_at(out.q2_detuning), fc, fd, best});
  return out;
}

}  // namespace ptdimer
