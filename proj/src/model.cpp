#include "ptdimer/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ptdimer/units.hpp"

namespace ptdimer {

DimerParams::DimerParams(double gamma_, double g_) : gamma(gamma_), g(g_) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("DimerParams: gamma must be positive");
  if (!(g >= 0.0) || !std::isfinite(g)) throw std::invalid_argument("DimerParams: g must be non-negative");
}

DimerParams DimerParams::from_hz(double gamma_hz, double g_hz) { return {units::hz(gamma_hz), units::hz(g_hz)}; }

DimerParams DimerParams::from_g_tilde(double gamma, double g_tilde) { return {gamma, g_tilde * gamma / 4.0}; }

complex DimerParams::Gamma() const {
  const double q = gamma / 4.0;
  return 2.0 * std::sqrt(complex(q * q - g * g, 0.0));
}

double ThreeModeParams::g1c() const { return scale_couplings ? g1c_ref * std::sqrt(omega_c / omega_c_ref) : g1c_ref; }
double ThreeModeParams::g2c() const { return scale_couplings ? g2c_ref * std::sqrt(omega_c / omega_c_ref) : g2c_ref; }

std::vector<std::string> ThreeModeParams::validity_warnings() const {
  std::vector<std::string> out;
  const double d = std::abs(delta());
  if (omega1 != omega2) out.emplace_back("qubits are not resonant (omega1 != omega2)");
  for (auto [name, gc] : {std::pair{"g1c", g1c()}, std::pair{"g2c", g2c()}}) {
    if (std::abs(gc) > 0.2 * d) {
      std::ostringstream msg;
      msg << name << "/|delta| = " << std::abs(gc) / d << " exceeds 0.2; dispersive coupling formulas are unreliable";
      out.push_back(msg.str());
    }
  }
  return out;
}

void ThreeModeParams::validate() const {
  if (!(omega1 > 0.0) || !(omega2 > 0.0)) throw std::invalid_argument("ThreeModeParams: qubit frequencies must be positive");
  if (!(omega_c > 0.0) || !(omega_c_ref > 0.0)) throw std::invalid_argument("ThreeModeParams: coupler frequencies must be positive");
  if (!(gamma >= 0.0)) throw std::invalid_argument("ThreeModeParams: gamma must be non-negative");
  if (omega_c == omega1) throw std::invalid_argument("ThreeModeParams: coupler resonant with qubits");
}

ThreeModeParams ThreeModeParams::paper_default(double omega_c_ref_ghz) {
  ThreeModeParams p;
  p.omega1 = units::ghz(kPaperQubitGHz);
  p.omega2 = units::ghz(kPaperQubitGHz);
  p.omega_c_ref = units::ghz(omega_c_ref_ghz);
  p.omega_c = p.omega_c_ref;
  // Coupler fit values, all read as omega/2pi.
  p.g12 = units::mhz(5.9);
  p.g1c_ref = units::mhz(112.4);
  p.g2c_ref = units::mhz(101.2);
  p.gamma = units::mhz(kPaperGammaMHz);
  return p;
}

// ---------------------------------------------------------------- operators

ComplexMatrix lowering_op(std::size_t site, std::size_t n_sites) {
  if (n_sites == 0 || n_sites > 3 || site >= n_sites) throw std::invalid_argument("lowering_op: site out of range");
  const ComplexMatrix sm{{0.0, 0.0}, {1.0, 0.0}};
  const ComplexMatrix id = ComplexMatrix::identity(2);
  ComplexMatrix out = site == 0 ? sm : id;
  for (std::size_t k = 1; k < n_sites; ++k) out = kron(out, k == site ? sm : id);
  return out;
}

ComplexMatrix raising_op(std::size_t site, std::size_t n_sites) { return lowering_op(site, n_sites).adjoint(); }

ComplexMatrix number_op(std::size_t site, std::size_t n_sites) {
  return raising_op(site, n_sites) * lowering_op(site, n_sites);
}

ComplexMatrix sigma_z(std::size_t site, std::size_t n_sites) {
  const std::size_t dim = std::size_t{1} << n_sites;
  return 2.0 * number_op(site, n_sites) - ComplexMatrix::identity(dim);
}

ComplexMatrix sigma_x(std::size_t site, std::size_t n_sites) {
  return raising_op(site, n_sites) + lowering_op(site, n_sites);
}

ComplexMatrix total_excitation(std::size_t n_sites) {
  const std::size_t dim = std::size_t{1} << n_sites;
  ComplexMatrix out(dim, dim);
  for (std::size_t s = 0; s < n_sites; ++s) out += number_op(s, n_sites);
  return out;
}

namespace {

// sigma_a^+ sigma_b^- + h.c.
ComplexMatrix exchange(std::size_t a, std::size_t b, std::size_t n_sites) {
  const ComplexMatrix ab = raising_op(a, n_sites) * lowering_op(b, n_sites);
  return ab + ab.adjoint();
}

constexpr std::size_t kQ1 = 0, kCoupler = 1, kQ2 = 2;

}  // namespace

ComplexMatrix dimer_hamiltonian_full(const DimerParams& p) {
  ComplexMatrix h = p.g * exchange(0, 1, 2);
  h += complex(0.0, -p.gamma / 2.0) * number_op(1, 2);
  return h;
}

ComplexMatrix dimer_hamiltonian_hermitian(const DimerParams& p) { return p.g * exchange(0, 1, 2); }

ComplexMatrix dimer_hamiltonian_1exc(const DimerParams& p) {
  return ComplexMatrix{{0.0, p.g}, {p.g, complex(0.0, -p.gamma / 2.0)}};
}

ComplexMatrix three_mode_hamiltonian(const ThreeModeParams& p) {
  constexpr std::size_t n = 3;
  const double g1 = p.g1c(), g2 = p.g2c();
  ComplexMatrix h = (0.5 * (p.omega2 - p.omega1)) * sigma_z(kQ2, n);
  h += (0.5 * (p.omega_c - p.omega1)) * sigma_z(kCoupler, n);
  h += p.g12 * exchange(kQ1, kQ2, n);
  h += g1 * exchange(kQ1, kCoupler, n);
  h += g2 * exchange(kQ2, kCoupler, n);
  if (p.counter_rotating) {
    // Second-order elimination of g (s_j^+ s_c^+ + h.c.), detuned by omega_j + omega_c.
    const double sigma1 = p.omega1 + p.omega_c, sigma2 = p.omega2 + p.omega_c;
    const double sigma12 = 0.5 * (sigma1 + sigma2);
    const ComplexMatrix zc = sigma_z(kCoupler, n);
    h += (g1 * g2 / sigma12) * (zc * exchange(kQ1, kQ2, n));
    h += (0.5 * g1 * g1 / sigma1) * (sigma_z(kQ1, n) + zc);
    h += (0.5 * g2 * g2 / sigma2) * (sigma_z(kQ2, n) + zc);
  }
  return h;
}

ComplexMatrix three_mode_hamiltonian_lab(const ThreeModeParams& p) {
  constexpr std::size_t n = 3;
  ComplexMatrix h = (0.5 * p.omega1) * sigma_z(kQ1, n);
  h += (0.5 * p.omega_c) * sigma_z(kCoupler, n);
  h += (0.5 * p.omega2) * sigma_z(kQ2, n);
  h += p.g12 * exchange(kQ1, kQ2, n);
  const ComplexMatrix xc = sigma_x(kCoupler, n);
  h += p.g1c() * (sigma_x(kQ1, n) * xc);
  h += p.g2c() * (sigma_x(kQ2, n) * xc);
  return h;
}

ComplexMatrix driven_hamiltonian(const ThreeModeParams& p, const DriveParams& d) {
  constexpr std::size_t n = 3;
  ComplexMatrix h = three_mode_hamiltonian(p);
  if (d.delta_p != 0.0) {
    h += (0.5 * d.delta_p) * (sigma_z(kQ1, n) + sigma_z(kQ2, n) + sigma_z(kCoupler, n));
  }
  if (d.Omega_p != 0.0) h += (0.5 * d.Omega_p) * sigma_x(kQ2, n);
  return h;
}

ComplexMatrix driven_dimer_hamiltonian(const DimerParams& p, const DriveParams& d) {
  ComplexMatrix h = dimer_hamiltonian_hermitian(p);
  if (d.delta_p != 0.0) h += (0.5 * d.delta_p) * (sigma_z(0, 2) + sigma_z(1, 2));
  if (d.Omega_p != 0.0) h += (0.5 * d.Omega_p) * sigma_x(1, 2);
  return h;
}

Observables observables() {
  Observables o;
  o.M0 = ComplexMatrix{{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}};
  o.M1 = ComplexMatrix{{0, 0, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 1, 0}};
  return o;
}

ComplexVector dimer_psi0() { return {0.0, 1.0, 0.0, 0.0}; }

ComplexVector dimer_psi1() {
  const double r = 1.0 / std::sqrt(2.0);
  return {0.0, r, 0.0, r};
}

ComplexVector product_state(const std::vector<std::pair<complex, complex>>& sites) {
  if (sites.empty()) throw std::invalid_argument("product_state: no sites");
  ComplexVector out{sites[0].first, sites[0].second};
  for (std::size_t s = 1; s < sites.size(); ++s) {
    ComplexVector next(out.size() * 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
      next[2 * i] = out[i] * sites[s].first;
      next[2 * i + 1] = out[i] * sites[s].second;
    }
    out = std::move(next);
  }
  return out;
}

}  // namespace ptdimer
