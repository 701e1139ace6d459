#include <doctest.h>

#include <cmath>

#include "ptdimer/model.hpp"
#include "ptdimer/units.hpp"

using namespace ptdimer;

TEST_CASE("single-site operators follow the excited-first basis") {
  const ComplexMatrix sm = lowering_op(0, 1);
  CHECK(sm(1, 0) == complex(1.0));
  CHECK(sm(0, 1) == complex(0.0));
  CHECK(max_abs_diff(raising_op(0, 1), sm.adjoint()) == 0.0);
  CHECK(number_op(0, 1)(0, 0) == complex(1.0));
  CHECK(sigma_z(0, 1)(0, 0) == complex(1.0));
}

TEST_CASE("multi-site operators obey the qubit algebra") {
  for (std::size_t n : {2u, 3u}) {
    const std::size_t dim = std::size_t{1} << n;
    for (std::size_t s = 0; s < n; ++s) {
      const ComplexMatrix a = lowering_op(s, n), ad = raising_op(s, n);
      CHECK(max_abs_diff(a * ad + ad * a, ComplexMatrix::identity(dim)) == 0.0);
      CHECK(max_abs_diff(ad * a, number_op(s, n)) == 0.0);
      CHECK(max_abs_diff(commutator(ad, a), sigma_z(s, n)) == 0.0);
      CHECK(max_abs_diff(sigma_x(s, n), a + ad) == 0.0);
      for (std::size_t t = 0; t < n; ++t) {
        if (t != s) CHECK(commutator(a, lowering_op(t, n)).max_abs() == 0.0);
      }
    }
  }
}

TEST_CASE("dimer Hamiltonian matches its 4x4 literal") {
  const DimerParams p(units::mhz(17.0), units::mhz(3.0));
  const ComplexMatrix h = dimer_hamiltonian_full(p);
  const complex lossy(0.0, -p.gamma / 2.0);
  // {|11>, |01>, |10>, |00>}: Q2 excited in rows 0 and 2.
  const ComplexMatrix ref{{lossy, 0, 0, 0}, {0, 0, p.g, 0}, {0, p.g, lossy, 0}, {0, 0, 0, 0}};
  CHECK(max_abs_diff(h, ref) == 0.0);
  const ComplexMatrix block = dimer_hamiltonian_1exc(p);
  for (std::size_t r = 0; r < 2; ++r)
    for (std::size_t c = 0; c < 2; ++c) CHECK(h(r + 1, c + 1) == block(r, c));
  CHECK(dimer_hamiltonian_hermitian(p).hermiticity_error() == 0.0);
}

TEST_CASE("g_tilde and Gamma") {
  const double gamma = units::mhz(17.0);
  const DimerParams ep = DimerParams::from_g_tilde(gamma, 1.0);
  CHECK(ep.g == doctest::Approx(gamma / 4.0).epsilon(1e-15));
  CHECK(std::abs(ep.Gamma()) < 1e-6 * gamma);
  CHECK(DimerParams::from_g_tilde(gamma, 0.5).Gamma().imag() == 0.0);
  CHECK(DimerParams::from_g_tilde(gamma, 2.0).Gamma().real() == 0.0);
  const DimerParams h = DimerParams::from_hz(17e6, 4.25e6);
  CHECK(h.g_tilde() == doctest::Approx(1.0));
}

TEST_CASE("three-mode Hamiltonian is Hermitian and conserves excitations") {
  ThreeModeParams p = ThreeModeParams::paper_default();
  for (double wc_ghz : {6.0, 7.25, 8.0}) {
    p.omega_c = units::ghz(wc_ghz);
    for (bool cr : {false, true}) {
      p.counter_rotating = cr;
      const ComplexMatrix h = three_mode_hamiltonian(p);
      CHECK(h.hermiticity_error() == 0.0);
      CHECK(commutator(h, total_excitation(3)).max_abs() <= 1e-15 * h.max_abs());
    }
  }
  CHECK(three_mode_hamiltonian_lab(p).hermiticity_error() == 0.0);
  CHECK(commutator(three_mode_hamiltonian_lab(p), total_excitation(3)).max_abs() > 0.0);
}

TEST_CASE("coupler couplings scale as the square root of the coupler frequency") {
  ThreeModeParams p = ThreeModeParams::paper_default();
  p.omega_c = 0.8 * p.omega_c_ref;
  CHECK(p.g1c() == doctest::Approx(p.g1c_ref * std::sqrt(0.8)));
  CHECK(p.g1c() * p.g2c() == doctest::Approx(0.8 * p.g1c_ref * p.g2c_ref));
  p.scale_couplings = false;
  CHECK(p.g2c() == p.g2c_ref);
}

TEST_CASE("validity warnings flag strong dispersive coupling and detuned qubits") {
  ThreeModeParams p = ThreeModeParams::paper_default();
  CHECK(p.validity_warnings().empty());
  p.omega_c = units::ghz(5.3);
  CHECK(!p.validity_warnings().empty());
  ThreeModeParams q = ThreeModeParams::paper_default();
  q.omega2 += units::mhz(1.0);
  CHECK(q.validity_warnings().size() == 1);
  q.omega_c = q.omega1;
  CHECK_THROWS_AS(q.validate(), std::invalid_argument);
}

TEST_CASE("initial states and observables") {
  const Observables o = observables();
  const ComplexVector p0 = dimer_psi0(), p1 = dimer_psi1();
  CHECK(p0.norm() == doctest::Approx(1.0));
  CHECK(p1.norm() == doctest::Approx(1.0));
  CHECK(max_abs_diff(o.M1, lowering_op(1, 2)) == 0.0);
  CHECK(max_abs_diff(o.M0, number_op(0, 2)) == 0.0);
  const ComplexVector s = product_state({{1.0, 0.0}, {0.0, 1.0}});
  CHECK((s - p0).norm() == 0.0);
}

TEST_CASE("paper defaults") {
  const ThreeModeParams p = ThreeModeParams::paper_default();
  CHECK(units::to_hz(p.omega1) == doctest::Approx(5e9));
  CHECK(units::to_hz(p.gamma) == doctest::Approx(17e6));
  CHECK(units::to_hz(p.omega_c) == doctest::Approx(7.25e9));
  CHECK(units::to_hz(ThreeModeParams::paper_default(ThreeModeParams::kMainTextReferenceGHz).omega_c) ==
        doctest::Approx(7.29e9));
}

TEST_CASE("dimer Hamiltonian decomposition") {
  const DimerParams p(units::mhz(17.0), units::mhz(2.0));
  const ComplexMatrix h = dimer_hamiltonian_full(p);
  const ComplexMatrix herm = 0.5 * (h + h.adjoint());
  const ComplexMatrix anti = complex(0.0, -0.5) * (h - h.adjoint());
  CHECK(max_abs_diff(herm, dimer_hamiltonian_hermitian(p)) == 0.0);
  CHECK(max_abs_diff(anti, (-p.gamma / 2.0) * number_op(1, 2)) == 0.0);
  const std::vector<complex> d{complex(0.0, -p.gamma / 2.0), 0.0, complex(0.0, -p.gamma / 2.0), 0.0};
  CHECK(max_abs_diff(dimer_hamiltonian_full(DimerParams(p.gamma, 0.0)), ComplexMatrix::diagonal(d)) == 0.0);
  CHECK(h(1, 2) == complex(p.g));
  CHECK(h(2, 1) == complex(p.g));
  for (double g : {0.0, 1e6, 1e8}) CHECK(dimer_hamiltonian_1exc(DimerParams(p.gamma, g)).trace() == complex(0.0, -p.gamma / 2.0));
}

TEST_CASE("three-mode Hamiltonian with every coupling off leaves only the coupler detuning") {
  ThreeModeParams p = ThreeModeParams::paper_default();
  p.g12 = p.g1c_ref = p.g2c_ref = 0.0;
  p.omega_c = units::ghz(6.4);
  CHECK(max_abs_diff(three_mode_hamiltonian(p), (0.5 * (p.omega_c - p.omega1)) * sigma_z(1, 3)) == 0.0);
}

TEST_CASE("driven Hamiltonian") {
  ThreeModeParams p = ThreeModeParams::paper_default();
  p.omega_c = units::ghz(6.5);
  CHECK(max_abs_diff(driven_hamiltonian(p, {}), three_mode_hamiltonian(p)) == 0.0);
  const DriveParams d{units::mhz(3.0), units::mhz(0.17)};
  const ComplexMatrix h = driven_hamiltonian(p, d);
  CHECK(h.hermiticity_error() == 0.0);
  const ComplexMatrix drive = driven_hamiltonian(p, {0.0, d.Omega_p}) - three_mode_hamiltonian(p);
  std::size_t pairs = 0;
  for (std::size_t r = 0; r < 8; ++r)
    for (std::size_t c = 0; c < 8; ++c) {
      if (drive(r, c) == complex(0.0)) continue;
      CHECK((r ^ c) == 1u);  // Q2 is the least significant bit
      CHECK(drive(r, c) == complex(d.Omega_p / 2.0));
      ++pairs;
    }
  CHECK(pairs == 8);
}

TEST_CASE("observables are the literal projector and lowering matrices") {
  const Observables o = observables();
  const ComplexVector p0 = dimer_psi0();
  CHECK(((o.M0 * p0) - p0).norm() == 0.0);
  CHECK(max_abs_diff(o.M0 * o.M0, o.M0) == 0.0);
  CHECK(o.M1(1, 0) == complex(1.0));
  CHECK(o.M1(3, 2) == complex(1.0));
  CHECK(o.M1.max_abs() == 1.0);
  double sum = 0.0;
  for (auto v : o.M1.values()) sum += std::abs(v);
  CHECK(sum == 2.0);
}

TEST_CASE("operators reject sites out of range") {
  CHECK_THROWS(lowering_op(2, 2));
  CHECK_THROWS(number_op(3, 3));
}
