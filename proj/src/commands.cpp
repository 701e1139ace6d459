#include "ptdimer/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>

#include "ptdimer/coupler.hpp"
#include "ptdimer/dynamics.hpp"
#include "ptdimer/estimation.hpp"
#include "ptdimer/io.hpp"
#include "ptdimer/parallel.hpp"
#include "ptdimer/signal.hpp"
#include "ptdimer/units.hpp"

namespace ptdimer::cli {

using nlohmann::json;

namespace {

constexpr double kNs = 1e-9;

struct Context {
  const RunConfig& cfg;
  const CommandOptions& opts;
  RunStamp stamp;
  CommandResult result;

  std::string path(const std::string& file) {
    const std::string p = (std::filesystem::path(opts.out_dir) / file).string();
    result.files.push_back(file);
    return p;
  }
};

double hz(double omega) { return units::to_hz(omega); }

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Field2D add_gaussian(Field2D f, double sigma, std::uint64_t seed) {
  for (std::size_t r = 0; r < f.rows; ++r) {
    std::mt19937_64 rng(stream_seed(seed, r));
    std::normal_distribution<double> n(0.0, sigma);
    for (std::size_t c = 0; c < f.cols; ++c) f(r, c) += n(rng);
  }
  return f;
}

void write_curve(Context& ctx, const std::string& file, const SensitivityCurve& c) {
  CsvWriter w(ctx.path(file), ctx.stamp, {"g_tilde", "eta", "eta_normalized", "argmax"});
  const SensitivityCurve n = c.normalized();
  for (std::size_t i = 0; i < c.g_tilde.size(); ++i) {
    w.row({c.g_tilde[i], c.eta[i], n.eta[i], c.argmax.empty() ? 0.0 : c.argmax[i]});
  }
  w.close();
}

json curve_summary(const SensitivityCurve& c) {
  return {{"argmax_g_tilde", c.g_tilde[c.argmax_index()]},
          {"raw_max", c.max()},
          {"local_max_near_ep", has_local_max_in(c, 0.9, 1.1)},
          {"observable", c.observable},
          {"axis", c.axis},
          {"noise_model", c.noise_model}};
}

// ------------------------------------------------------------------ spectrum

void cmd_spectrum(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  {
    CsvWriter w(ctx.path("eigenvalues.csv"), ctx.stamp,
                {"g_tilde", "re_eps1_hz", "im_eps1_hz", "re_eps2_hz", "im_eps2_hz", "re_eps1_doubled_hz",
                 "im_eps1_doubled_hz", "re_eps2_doubled_hz", "im_eps2_doubled_hz"});
    for (double gt : cfg.g_tilde.values()) {
      const DimerParams p = cfg.dimer(gt);
      const EigenRow r = eigen_row(p.g, p.gamma);
      w.row({gt, hz(r.eps1.real()), hz(r.eps1.imag()), hz(r.eps2.real()), hz(r.eps2.imag()), hz(r.eps1_doubled.real()),
             hz(r.eps1_doubled.imag()), hz(r.eps2_doubled.real()), hz(r.eps2_doubled.imag())});
    }
    w.close();
  }
  const CouplerMap map(cfg.three_mode(), cfg.dispersive_limit);
  {
    CsvWriter w(ctx.path("coupler_calibration.csv"), ctx.stamp, {"omega_c_hz", "g_eff_hz", "lamb1_hz", "lamb2_hz"});
    for (const auto& row : calibration_table(map, 401, cfg.scale_lamb)) {
      w.row({hz(row.omega_c), hz(row.g_eff), hz(row.lamb1), hz(row.lamb2)});
    }
    w.close();
  }
  {
    CsvWriter w(ctx.path("coupler_map.csv"), ctx.stamp, {"g_tilde", "omega_c_hz", "g_eff_hz"});
    for (double gt : cfg.g_tilde.values()) {
      const double g = gt * cfg.gamma() / 4.0;
      if (g > map.max_abs_g()) continue;
      const double wc = map.omega_c_for_g(g);
      w.row({gt, hz(wc), hz(map.g_eff(wc))});
    }
    w.close();
  }
  const ThreeModeParams p = cfg.three_mode();
  ctx.result.summary = {{"branch_low_hz", hz(map.branch_low())},
                        {"zero_crossing_hz", hz(map.zero_crossing())},
                        {"max_abs_g_eff_hz", hz(map.max_abs_g())},
                        {"g_eff_at_reference_hz", hz(g_eff(p, p.omega_c_ref))},
                        {"eigenvalue_views", "matrix eigenvalues and doubled population-rate view"}};
}

// ------------------------------------------------------------------ dynamics

void cmd_dynamics(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const std::vector<double> gts = cfg.g_tilde.values();
  const std::vector<double> times = cfg.time_ns.values(kNs);
  const std::size_t nt = times.size();
  Field2D pa(gts.size(), nt), pp(gts.size(), nt), pl(gts.size(), nt);
  Field2D ca(gts.size(), nt), cp(gts.size(), nt), cl(gts.size(), nt);
  std::vector<double> norm_rise(gts.size(), 0.0), trace_err(gts.size(), 0.0);
  const Observables obs = observables();

  parallel_for(gts.size(), [&](std::size_t i) {
    const DimerParams p = cfg.dimer(gts[i]);
    const ComplexMatrix h = dimer_hamiltonian_full(p);
    const KetTrajectory k0 = evolve_nonhermitian(h, dimer_psi0(), times);
    const KetTrajectory k1 = evolve_nonhermitian(h, dimer_psi1(), times);
    const auto l0 = lindblad_evolve(dimer_hamiltonian_hermitian(p), dimer_collapse(p), DensityMatrix::pure(dimer_psi0()), times);
    const auto l1 = lindblad_evolve(dimer_hamiltonian_hermitian(p), dimer_collapse(p), DensityMatrix::pure(dimer_psi1()), times);
    double prev0 = dimer_psi0().norm(), prev1 = dimer_psi1().norm();
    for (std::size_t k = 0; k < nt; ++k) {
      pa(i, k) = q1_population_analytic(times[k], p);
      pp(i, k) = k0.m0.values[k].real();
      pl(i, k) = l0[k].expectation(obs.M0).real();
      ca(i, k) = q2_coherence_analytic(times[k], p);
      cp(i, k) = std::abs(k1.m1.values[k]);
      cl(i, k) = std::abs(l1[k].expectation(obs.M1));
      const double n0 = k0.states[k].norm(), n1 = k1.states[k].norm();
      norm_rise[i] = std::max({norm_rise[i], n0 - prev0, n1 - prev1});
      prev0 = n0;
      prev1 = n1;
      trace_err[i] = std::max({trace_err[i], std::abs(l0[k].trace() - 1.0), std::abs(l1[k].trace() - 1.0)});
    }
  });

  Field2D noisy;
  if (cfg.noise_enabled()) {
    noisy = Field2D(gts.size(), nt);
    for (std::size_t i = 0; i < gts.size(); ++i) {
      const TimeTrace t = synth_population(cfg.dimer(gts[i]), times, cfg.shots, stream_seed(*cfg.seed, i));
      for (std::size_t k = 0; k < nt; ++k) noisy(i, k) = t.values[k].real();
    }
  }

  double d_prop_p = 0, d_lind_p = 0, d_prop_c = 0, d_lind_c = 0;
  {
    std::vector<std::string> cols{"g_tilde", "t_or_detuning", "analytic", "propagator", "lindblad"};
    if (cfg.noise_enabled()) cols.push_back("synthetic");
    CsvWriter w(ctx.path("population.csv"), ctx.stamp, cols);
    for (std::size_t i = 0; i < gts.size(); ++i) {
      for (std::size_t k = 0; k < nt; ++k) {
        d_prop_p = std::max(d_prop_p, std::abs(pa(i, k) - pp(i, k)));
        d_lind_p = std::max(d_lind_p, std::abs(pa(i, k) - pl(i, k)));
        std::vector<double> row{gts[i], times[k], pa(i, k), pp(i, k), pl(i, k)};
        if (cfg.noise_enabled()) row.push_back(noisy(i, k));
        w.row(row);
      }
    }
    w.close();
  }
  {
    CsvWriter w(ctx.path("coherence.csv"), ctx.stamp, {"g_tilde", "t_or_detuning", "analytic", "propagator", "lindblad"});
    for (std::size_t i = 0; i < gts.size(); ++i) {
      for (std::size_t k = 0; k < nt; ++k) {
        d_prop_c = std::max(d_prop_c, std::abs(ca(i, k) - cp(i, k)));
        d_lind_c = std::max(d_lind_c, std::abs(ca(i, k) - cl(i, k)));
        w.row({gts[i], times[k], ca(i, k), cp(i, k), cl(i, k)});
      }
    }
    w.close();
  }
  const double rise = *std::max_element(norm_rise.begin(), norm_rise.end());
  const double terr = *std::max_element(trace_err.begin(), trace_err.end());
  const bool ok = d_prop_p < 1e-6 && d_lind_p < 1e-6 && d_prop_c < 1e-6 && d_lind_c < 1e-6 && rise <= 1e-12 && terr < 1e-9;
  ctx.result.summary = {{"cross_engine_max_abs_diff",
                         {{"population_analytic_vs_propagator", d_prop_p},
                          {"population_analytic_vs_lindblad", d_lind_p},
                          {"coherence_analytic_vs_propagator", d_prop_c},
                          {"coherence_analytic_vs_lindblad", d_lind_c}}},
                        {"max_norm_increase", rise},
                        {"max_trace_error", terr},
                        {"passed", ok}};
  if (!ok) ctx.result.status = 1;
}

// -------------------------------------------------------------- transmission

struct CwSetup {
  CouplerMap map;
  double reference = 0.0;
};

CwSetup cw_setup(const RunConfig& cfg) {
  CouplerMap map(cfg.three_mode(), cfg.dispersive_limit);
  const double ref = dressed_qubit_shift(map.at(map.zero_crossing()), 1);
  return {std::move(map), ref};
}

Spectrum spectrum_at(const RunConfig& cfg, const CwSetup* cw, double gt, std::span<const double> det) {
  const double omega_p = cfg.omega_p_over_gamma * cfg.gamma();
  if (cw) return transmission_spectrum(cw->map.at_g(gt * cfg.gamma() / 4.0), omega_p, det, cw->reference, gt);
  return transmission_spectrum(cfg.dimer(gt), omega_p, det);
}

void cmd_transmission(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const std::vector<double> gts = cfg.g_tilde.values();
  const std::vector<double> det = cfg.detuning_mhz.values(units::mhz(1.0));
  std::optional<CwSetup> cw;
  if (cfg.model == "three-mode") cw = cw_setup(cfg);
  std::vector<Spectrum> spectra(gts.size());
  for (std::size_t i = 0; i < gts.size(); ++i) spectra[i] = spectrum_at(cfg, cw ? &*cw : nullptr, gts[i], det);

  double worst = 0.0;
  {
    CsvWriter w(ctx.path("transmission.csv"), ctx.stamp, {"g_tilde", "t_or_detuning", "re", "im", "abs"});
    for (std::size_t i = 0; i < gts.size(); ++i) {
      for (std::size_t k = 0; k < det.size(); ++k) {
        const complex s = spectra[i].s21[k];
        worst = std::max(worst, std::abs(s));
        w.row({gts[i], hz(det[k]), s.real(), s.imag(), std::abs(s)});
      }
    }
    w.close();
  }
  {
    CsvWriter w(ctx.path("transmission_dips.csv"), ctx.stamp,
                {"g_tilde", "dips", "deepest_hz", "second_hz", "splitting_hz", "mode_midpoint_hz"});
    for (std::size_t i = 0; i < gts.size(); ++i) {
      const auto dips = find_dips(spectra[i]);
      const double a = dips.empty() ? NAN : dips[0].position;
      const double b = dips.size() < 2 ? NAN : dips[1].position;
      // Dressed-mode frequency offsets are the negatives of the dip detunings.
      w.row({gts[i], static_cast<double>(dips.size()), hz(a), hz(b), hz(std::abs(a - b)), hz(-0.5 * (a + b))});
    }
    w.close();
  }
  const bool ok = worst <= 1.0 + 1e-6;
  ctx.result.summary = {{"model", cfg.model},
                        {"reference_shift_hz", cw ? hz(cw->reference) : 0.0},
                        {"omega_p_over_gamma", cfg.omega_p_over_gamma},
                        {"max_abs_s21", worst},
                        {"passed", ok}};
  if (!ok) ctx.result.status = 1;
}

// --------------------------------------------------------------- sensitivity

void cmd_sensitivity_cw(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const std::vector<double> gts = cfg.cw_g_tilde.values();
  const std::vector<double> det = cfg.cw_detuning_mhz.values(units::mhz(1.0));
  std::optional<CwSetup> cw;
  if (cfg.model == "three-mode") cw = cw_setup(cfg);
  Field2D mag(gts.size(), det.size());
  for (std::size_t i = 0; i < gts.size(); ++i) {
    const Spectrum s = spectrum_at(cfg, cw ? &*cw : nullptr, gts[i], det);
    for (std::size_t k = 0; k < det.size(); ++k) mag(i, k) = std::abs(s.s21[k]);
  }
  double sigma = 1.0;
  if (cfg.noise_enabled() && cfg.sigma_add > 0.0) {
    mag = add_gaussian(mag, cfg.sigma_add, *cfg.seed);
    sigma = cfg.sigma_add;
  }
  const std::vector<double> sig(gts.size(), sigma);
  const SensitivityCurve c = sensitivity_cw(mag, gts, det, sig, cfg.smoothing);
  const Field2D deriv = d_dg(smooth_along_g(mag, gts, cfg.smoothing), gts[1] - gts[0]);
  write_curve(ctx, "sensitivity_cw.csv", c);
  CsvWriter w(ctx.path("field_cw.csv"), ctx.stamp, {"g_tilde", "t_or_detuning", "abs_s21", "d_abs_s21_dg"});
  for (std::size_t i = 0; i < gts.size(); ++i) {
    for (std::size_t k = 0; k < det.size(); ++k) w.row({gts[i], hz(det[k]), mag(i, k), deriv(i, k)});
  }
  w.close();
  ctx.result.summary = curve_summary(c);
  ctx.result.summary["noise_sigma"] = sigma;
}

void cmd_sensitivity_q1(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const std::vector<double> gts = cfg.g_tilde.values();
  const std::vector<double> times = cfg.q1_time_ns.values(kNs);
  Field2D pop(gts.size(), times.size());
  for (std::size_t i = 0; i < gts.size(); ++i) {
    const DimerParams p = cfg.dimer(gts[i]);
    if (cfg.noise_enabled()) {
      const TimeTrace t = synth_population(p, times, cfg.shots, stream_seed(*cfg.seed, i));
      for (std::size_t k = 0; k < times.size(); ++k) pop(i, k) = t.values[k].real();
    } else {
      for (std::size_t k = 0; k < times.size(); ++k) pop(i, k) = q1_population_analytic(times[k], p);
    }
  }
  const PopulationNoise noise{cfg.shots, cfg.readout_error};
  const SensitivityCurve c = sensitivity_q1(pop, gts, times, noise, cfg.smoothing);
  const Field2D deriv = d_dg(smooth_along_g(pop, gts, cfg.smoothing), gts[1] - gts[0]);
  write_curve(ctx, "sensitivity_q1.csv", c);
  CsvWriter w(ctx.path("field_q1.csv"), ctx.stamp, {"g_tilde", "t_or_detuning", "population", "d_population_dg"});
  for (std::size_t i = 0; i < gts.size(); ++i) {
    for (std::size_t k = 0; k < times.size(); ++k) w.row({gts[i], times[k], pop(i, k), deriv(i, k)});
  }
  w.close();
  ctx.result.summary = curve_summary(c);
  ctx.result.summary["shots"] = cfg.shots;
  ctx.result.summary["readout_error"] = cfg.readout_error;
}

void cmd_sensitivity_q2(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const std::vector<double> gts = cfg.q2_g_tilde.values();
  const std::vector<double> times = cfg.q2_time_ns.values(kNs);
  const CouplerMap map(cfg.three_mode(), cfg.dispersive_limit);
  EmissionSweepOptions eo;
  eo.filter = cfg.filter_enabled;
  eo.cutoff_hz = cfg.filter_cutoff_mhz * 1e6;
  eo.order = cfg.filter_order;
  const EmissionSweep sweep = simulate_q2_emission_sweep(map, gts, times, eo);
  Field2D three = sweep.filtered;
  Field2D two(gts.size(), times.size());
  for (std::size_t i = 0; i < gts.size(); ++i) {
    for (std::size_t k = 0; k < times.size(); ++k) two(i, k) = q2_coherence_analytic(times[k], cfg.dimer(gts[i]));
  }
  double sigma = 1.0;
  if (cfg.noise_enabled() && cfg.sigma_add > 0.0) {
    three = add_gaussian(three, cfg.sigma_add, *cfg.seed);
    sigma = cfg.sigma_add;
  }
  const double tf = cfg.t_final_ns * kNs;
  const SensitivityCurve c3 = sensitivity_q2(three, gts, times, tf, sigma, cfg.smoothing);
  const SensitivityCurve c2 = sensitivity_q2(two, gts, times, tf, sigma, cfg.smoothing);
  {
    CsvWriter w(ctx.path("sensitivity_q2.csv"), ctx.stamp,
                {"g_tilde", "eta_three_mode", "eta_three_mode_normalized", "eta_two_mode", "eta_two_mode_normalized"});
    const SensitivityCurve n3 = c3.normalized(), n2 = c2.normalized();
    for (std::size_t i = 0; i < gts.size(); ++i) w.row({gts[i], c3.eta[i], n3.eta[i], c2.eta[i], n2.eta[i]});
    w.close();
  }
  {
    CsvWriter w(ctx.path("field_q2.csv"), ctx.stamp, {"g_tilde", "t_or_detuning", "raw", "filtered", "analytic"});
    for (std::size_t i = 0; i < gts.size(); ++i) {
      for (std::size_t k = 0; k < times.size(); ++k) w.row({gts[i], times[k], sweep.raw(i, k), three(i, k), two(i, k)});
    }
    w.close();
  }
  double dev = 0.0;
  for (std::size_t i = 0; i < gts.size(); ++i) {
    if (gts[i] >= 1.0 && gts[i] <= 2.0 && c2.eta[i] > 0.0) dev = std::max(dev, std::abs(c3.eta[i] - c2.eta[i]) / c2.eta[i]);
  }
  ctx.result.summary = {{"three_mode", curve_summary(c3)},
                        {"two_mode", curve_summary(c2)},
                        {"max_relative_deviation_g_tilde_1_to_2", dev},
                        {"noise_sigma", sigma},
                        {"filter", {{"enabled", eo.filter}, {"cutoff_hz", eo.cutoff_hz}, {"order", eo.order}}}};
}

// ----------------------------------------------------------------------- fit

json fit_json(const FitResult& f) {
  return {{"g_hat_hz", hz(f.g_hat)},
          {"gamma_hat_hz", hz(f.gamma_hat)},
          {"g_tilde_hat", f.g_tilde()},
          {"eps1_hz", {hz(f.eps1.real()), hz(f.eps1.imag())}},
          {"eps2_hz", {hz(f.eps2.real()), hz(f.eps2.imag())}},
          {"residual_rms", f.residual_rms},
          {"covariance_rad2_s2", {{f.covariance[0][0], f.covariance[0][1]}, {f.covariance[1][0], f.covariance[1][1]}}},
          {"covariance_kind", "Gauss-Newton"},
          {"converged", f.converged},
          {"degenerate", f.degenerate}};
}

void cmd_fit(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const std::vector<std::string> cols{"g_tilde_true", "seed_index", "g_hat_hz", "gamma_hat_hz", "g_tilde_hat",
                                      "residual_rms", "cov_gg", "cov_g_gamma", "cov_gamma_gamma", "converged",
                                      "degenerate"};
  auto row_of = [](double gt, double idx, const FitResult& f) {
    return std::vector<double>{gt, idx, hz(f.g_hat), hz(f.gamma_hat), f.g_tilde(), f.residual_rms,
                               f.covariance[0][0], f.covariance[0][1], f.covariance[1][1],
                               f.converged ? 1.0 : 0.0, f.degenerate ? 1.0 : 0.0};
  };

  if (!ctx.opts.input.empty()) {
    const TimeTrace t = read_trace_csv(ctx.opts.input);
    FitResult f;
    if (ctx.opts.observable == "population") {
      f = fit_population(t);
    } else if (ctx.opts.observable == "coherence") {
      FitOptions o;
      o.rayleigh_debias = true;
      f = fit_coherence(t, o);
    } else {
      throw ConfigError("--observable", "must be population or coherence");
    }
    CsvWriter w(ctx.path("fits.csv"), ctx.stamp, cols);
    w.row(row_of(NAN, -1.0, f));
    w.close();
    ctx.result.summary = {{"input", ctx.opts.input}, {"observable", ctx.opts.observable}, {"fit", fit_json(f)}};
    if (!f.converged) ctx.result.status = 1;
    return;
  }

  const std::vector<double> gts = cfg.fit_g_tilde.values();
  const std::vector<double> times = cfg.time_ns.values(kNs);
  const std::size_t seeds = cfg.noise_enabled() ? cfg.fit_seeds : 0;
  std::vector<FitResult> clean(gts.size());
  std::vector<std::vector<FitResult>> noisy(gts.size(), std::vector<FitResult>(seeds));
  parallel_for(gts.size() * (1 + seeds), [&](std::size_t task) {
    const std::size_t i = task / (1 + seeds), s = task % (1 + seeds);
    const DimerParams p = cfg.dimer(gts[i]);
    if (s == 0) {
      std::vector<complex> v(times.size());
      for (std::size_t k = 0; k < times.size(); ++k) v[k] = q1_population_analytic(times[k], p);
      clean[i] = fit_population(TimeTrace(times, v, {gts[i], 0.0, "population", 0}));
    } else {
      const std::uint64_t stream = stream_seed(*cfg.seed, i * 1000003ULL + (s - 1));
      noisy[i][s - 1] = fit_population(synth_population(p, times, cfg.shots, stream));
    }
  });

  double worst_clean = 0.0;
  bool all_converged = true;
  json medians = json::array();
  {
    CsvWriter w(ctx.path("fits.csv"), ctx.stamp, cols);
    for (std::size_t i = 0; i < gts.size(); ++i) {
      const DimerParams p = cfg.dimer(gts[i]);
      w.row(row_of(gts[i], -1.0, clean[i]));
      all_converged = all_converged && clean[i].converged;
      worst_clean = std::max({worst_clean, std::abs(clean[i].g_hat - p.g) / p.g, std::abs(clean[i].gamma_hat - p.gamma) / p.gamma});
      std::vector<double> errs;
      for (std::size_t s = 0; s < seeds; ++s) {
        w.row(row_of(gts[i], static_cast<double>(s), noisy[i][s]));
        errs.push_back(std::abs(noisy[i][s].g_hat - p.g) / p.g);
      }
      if (seeds > 0) medians.push_back({{"g_tilde", gts[i]}, {"median_rel_error_g", median(errs)}});
    }
    w.close();
  }
  {
    CsvWriter w(ctx.path("eigenenergies.csv"), ctx.stamp,
                {"g_tilde_true", "g_tilde_hat", "re_eps1_hz", "im_eps1_hz", "re_eps2_hz", "im_eps2_hz",
                 "re_eps1_doubled_hz", "im_eps1_doubled_hz", "re_eps2_doubled_hz", "im_eps2_doubled_hz"});
    for (std::size_t i = 0; i < gts.size(); ++i) {
      const EigenRow r = eigen_row(clean[i].g_hat, clean[i].gamma_hat);
      w.row({gts[i], r.g_tilde, hz(r.eps1.real()), hz(r.eps1.imag()), hz(r.eps2.real()), hz(r.eps2.imag()),
             hz(r.eps1_doubled.real()), hz(r.eps1_doubled.imag()), hz(r.eps2_doubled.real()), hz(r.eps2_doubled.imag())});
    }
    w.close();
  }
  ctx.result.summary = {{"noiseless_max_rel_error", worst_clean},
                        {"noiseless_all_converged", all_converged},
                        {"noisy_seeds", seeds},
                        {"noisy_median_rel_error_g", medians}};
  if (!all_converged) ctx.result.status = 1;
}

// -------------------------------------------------------------------- verify

void cmd_verify(Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  json checks = json::array();
  auto check = [&](const std::string& name, double value, double bound) {
    const bool ok = std::isfinite(value) && value < bound;
    checks.push_back({{"check", name}, {"value", value}, {"bound", bound}, {"passed", ok}});
    if (!ok) {
      ctx.result.status = 1;
      throw std::runtime_error("verify: " + name + " = " + format_double(value) + " violates bound " + format_double(bound));
    }
  };
  try {
    const double gamma = cfg.gamma();
    // linalg
    ComplexMatrix a{{0.3, complex(0.1, -2.0)}, {complex(-1.5, 0.2), complex(0.0, 1.0)}};
    check("expm(A) expm(-A) = I", max_abs_diff(expm(a) * expm(-1.0 * a), ComplexMatrix::identity(2)), 1e-10);
    const DimerParams ep = cfg.dimer(1.0);
    const auto [e1, e2] = eig2x2(dimer_hamiltonian_1exc(ep));
    check("EP double root", std::abs(e1 - e2) / gamma, 1e-6);
    // model
    const ThreeModeParams tm = cfg.three_mode();
    const ComplexMatrix h3 = three_mode_hamiltonian(tm);
    check("three-mode Hermiticity", h3.hermiticity_error(), 1e-6);
    check("excitation conservation", commutator(h3, total_excitation(3)).max_abs() / h3.max_abs(), 1e-14);
    const ComplexMatrix hf = dimer_hamiltonian_full(cfg.dimer(1.5));
    const ComplexMatrix h1 = dimer_hamiltonian_1exc(cfg.dimer(1.5));
    double block = 0.0;
    for (std::size_t r = 0; r < 2; ++r)
      for (std::size_t c = 0; c < 2; ++c) block = std::max(block, std::abs(hf(r + 1, c + 1) - h1(r, c)));
    check("single-excitation block", block, 1e-300);
    // dynamics
    const std::vector<double> ts = UniformGrid(0.0, 2e-9, 151).values();
    for (double gt : {0.0, 0.5, 1.0, 2.0}) {
      const DimerParams p = cfg.dimer(gt);
      const KetTrajectory k = evolve_nonhermitian(dimer_hamiltonian_full(p), dimer_psi0(), ts);
      double d = 0.0;
      for (std::size_t i = 0; i < ts.size(); ++i) d = std::max(d, std::abs(k.m0.values[i].real() - q1_population_analytic(ts[i], p)));
      check("population closed form vs propagator, g_tilde " + format_double(gt), d, 1e-8);
      const auto rho = lindblad_evolve(dimer_hamiltonian_hermitian(p), dimer_collapse(p), DensityMatrix::pure(dimer_psi0()), ts);
      double tr = 0.0;
      for (const auto& r : rho) tr = std::max(tr, std::abs(r.trace() - 1.0));
      check("Lindblad trace, g_tilde " + format_double(gt), tr, 1e-9);
    }
    const DensityMatrix ss = steady_state(driven_dimer_hamiltonian(cfg.dimer(0.5), {0.0, gamma / 100.0}),
                                          dimer_collapse(cfg.dimer(0.5)));
    ss.check();
    check("steady-state trace", std::abs(ss.trace() - 1.0), 1e-9);
    // coupler
    check("idle |g_eff| (Hz)", std::abs(hz(g_eff(tm, tm.omega_c_ref))), 1e5);
    const CouplerMap map(tm, cfg.dispersive_limit);
    const double g1 = gamma / 4.0;
    check("inverse map round trip (Hz)", std::abs(hz(std::abs(map.g_eff(map.omega_c_for_g(g1))) - g1)), 1e3);
    // signal
    const std::vector<double> flat(50, 0.7);
    const auto sm = gaussian_smooth(flat, 3.0);
    double dev = 0.0;
    for (double v : sm) dev = std::max(dev, std::abs(v - 0.7));
    check("smoothing preserves constants", dev, 1e-14);
    const ButterworthLowpass lp(cfg.filter_cutoff_mhz * 1e6, 1e10, cfg.filter_order);
    check("Butterworth DC gain", std::abs(std::abs(lp.response(0.0)) - 1.0), 1e-12);
  } catch (const std::exception& e) {
    ctx.result.status = 1;
    ctx.result.summary["error"] = e.what();
  }
  ctx.result.summary["checks"] = checks;
  ctx.result.summary["passed"] = ctx.result.status == 0;
}

}  // namespace

CommandResult run_command(const std::string& name, const RunConfig& cfg, const CommandOptions& opts) {
  cfg.validate();
  std::filesystem::create_directories(opts.out_dir);
  std::string label = name;
  if (name == "sensitivity") {
    if (opts.which != "cw" && opts.which != "q1" && opts.which != "q2") {
      throw ConfigError("--which", "sensitivity needs cw, q1 or q2");
    }
    label += "_" + opts.which;
  }
  Context ctx{cfg, opts, {label, cfg.hash(), cfg.seed}, {}};
  const std::size_t saved_workers = sweep_workers();
  sweep_workers() = cfg.workers;
  try {
    if (name == "spectrum") {
      cmd_spectrum(ctx);
    } else if (name == "dynamics") {
      cmd_dynamics(ctx);
    } else if (name == "transmission") {
      cmd_transmission(ctx);
    } else if (name == "sensitivity") {
      if (opts.which == "cw") cmd_sensitivity_cw(ctx);
      if (opts.which == "q1") cmd_sensitivity_q1(ctx);
      if (opts.which == "q2") cmd_sensitivity_q2(ctx);
    } else if (name == "fit") {
      cmd_fit(ctx);
    } else if (name == "verify") {
      cmd_verify(ctx);
    } else {
      throw std::invalid_argument("unknown command \"" + name + "\"");
    }
  } catch (...) {
    sweep_workers() = saved_workers;
    throw;
  }
  sweep_workers() = saved_workers;

  json settings = cfg.to_json();
  settings.erase("workers");
  json manifest = {{"command", label},
                   {"config_hash", ctx.stamp.config_hash},
                   {"seed", cfg.seed ? json(*cfg.seed) : json(nullptr)},
                   {"status", ctx.result.status},
                   {"config", settings},
                   {"results", ctx.result.summary}};
  ctx.result.files.push_back(label + "_manifest.json");
  manifest["files"] = ctx.result.files;
  write_json((std::filesystem::path(opts.out_dir) / (label + "_manifest.json")).string(), manifest);
  return ctx.result;
}

}  // namespace ptdimer::cli
