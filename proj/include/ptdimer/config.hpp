#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ptdimer/model.hpp"
#include "ptdimer/signal.hpp"

namespace ptdimer {

/// Schema problem, carrying the JSON path of the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Inclusive uniform grid in the config's display units.
struct GridSpec {
  double start = 0.0;
  double stop = 0.0;
  std::size_t count = 1;

  std::vector<double> values(double unit = 1.0) const;
};

struct RunConfig {
  static constexpr int kSchemaVersion = 1;

  std::string preset = "paper-default";
  std::string model = "three-mode";  // "dimer" or "three-mode"

  // Physical parameters, omega / 2 pi.
  double gamma_mhz = kPaperGammaMHz;
  double omega_ghz = kPaperQubitGHz;
  double omega_c_ref_ghz = ThreeModeParams::kFitReferenceGHz;
  double g12_mhz = 5.9;
  double g1c_ref_mhz = 112.4;
  double g2c_ref_mhz = 101.2;
  bool counter_rotating = true;
  bool scale_couplings = true;
  bool scale_lamb = true;
  double dispersive_limit = 0.2;

  // Sweeps.
  GridSpec g_tilde{0.0, 2.5, 201};
  GridSpec time_ns{0.0, 300.0, 601};
  GridSpec detuning_mhz{-30.0, 30.0, 241};

  // Noise.
  std::size_t shots = 10000;
  double readout_error = 0.05;
  double sigma_add = 0.0;
  bool synthetic_noise = false;
  std::optional<std::uint64_t> seed;

  // Pipelines.
  SmoothingConfig smoothing;
  bool filter_enabled = true;
  double filter_cutoff_mhz = 80.0;
  int filter_order = 4;
  double t_final_ns = 100.0;
  double omega_p_over_gamma = 0.01;
  GridSpec cw_detuning_mhz{-29.875, 29.875, 240};
  GridSpec cw_g_tilde{0.0, 2.5, 201};
  GridSpec q1_time_ns{0.0, 100.0, 201};
  GridSpec q2_time_ns{0.0, 100.0, 1001};
  GridSpec q2_g_tilde{0.0, 2.5, 101};
  GridSpec fit_g_tilde{0.2, 2.5, 24};
  std::size_t fit_seeds = 20;

  std::size_t workers = 0;

  ThreeModeParams three_mode() const;
  DimerParams dimer(double g_tilde) const;
  double gamma() const;

  /// Throws ConfigError on inconsistent values.
  void validate() const;
  bool noise_enabled() const { return synthetic_noise; }

  nlohmann::json to_json() const;
  /// Overlays `j` onto `base`; unknown keys and type errors raise ConfigError.
  static RunConfig from_json(const nlohmann::json& j, RunConfig base);
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig preset_named(const std::string& name);

  /// FNV-1a 64 of the canonical (sorted-key) JSON form without `workers`, as 16 hex digits.
  std::string hash() const;
};

RunConfig load_config(const std::string& path, const RunConfig& base);

}  // namespace ptdimer
