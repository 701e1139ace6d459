// Batch front-end: one subcommand per data product, all driven by a config
// document and a seed.

#include <CLI11.hpp>

#include <iostream>

#include "ptdimer/commands.hpp"
#include "ptdimer/config.hpp"

namespace {

struct Flags {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  std::optional<std::size_t> workers;
  bool verify_first = false;
  bool print_config = false;
};

ptdimer::RunConfig resolve(const Flags& f) {
  ptdimer::RunConfig cfg = f.preset.empty() ? ptdimer::RunConfig{} : ptdimer::RunConfig::preset_named(f.preset);
  if (!f.config.empty()) cfg = ptdimer::load_config(f.config, cfg);
  if (f.seed) {
    cfg.seed = f.seed;
    cfg.synthetic_noise = true;
  }
  if (f.workers) cfg.workers = *f.workers;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Passive PT-dimer and three-mode waveguide simulator"};
  app.require_subcommand(1);
  Flags flags;
  ptdimer::cli::CommandOptions opts;

  app.add_option("--config", flags.config, "JSON config document (schema_version 1)")->check(CLI::ExistingFile);
  app.add_option("--preset", flags.preset, "paper-default | main-text-reference");
  app.add_option("--seed", flags.seed, "RNG seed; turns on synthetic noise");
  app.add_option("--out", flags.out, "output directory");
  app.add_option("--workers", flags.workers, "sweep threads (0 = all cores)");
  app.add_flag("--verify", flags.verify_first, "run the invariant suite first and stop on a violation");
  app.add_flag("--print-config", flags.print_config, "print the resolved config and exit");

  for (const char* name : {"spectrum", "dynamics", "transmission", "fit", "verify"}) app.add_subcommand(name);
  app.get_subcommand("spectrum")->description("eigenvalues in both views and the coupler calibration");
  app.get_subcommand("dynamics")->description("Q1 population and Q2 coherence from three engines");
  app.get_subcommand("transmission")->description("S21 over the detuning grid for each g_tilde");
  auto* fit = app.get_subcommand("fit");
  fit->description("estimation round trip, or fit one trace with --input");
  fit->add_option("--input", opts.input, "trace CSV (t_or_detuning, re[, im])")->check(CLI::ExistingFile);
  fit->add_option("--observable", opts.observable, "population | coherence")
      ->check(CLI::IsMember({"population", "coherence"}));
  app.get_subcommand("verify")->description("module invariant checks, fail fast");
  auto* sens = app.add_subcommand("sensitivity", "sensitivity curve and derivative field");
  sens->add_option("--which", opts.which, "cw | q1 | q2")->required()->check(CLI::IsMember({"cw", "q1", "q2"}));

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();
  opts.out_dir = flags.out;

  try {
    const ptdimer::RunConfig cfg = resolve(flags);
    if (flags.print_config) {
      std::cout << cfg.to_json().dump(2) << "\n";
      return 0;
    }
    if (flags.verify_first && command != "verify") {
      const auto v = ptdimer::cli::run_command("verify", cfg, opts);
      if (v.status != 0) {
        std::cerr << "verify failed: " << v.summary.value("error", std::string("see verify_manifest.json")) << "\n";
        return v.status;
      }
    }
    const auto result = ptdimer::cli::run_command(command, cfg, opts);
    std::cout << result.summary.dump(2) << "\n";
    for (const auto& f : result.files) std::cerr << "wrote " << f << "\n";
    return result.status;
  } catch (const ptdimer::ConfigError& e) {
    std::cerr << "config error at " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
