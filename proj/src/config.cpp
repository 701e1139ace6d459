#include "ptdimer/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "ptdimer/units.hpp"

namespace ptdimer {

using nlohmann::json;

std::vector<double> GridSpec::values(double unit) const {
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double frac = count == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(count - 1);
    out[k] = unit * (start + (stop - start) * frac);
  }
  return out;
}

ThreeModeParams RunConfig::three_mode() const {
  ThreeModeParams p;
  p.omega1 = p.omega2 = units::ghz(omega_ghz);
  p.omega_c_ref = units::ghz(omega_c_ref_ghz);
  p.omega_c = p.omega_c_ref;
  p.g12 = units::mhz(g12_mhz);
  p.g1c_ref = units::mhz(g1c_ref_mhz);
  p.g2c_ref = units::mhz(g2c_ref_mhz);
  p.gamma = units::mhz(gamma_mhz);
  p.counter_rotating = counter_rotating;
  p.scale_couplings = scale_couplings;
  return p;
}

double RunConfig::gamma() const { return units::mhz(gamma_mhz); }

DimerParams RunConfig::dimer(double g_tilde) const { return DimerParams::from_g_tilde(gamma(), g_tilde); }

namespace {

void check_grid(const GridSpec& g, const std::string& path, bool positive_span = true) {
  if (g.count == 0) throw ConfigError(path + ".count", "grid must not be empty");
  if (!std::isfinite(g.start) || !std::isfinite(g.stop)) throw ConfigError(path, "grid bounds must be finite");
  if (g.count > 1 && positive_span && !(g.stop > g.start)) throw ConfigError(path, "stop must exceed start");
}

// Field-by-field reader that records the JSON path for error messages and
// rejects keys it was never asked about.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "$" : path_, "expected an object");
  }
  ~Reader() = default;

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    const std::string p = child(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(p, "expected a boolean");
      out = v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(p, "expected a string");
      out = v.get<std::string>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer() || (std::is_unsigned_v<T> && v.get<long long>() < 0)) {
        throw ConfigError(p, "expected a non-negative integer");
      }
      out = v.get<T>();
    } else {
      if (!v.is_number()) throw ConfigError(p, "expected a number");
      out = v.get<double>();
    }
  }

  void grid(const char* key, GridSpec& g) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    Reader r(j_.at(key), child(key));
    r.get("start", g.start);
    r.get("stop", g.stop);
    r.get("count", g.count);
    r.finish();
  }

  void seed(const char* key, std::optional<std::uint64_t>& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    if (v.is_null()) {
      out.reset();
      return;
    }
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
      throw ConfigError(child(key), "expected a non-negative integer or null");
    }
    out = v.get<std::uint64_t>();
  }

  std::optional<Reader> object(const char* key) {
    seen_.insert(key);
    if (!j_.contains(key)) return std::nullopt;
    return Reader(j_.at(key), child(key));
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw ConfigError(child(k), "unknown field");
    }
  }

 private:
  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

json grid_json(const GridSpec& g) { return {{"start", g.start}, {"stop", g.stop}, {"count", g.count}}; }

}  // namespace

void RunConfig::validate() const {
  if (model != "dimer" && model != "three-mode") throw ConfigError("model", "must be \"dimer\" or \"three-mode\"");
  if (!(gamma_mhz > 0.0)) throw ConfigError("params.gamma_mhz", "must be positive");
  if (!(omega_ghz > 0.0)) throw ConfigError("params.omega_ghz", "must be positive");
  if (!(omega_c_ref_ghz > 0.0)) throw ConfigError("params.omega_c_ref_ghz", "must be positive");
  if (!(dispersive_limit > 0.0)) throw ConfigError("params.dispersive_limit", "must be positive");
  check_grid(g_tilde, "grids.g_tilde");
  check_grid(time_ns, "grids.time_ns");
  check_grid(detuning_mhz, "grids.detuning_mhz");
  check_grid(cw_detuning_mhz, "pipeline.cw_detuning_mhz");
  check_grid(cw_g_tilde, "pipeline.cw_g_tilde");
  check_grid(q1_time_ns, "pipeline.q1_time_ns");
  check_grid(q2_time_ns, "pipeline.q2_time_ns");
  check_grid(q2_g_tilde, "pipeline.q2_g_tilde");
  check_grid(fit_g_tilde, "fit.g_tilde");
  if (g_tilde.start < 0.0) throw ConfigError("grids.g_tilde.start", "relative coupling must be non-negative");
  if (time_ns.start < 0.0) throw ConfigError("grids.time_ns.start", "times must be non-negative");
  if (shots == 0) throw ConfigError("noise.shots", "must be at least 1");
  if (!(readout_error >= 0.0 && readout_error < 0.5)) throw ConfigError("noise.readout_error", "must lie in [0, 0.5)");
  if (!(sigma_add >= 0.0)) throw ConfigError("noise.sigma_add", "must be non-negative");
  if (noise_enabled() && !seed) throw ConfigError("noise.seed", "a seed is mandatory when synthetic noise is enabled");
  if (!(smoothing.c > 0.0)) throw ConfigError("pipeline.smoothing.c", "must be positive");
  if (!(smoothing.min_width > 0.0) || smoothing.max_width < smoothing.min_width) {
    throw ConfigError("pipeline.smoothing", "need 0 < min_width <= max_width");
  }
  if (!(filter_cutoff_mhz > 0.0)) throw ConfigError("pipeline.filter.cutoff_mhz", "must be positive");
  if (filter_order < 1) throw ConfigError("pipeline.filter.order", "must be at least 1");
  if (!(t_final_ns > 0.0)) throw ConfigError("pipeline.t_final_ns", "must be positive");
  if (!(omega_p_over_gamma > 0.0)) throw ConfigError("pipeline.omega_p_over_gamma", "must be positive");
  if (fit_seeds == 0) throw ConfigError("fit.seeds", "must be at least 1");
}

json RunConfig::to_json() const {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["preset"] = preset;
  j["model"] = model;
  j["params"] = {{"gamma_mhz", gamma_mhz},
                 {"omega_ghz", omega_ghz},
                 {"omega_c_ref_ghz", omega_c_ref_ghz},
                 {"g12_mhz", g12_mhz},
                 {"g1c_ref_mhz", g1c_ref_mhz},
                 {"g2c_ref_mhz", g2c_ref_mhz},
                 {"counter_rotating", counter_rotating},
                 {"scale_couplings", scale_couplings},
                 {"scale_lamb", scale_lamb},
                 {"dispersive_limit", dispersive_limit}};
  j["grids"] = {{"g_tilde", grid_json(g_tilde)}, {"time_ns", grid_json(time_ns)}, {"detuning_mhz", grid_json(detuning_mhz)}};
  j["noise"] = {{"shots", shots},
                {"readout_error", readout_error},
                {"sigma_add", sigma_add},
                {"synthetic", synthetic_noise},
                {"seed", seed ? json(*seed) : json(nullptr)}};
  j["pipeline"] = {{"smoothing",
                    {{"enabled", smoothing.enabled},
                     {"c", smoothing.c},
                     {"min_width", smoothing.min_width},
                     {"max_width", smoothing.max_width}}},
                   {"filter", {{"enabled", filter_enabled}, {"cutoff_mhz", filter_cutoff_mhz}, {"order", filter_order}}},
                   {"t_final_ns", t_final_ns},
                   {"omega_p_over_gamma", omega_p_over_gamma},
                   {"cw_detuning_mhz", grid_json(cw_detuning_mhz)},
                   {"cw_g_tilde", grid_json(cw_g_tilde)},
                   {"q1_time_ns", grid_json(q1_time_ns)},
                   {"q2_time_ns", grid_json(q2_time_ns)},
                   {"q2_g_tilde", grid_json(q2_g_tilde)}};
  j["fit"] = {{"g_tilde", grid_json(fit_g_tilde)}, {"seeds", fit_seeds}};
  j["workers"] = workers;
  return j;
}

RunConfig RunConfig::from_json(const json& j) { return from_json(j, RunConfig{}); }

RunConfig RunConfig::from_json(const json& j, RunConfig base) {
  RunConfig c = std::move(base);
  Reader root(j, "");
  int version = kSchemaVersion;
  root.get("schema_version", version);
  if (!j.contains("schema_version")) throw ConfigError("schema_version", "missing");
  if (version != kSchemaVersion) {
    throw ConfigError("schema_version", "unsupported version " + std::to_string(version));
  }
  std::string preset = c.preset;
  root.get("preset", preset);
  if (preset != c.preset) {
    const RunConfig fresh = preset_named(preset);  // throws on unknown names
    c = fresh;
  }
  root.get("model", c.model);
  if (auto p = root.object("params")) {
    p->get("gamma_mhz", c.gamma_mhz);
    p->get("omega_ghz", c.omega_ghz);
    p->get("omega_c_ref_ghz", c.omega_c_ref_ghz);
    p->get("g12_mhz", c.g12_mhz);
    p->get("g1c_ref_mhz", c.g1c_ref_mhz);
    p->get("g2c_ref_mhz", c.g2c_ref_mhz);
    p->get("counter_rotating", c.counter_rotating);
    p->get("scale_couplings", c.scale_couplings);
    p->get("scale_lamb", c.scale_lamb);
    p->get("dispersive_limit", c.dispersive_limit);
    p->finish();
  }
  if (auto g = root.object("grids")) {
    g->grid("g_tilde", c.g_tilde);
    g->grid("time_ns", c.time_ns);
    g->grid("detuning_mhz", c.detuning_mhz);
    g->finish();
  }
  if (auto n = root.object("noise")) {
    n->get("shots", c.shots);
    n->get("readout_error", c.readout_error);
    n->get("sigma_add", c.sigma_add);
    n->get("synthetic", c.synthetic_noise);
    n->seed("seed", c.seed);
    n->finish();
  }
  if (auto p = root.object("pipeline")) {
    if (auto s = p->object("smoothing")) {
      s->get("enabled", c.smoothing.enabled);
      s->get("c", c.smoothing.c);
      s->get("min_width", c.smoothing.min_width);
      s->get("max_width", c.smoothing.max_width);
      s->finish();
    }
    if (auto f = p->object("filter")) {
      f->get("enabled", c.filter_enabled);
      f->get("cutoff_mhz", c.filter_cutoff_mhz);
      f->get("order", c.filter_order);
      f->finish();
    }
    p->get("t_final_ns", c.t_final_ns);
    p->get("omega_p_over_gamma", c.omega_p_over_gamma);
    p->grid("cw_detuning_mhz", c.cw_detuning_mhz);
    p->grid("cw_g_tilde", c.cw_g_tilde);
    p->grid("q1_time_ns", c.q1_time_ns);
    p->grid("q2_time_ns", c.q2_time_ns);
    p->grid("q2_g_tilde", c.q2_g_tilde);
    p->finish();
  }
  if (auto f = root.object("fit")) {
    f->grid("g_tilde", c.fit_g_tilde);
    f->get("seeds", c.fit_seeds);
    f->finish();
  }
  root.get("workers", c.workers);
  root.finish();
  c.validate();
  return c;
}

RunConfig RunConfig::preset_named(const std::string& name) {
  RunConfig c;
  if (name == "paper-default") return c;
  if (name == "main-text-reference") {
    c.preset = name;
    c.omega_c_ref_ghz = ThreeModeParams::kMainTextReferenceGHz;
    return c;
  }
  throw ConfigError("preset", "unknown preset \"" + name + "\"");
}

std::string RunConfig::hash() const {
  // Worker count changes scheduling only, never the numbers.
  json j = to_json();
  j.erase("workers");
  const std::string text = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunConfig load_config(const std::string& path, const RunConfig& base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("$", "cannot open config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("$", std::string("invalid JSON: ") + e.what());
  }
  return RunConfig::from_json(j, base);
}

}  // namespace ptdimer
