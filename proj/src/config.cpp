#include "tlsnoise/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tlsnoise/csv.hpp"
#include "tlsnoise/errors.hpp"

namespace tlsnoise::config {

namespace {

using T = ValueType;

const std::vector<KeySpec> kSchema = {
    {"run.scenario", T::choice, "synth", "synth|avar|fit-qn|fit-noise|sweep-temp|budget|dielectric", "scenario to execute"},
    {"run.seed", T::integer, "1", "", "PRNG seed"},
    {"run.threads", T::integer, "1", "", "worker threads for synthesis (0 = all cores)"},

    {"bath.preset", T::choice, "vacuum", "vacuum|helium", "base parameter set"},
    {"bath.mu", T::number, "", "", "interaction exponent"},
    {"bath.chi", T::number, "", "", "dimensionless TLS parameter"},
    {"bath.gamma1", T::number, "", "", "mean TLS relaxation rate, Hz"},
    {"bath.gamma1_min", T::number, "", "", "lower relaxation-rate bound, Hz"},
    {"bath.gamma1_max", T::number, "", "", "upper relaxation-rate bound, Hz"},
    {"bath.anchor_temperature", T::number, "", "", "dephasing anchor temperature, K"},
    {"bath.anchor_rate", T::number, "", "", "dephasing rate at the anchor, Hz"},
    {"bath.anchor_resonance", T::number, "", "", "resonance the anchor refers to, Hz"},
    {"bath.fluct_density", T::number, "", "", "fluctuator density, 1/(m^3 K)"},
    {"bath.interaction_radius", T::number, "", "", "R0, m"},
    {"bath.u0", T::number, "", "", "interaction strength, Hz"},
    {"bath.p_gamma", T::number, "", "", "order-one constant P_gamma"},
    {"bath.c_const", T::number, "", "", "GTM constant c"},
    {"bath.f_tan_delta", T::number, "", "", "single-photon loss F tan(delta)"},
    {"bath.nc_calibration", T::number, "", "", "kappa in N_c = kappa Gamma1 Gamma2, s^2"},
    {"bath.low_t_exponent", T::number, "", "", "noise temperature exponent below the crossover"},
    {"bath.noise_ref_temperature", T::number, "", "", "noise calibration temperature, K"},
    {"bath.noise_ref_photons", T::number, "", "", "noise calibration photon number"},
    {"bath.noise_ref_freq", T::number, "", "", "noise calibration Fourier frequency, Hz"},
    {"bath.noise_ref_resonance", T::number, "", "", "noise calibration resonance, Hz"},
    {"bath.noise_ref_s_y", T::number, "", "", "S_y at the calibration point, 1/Hz"},

    {"synth.n_fluct", T::integer, "10000", "", "number of fluctuators"},
    {"synth.gamma_min", T::number, "1e-4", "", "lowest switching rate, Hz"},
    {"synth.gamma_max", T::number, "1e4", "", "highest switching rate, Hz"},
    {"synth.h_minus1", T::number, "1e-17", "", "target 1/f coefficient"},
    {"synth.duration", T::number, "5000", "", "trace length, s"},
    {"synth.dt", T::number, "0.05", "", "sampling interval, s"},
    {"synth.nu_mean", T::number, "6.45e9", "", "mean resonance, Hz"},
    {"synth.amplitude_distribution", T::choice, "equal", "equal|lognormal", "fluctuator amplitude law"},
    {"synth.lognormal_sigma", T::number, "0.5", "", "sigma of ln(amplitude)"},
    {"synth.drift_amplitude", T::number, "0", "", "extra slow fluctuator amplitude (0 = none)"},
    {"synth.drift_rate", T::number, "0.01", "", "extra slow fluctuator rate, Hz"},
    {"synth.per_gate_threshold", T::number, "10", "", "gamma dt above which fluctuators advance per gate"},
    {"synth.loop_gain", T::number, "0", "", "Pound loop gain, 1/s (0 = no loop)"},
    {"synth.loop_noise", T::number, "0", "", "loop measurement noise, fractional"},
    {"synth.gate_time", T::number, "0.05", "", "loop gate time, s"},

    {"avar.trace", T::text, "", "", "trace CSV to analyse (empty = synthesize)"},
    {"avar.tau_min", T::number, "0.05", "", "smallest tau, s"},
    {"avar.tau_max", T::number, "10000", "", "largest tau, s"},
    {"avar.per_decade", T::integer, "10", "", "taus per decade"},
    {"avar.tau_lo", T::number, "1", "", "h_-1 window start, s"},
    {"avar.tau_hi", T::number, "1000", "", "h_-1 window end, s"},
    {"avar.mode", T::choice, "overlapping", "overlapping|raw", "estimator"},
    {"avar.detrend", T::boolean, "false", "", "remove a linear trend first"},
    {"avar.exclude", T::text, "", "", "excluded tau windows lo:hi,lo:hi"},
    {"avar.psd_segments", T::integer, "16", "", "periodogram segments (0 = skip)"},

    {"fit.data", T::text, "", "", "input CSV (empty = synthetic data)"},
    {"fit.model", T::choice, "gtm", "gtm|empirical", "Q(N) model"},
    {"fit.temperatures", T::number_list, "0.1,0.15,0.2,0.25,0.3", "", "temperatures for synthetic Q data, K"},
    {"fit.n_min", T::number, "1e-8", "", "lowest photon number for synthetic Q data"},
    {"fit.n_max", T::number, "1e-2", "", "highest photon number for synthetic Q data"},
    {"fit.n_points", T::integer, "20", "", "points per synthetic curve"},
    {"fit.noise", T::number, "0.01", "", "relative lognormal noise on synthetic data"},
    {"fit.empirical_n_c", T::number, "1e-5", "", "n_c of synthetic empirical data"},
    {"fit.empirical_alpha", T::number, "0.11", "", "alpha of synthetic empirical data"},
    {"fit.noise_temperature", T::number, "0.05", "", "temperature of synthetic noise-vs-N data, K"},
    {"fit.noise_n_min", T::number, "0.01", "", "lowest photon number for synthetic noise data"},
    {"fit.noise_n_max", T::number, "1e4", "", "highest photon number for synthetic noise data"},
    {"fit.noise_points", T::integer, "30", "", "points of synthetic noise data"},

    {"sweep.t_min", T::number, "0.001", "", "lowest temperature, K"},
    {"sweep.t_max", T::number, "0.25", "", "highest temperature, K"},
    {"sweep.n_points", T::integer, "80", "", "log-spaced temperatures"},
    {"sweep.photons", T::number_list, "0.3,3,30,300", "", "drive levels"},
    {"sweep.fourier_freq", T::number, "0.1", "", "Fourier frequency, Hz"},
    {"sweep.resonance", T::number, "6.45e9", "", "resonance, Hz"},
    {"sweep.regime", T::choice, "auto", "auto|weak|strong|relaxation", "noise branch"},
    {"sweep.high_lo", T::number, "0.09", "", "high-T slope window start, K"},
    {"sweep.high_hi", T::number, "0.25", "", "high-T slope window end, K"},
    {"sweep.low_lo", T::number, "0.001", "", "low-T slope window start, K"},
    {"sweep.low_hi", T::number, "0.02", "", "low-T slope window end, K"},

    {"chain.input_temperature", T::number, "300", "", "source temperature, K"},
    {"chain.stages", T::stage_list, "RTP:300:0,PT1P:50:0,PT2P:4:20,CP:0.1:20,MCP:0.013:20,ANDRP:0.013:0", "", "NAME:T_K:dB in signal order"},
    {"chain.freq", T::number, "6e9", "", "photon frequency, Hz"},
    {"chain.input_power_dbm", T::number, "2.33", "", "drive power at the top, dBm"},

    {"thermal.heat", T::number, "50e-12", "", "heat through the cell link, W"},
    {"thermal.wf_resistance", T::number, "1e-6", "", "silver link resistance, Ohm"},
    {"thermal.t_cold", T::number, "400e-6", "", "refrigerator-side temperature, K"},
    {"thermal.kapitza_coefficient", T::number, "41.5", "", "R_K T, K^2/W"},
    {"thermal.moles", T::number, "0.1", "", "3He amount, mol"},
    {"thermal.he3_temperature", T::number, "1e-3", "", "temperature for the heat capacity, K"},
    {"thermal.photons", T::number, "300", "", "resonator photon number"},
    {"thermal.nu0", T::number, "6.45e9", "", "resonator frequency, Hz"},
    {"thermal.q_internal", T::number, "2.7e4", "", "internal quality factor"},
    {"thermal.conductivity_a", T::number, "", "", "k(T) = a T^b prefactor, W/(m K^(b+1))"},
    {"thermal.conductivity_b", T::number, "", "", "k(T) exponent"},
    {"thermal.area_over_length", T::number, "", "", "conductor area/length, m"},
    {"thermal.passive_t_cold", T::number, "", "", "cold end of the conductor, K"},
    {"thermal.passive_t_hot", T::number, "", "", "warm end of the conductor, K"},

    {"dielectric.fields", T::text, "", "", "field samples CSV (e2,eps,dv,region)"},
    {"dielectric.participation", T::text, "", "", "film participation CSV (thickness_nm,participation)"},
    {"dielectric.film_thickness_nm", T::number, "4", "", "film thickness looked up in the table, nm"},
    {"dielectric.film_participation", T::number, "0.037", "", "film participation when no table is given"},
    {"dielectric.nu0", T::number, "5.839e9", "", "resonator frequency, Hz"},
    {"dielectric.filling", T::number, "0.10", "", "filling factor when no field samples are given"},
    {"dielectric.eps_svp", T::number, "1.0426", "", "3He permittivity at SVP"},
    {"dielectric.density_ratio", T::number, "1.3", "", "compressed/SVP density"},
    {"dielectric.qi_full", T::number_list, "2.5e4,2.0e4,2.2e4,2.3e4,3.0e4,3.7e4,2.3e4,2.1e4,2.3e4,3.0e4,6.0e4,7.4e4,6.4e4,6.3e4,4.1e4,4.5e4", "", "single-photon Q_i, cell full"},
    {"dielectric.qi_empty", T::number_list, "3.7e4,3.2e4,3.4e4,2.8e4,2.8e4,3.9e4,3.0e4,2.9e4,2.3e4,1.9e4,6.6e4,5.4e4,5.4e4", "", "single-photon Q_i, cell empty"},
    {"dielectric.nu_qubit", T::number, "6e9", "", "qubit frequency, Hz"},
    {"dielectric.splitting", T::number, "1.42e9", "", "hyperfine splitting, Hz"},
    {"dielectric.esr_temperatures", T::number_list, "0.0001,0.005,0.01,0.03,0.06815,0.1,0.3,1", "", "ESR evaluation temperatures, K"},
    {"dielectric.t_c", T::number, "0.9e-3", "", "3He superfluid transition, K"},
    {"dielectric.gap_temperatures", T::number_list, "0,0.0003,0.000675,0.0009", "", "BCS gap evaluation temperatures, K"},
};

std::string address(std::string_view section, std::string_view key) {
  return std::string(section) + "." + std::string(key);
}

bool parse_int(std::string_view s, std::int64_t& out) {
  s = csv::trim(s);
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size() && !s.empty();
}

bool parse_number(std::string_view s, double& out) {
  try {
    out = csv::parse_double(s, "");
    return true;
  } catch (const UsageError&) {
    return false;
  }
}

bool in_choices(std::string_view choices, std::string_view v) {
  for (auto c : csv::split(choices, '|')) {
    if (c == v) return true;
  }
  return false;
}

// Type check of a single value; empty string means "no diagnostic".
std::string type_error(const KeySpec& spec, std::string_view value) {
  double d = 0;
  std::int64_t i = 0;
  switch (spec.type) {
    case T::number:
      return parse_number(value, d) ? "" : "expected a number, got '" + std::string(value) + "'";
    case T::integer:
      return parse_int(value, i) ? "" : "expected an integer, got '" + std::string(value) + "'";
    case T::boolean:
      return (value == "true" || value == "false") ? "" : "expected true|false, got '" + std::string(value) + "'";
    case T::choice:
      return in_choices(spec.choices, value)
                 ? ""
                 : "expected one of " + std::string(spec.choices) + ", got '" + std::string(value) + "'";
    case T::number_list:
      try {
        parse_number_list(value);
      } catch (const UsageError& e) {
        return e.what();
      }
      return "";
    case T::stage_list:
      try {
        parse_stage_list(value);
      } catch (const UsageError& e) {
        return e.what();
      }
      return "";
    case T::text:
      return "";
  }
  return "";
}

}  // namespace

const std::vector<KeySpec>& schema() { return kSchema; }

const KeySpec* find_key(std::string_view key) {
  for (const auto& s : kSchema) {
    if (s.key == key) return &s;
  }
  return nullptr;
}

Config Config::parse(std::istream& in, std::string_view source) {
  Config cfg;
  std::string section;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view body = line;
    if (const auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
    body = csv::trim(body);
    if (body.empty()) continue;
    const std::string where = std::string(source) + ":" + std::to_string(lineno);
    if (body.front() == '[') {
      if (body.back() != ']') throw UsageError(where + ": malformed section header");
      section = std::string(csv::trim(body.substr(1, body.size() - 2)));
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) throw UsageError(where + ": expected key = value");
    if (section.empty()) throw UsageError(where + ": key outside any [section]");
    const std::string key = address(section, csv::trim(body.substr(0, eq)));
    if (!find_key(key)) throw UsageError(where + ": unknown key '" + key + "'");
    if (cfg.entries_.contains(key)) throw UsageError(where + ": duplicate key '" + key + "'");
    cfg.entries_[key] = std::string(csv::trim(body.substr(eq + 1)));
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config '" + path.string() + "'");
  return parse(in, path.string());
}

void Config::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw UsageError("override '" + std::string(assignment) + "' is not of the form section.key=value");
  }
  set(csv::trim(assignment.substr(0, eq)), std::string(csv::trim(assignment.substr(eq + 1))));
}

void Config::set(std::string_view key, std::string value) {
  if (!find_key(key)) throw UsageError("unknown key '" + std::string(key) + "'");
  entries_[std::string(key)] = std::move(value);
}

bool Config::has(std::string_view key) const { return entries_.find(key) != entries_.end(); }

std::optional<std::string> Config::get_optional(std::string_view key) const {
  if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  const KeySpec* spec = find_key(key);
  if (!spec) throw UsageError("unknown key '" + std::string(key) + "'");
  if (spec->default_value.empty()) return std::nullopt;
  return std::string(spec->default_value);
}

std::string Config::get(std::string_view key) const {
  auto v = get_optional(key);
  if (!v && find_key(key)->type == ValueType::text) return {};
  if (!v) throw UsageError("key '" + std::string(key) + "' has no value");
  return *v;
}

double Config::get_double(std::string_view key) const {
  return csv::parse_double(get(key), key);
}

std::int64_t Config::get_int(std::string_view key) const {
  std::int64_t v = 0;
  const std::string s = get(key);
  if (!parse_int(s, v)) throw UsageError(std::string(key) + ": expected an integer, got '" + s + "'");
  return v;
}

std::uint64_t Config::get_uint(std::string_view key) const {
  const std::int64_t v = get_int(key);
  if (v < 0) throw UsageError(std::string(key) + ": must be >= 0");
  return static_cast<std::uint64_t>(v);
}

bool Config::get_bool(std::string_view key) const {
  const std::string s = get(key);
  if (s == "true") return true;
  if (s == "false") return false;
  throw UsageError(std::string(key) + ": expected true|false, got '" + s + "'");
}

std::vector<double> Config::get_list(std::string_view key) const {
  return parse_number_list(get(key));
}

std::string Config::serialize() const {
  std::ostringstream out;
  std::string section;
  for (const auto& spec : kSchema) {
    const auto v = get_optional(spec.key);
    if (!v) continue;
    const auto dot = spec.key.find('.');
    const std::string sec(spec.key.substr(0, dot));
    if (sec != section) {
      out << (section.empty() ? "" : "\n") << '[' << sec << "]\n";
      section = sec;
    }
    out << spec.key.substr(dot + 1) << " = " << *v << '\n';
  }
  return out.str();
}

std::vector<double> parse_number_list(std::string_view text) {
  std::vector<double> out;
  if (csv::trim(text).empty()) return out;
  for (auto item : csv::split(text)) out.push_back(csv::parse_double(item, "list entry"));
  return out;
}

std::vector<StageSpec> parse_stage_list(std::string_view text) {
  std::vector<StageSpec> out;
  if (csv::trim(text).empty()) throw UsageError("stage list is empty");
  for (auto item : csv::split(text)) {
    const auto parts = csv::split(item, ':');
    if (parts.size() != 3 || parts[0].empty()) {
      throw UsageError("stage '" + std::string(item) + "' is not NAME:T_K:dB");
    }
    out.push_back({std::string(parts[0]), csv::parse_double(parts[1], "stage temperature"),
                   csv::parse_double(parts[2], "stage attenuation")});
  }
  return out;
}

std::vector<Diagnostic> validate(const Config& cfg) {
  std::vector<Diagnostic> diags;
  for (const auto& [key, value] : cfg.entries()) {
    const KeySpec* spec = find_key(key);
    if (!spec) {
      diags.push_back({key, "unknown key"});
      continue;
    }
    if (auto err = type_error(*spec, value); !err.empty()) diags.push_back({key, err});
  }
  if (!diags.empty()) return diags;

  auto num = [&](std::string_view k) -> std::optional<double> {
    auto v = cfg.get_optional(k);
    if (!v || v->empty()) return std::nullopt;
    return csv::parse_double(*v, k);
  };
  auto positive = [&](std::string_view k) {
    if (auto v = num(k); v && !(*v > 0.0)) diags.push_back({std::string(k), "must be > 0"});
  };
  auto non_negative = [&](std::string_view k) {
    if (auto v = num(k); v && !(*v >= 0.0)) diags.push_back({std::string(k), "must be >= 0"});
  };
  auto ordered = [&](std::string_view lo, std::string_view hi, bool strict) {
    auto a = num(lo);
    auto b = num(hi);
    if (a && b && (strict ? !(*a < *b) : !(*a <= *b))) {
      diags.push_back({std::string(lo) + ", " + std::string(hi),
                       std::string(lo) + (strict ? " must be < " : " must be <= ") + std::string(hi)});
    }
  };

  if (auto mu = num("bath.mu"); mu && !(*mu >= 0.0 && *mu < 1.0)) diags.push_back({"bath.mu", "must lie in [0, 1)"});
  for (auto k : {"bath.gamma1", "bath.gamma1_min", "bath.gamma1_max", "bath.anchor_temperature",
                 "bath.anchor_rate", "bath.anchor_resonance", "bath.noise_ref_temperature",
                 "bath.noise_ref_freq", "bath.noise_ref_resonance", "bath.noise_ref_s_y"}) {
    positive(k);
  }
  for (auto k : {"bath.nc_calibration", "bath.fluct_density", "bath.interaction_radius",
                 "bath.noise_ref_photons", "bath.f_tan_delta", "bath.chi"}) {
    non_negative(k);
  }
  ordered("bath.gamma1_min", "bath.gamma1", false);
  ordered("bath.gamma1", "bath.gamma1_max", false);

  ordered("synth.gamma_min", "synth.gamma_max", true);
  positive("synth.gamma_min");
  positive("synth.dt");
  positive("synth.gate_time");
  non_negative("synth.h_minus1");
  non_negative("synth.drift_amplitude");
  positive("synth.drift_rate");
  non_negative("synth.loop_gain");
  non_negative("synth.loop_noise");
  if (auto d = num("synth.duration"), dt = num("synth.dt"); d && dt && *dt > 0 && !(*d >= 2.0 * *dt)) {
    diags.push_back({"synth.duration", "must cover at least two samples"});
  }
  if (auto g = num("synth.loop_gain"), t = num("synth.gate_time"); g && t && *g * *t >= 2.0) {
    diags.push_back({"synth.loop_gain, synth.gate_time", "loop_gain * gate_time must be < 2"});
  }

  positive("avar.tau_min");
  ordered("avar.tau_min", "avar.tau_max", false);
  ordered("avar.tau_lo", "avar.tau_hi", true);
  if (cfg.get_int("avar.per_decade") < 1) diags.push_back({"avar.per_decade", "must be >= 1"});

  ordered("fit.n_min", "fit.n_max", true);
  positive("fit.n_min");
  ordered("fit.noise_n_min", "fit.noise_n_max", true);
  positive("fit.noise_n_min");
  non_negative("fit.noise");
  if (auto a = num("fit.empirical_alpha"); a && !(*a > 0.0 && *a <= 1.0)) {
    diags.push_back({"fit.empirical_alpha", "must lie in (0, 1]"});
  }

  positive("sweep.t_min");
  ordered("sweep.t_min", "sweep.t_max", true);
  ordered("sweep.high_lo", "sweep.high_hi", true);
  ordered("sweep.low_lo", "sweep.low_hi", true);
  for (double n : cfg.get_list("sweep.photons")) {
    if (!(n >= 0.0)) diags.push_back({"sweep.photons", "photon numbers must be >= 0"});
  }

  non_negative("chain.input_temperature");
  positive("chain.freq");
  const auto stages = parse_stage_list(cfg.get("chain.stages"));
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const std::string base = "chain.stages[" + std::to_string(i) + "]";
    if (!(stages[i].temperature > 0.0)) diags.push_back({base + ".temperature", "must be > 0"});
    if (!(stages[i].attenuation_db >= 0.0)) diags.push_back({base + ".attenuation_db", "attenuation must be >= 0 dB"});
  }

  for (auto k : {"thermal.wf_resistance", "thermal.t_cold", "thermal.kapitza_coefficient",
                 "thermal.he3_temperature", "thermal.nu0", "thermal.q_internal"}) {
    positive(k);
  }
  non_negative("thermal.heat");
  non_negative("thermal.moles");
  non_negative("thermal.photons");

  if (auto f = num("dielectric.filling"); f && !(*f > 0.0 && *f <= 1.0)) {
    diags.push_back({"dielectric.filling", "must lie in (0, 1]"});
  }
  if (auto e = num("dielectric.eps_svp"); e && !(*e >= 1.0)) diags.push_back({"dielectric.eps_svp", "must be >= 1"});
  positive("dielectric.density_ratio");
  positive("dielectric.splitting");
  positive("dielectric.t_c");
  positive("dielectric.nu_qubit");
  for (auto k : {"dielectric.qi_full", "dielectric.qi_empty"}) {
    const auto q = cfg.get_list(k);
    if (q.empty()) diags.push_back({k, "needs at least one value"});
    for (double v : q) {
      if (!(v > 0.0)) diags.push_back({k, "quality factors must be > 0"});
    }
  }
  for (double t : cfg.get_list("dielectric.esr_temperatures")) {
    if (!(t > 0.0)) diags.push_back({"dielectric.esr_temperatures", "temperatures must be > 0"});
  }
  return diags;
}

std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace tlsnoise::config
