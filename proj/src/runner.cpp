#include "tlsnoise/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "tlsnoise/bath.hpp"
#include "tlsnoise/csv.hpp"
#include "tlsnoise/cryo.hpp"
#include "tlsnoise/dielectric.hpp"
#include "tlsnoise/errors.hpp"
#include "tlsnoise/fit.hpp"
#include "tlsnoise/rng.hpp"
#include "tlsnoise/spectral.hpp"

#ifndef TLSNOISE_VERSION
#define TLSNOISE_VERSION "dev"
#endif

namespace tlsnoise::runner {

namespace fs = std::filesystem;
using config::Config;

namespace {

constexpr std::uint64_t domain_fit_noise = 10;

struct Context {
  Config cfg;
  fs::path out;
  std::uint64_t seed = 1;
  gtm::BathConfig bath;
  std::vector<std::pair<std::string, std::string>> results;
  std::vector<std::string> warnings;
  std::vector<std::pair<std::string, double>> timings;
  std::vector<std::string> files;

  void result(const std::string& key, double v) { results.emplace_back(key, csv::fmt(v)); }
  void result(const std::string& key, const std::string& v) { results.emplace_back(key, v); }

  void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
    std::ofstream f(out / name, std::ios::binary);
    if (!f) throw UsageError("cannot write '" + (out / name).string() + "'");
    body(f);
    files.push_back(name);
  }

  template <class F>
  auto timed(const std::string& step, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      timings.emplace_back(step, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    } else {
      auto r = f();
      timings.emplace_back(step, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      return r;
    }
  }
};

std::string escape(std::string_view s) {
  std::string out;
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch == '\n' ? ' ' : ch;
  }
  return out;
}

std::vector<std::vector<std::string>> read_csv_rows(const fs::path& path, std::size_t columns) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read '" + path.string() + "'");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    const auto body = csv::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto fields = csv::split(body);
    if (fields.size() != columns) {
      throw UsageError(path.string() + ": expected " + std::to_string(columns) + " columns");
    }
    double probe = 0;
    const bool numeric = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), probe).ec == std::errc{};
    if (!numeric && !header_seen && rows.empty()) {
      header_seen = true;
      continue;
    }
    rows.emplace_back(fields.begin(), fields.end());
  }
  return rows;
}

fs::path input_path(const Context& ctx, const std::string& value, const fs::path& config_dir) {
  (void)ctx;
  fs::path p(value);
  return p.is_absolute() ? p : config_dir / p;
}

// ---------------------------------------------------------------- synthesis

bath::FrequencyTrace synthesize_from_config(Context& ctx) {
  const Config& c = ctx.cfg;
  const auto n_fluct = static_cast<std::size_t>(c.get_uint("synth.n_fluct"));
  const double g_lo = c.get_double("synth.gamma_min");
  const double g_hi = c.get_double("synth.gamma_max");
  double amplitude = 0.0;
  if (n_fluct > 0) {
    const auto cal = bath::calibrate_amplitude(c.get_double("synth.h_minus1"), n_fluct, g_lo, g_hi);
    amplitude = cal.value;
    for (const auto& w : cal.warnings) ctx.warnings.push_back("calibrate_amplitude: " + w);
  }
  bath::BathOptions opts;
  opts.distribution = c.get("synth.amplitude_distribution") == "lognormal"
                          ? bath::AmplitudeDistribution::lognormal
                          : bath::AmplitudeDistribution::equal;
  opts.lognormal_sigma = c.get_double("synth.lognormal_sigma");
  auto ensemble = bath::sample_bath(n_fluct, g_lo, g_hi, amplitude, ctx.seed, opts);
  const double drift = c.get_double("synth.drift_amplitude");
  if (drift > 0.0) {
    ensemble = bath::with_drift_fluctuator(std::move(ensemble), drift, c.get_double("synth.drift_rate"));
  }
  if (opts.distribution == bath::AmplitudeDistribution::equal) {
    ctx.warnings.push_back("fluctuator amplitudes are equal by assumption (modelling choice)");
  }
  ctx.result("fluctuator_amplitude", amplitude);

  bath::SynthOptions so;
  so.nu_mean = c.get_double("synth.nu_mean");
  so.threads = static_cast<unsigned>(c.get_uint("run.threads"));
  so.per_gate_threshold = c.get_double("synth.per_gate_threshold");
  auto trace = ctx.timed("synthesize", [&] {
    return bath::synthesize_trace(ensemble, c.get_double("synth.duration"), c.get_double("synth.dt"),
                                  ctx.seed, so);
  });
  const double gain = c.get_double("synth.loop_gain");
  if (gain > 0.0) {
    trace = ctx.timed("pound_loop", [&] {
      return bath::simulate_pound_loop(trace, gain, c.get_double("synth.loop_noise"),
                                       c.get_double("synth.gate_time"), ctx.seed);
    });
    ctx.result("pound_loop_gain", gain);
  }
  ctx.result("samples", std::to_string(trace.size()));
  return trace;
}

void run_synth(Context& ctx) {
  const auto trace = synthesize_from_config(ctx);
  double mean = 0, ss = 0;
  for (double y : trace.samples) mean += y;
  mean /= static_cast<double>(trace.size());
  for (double y : trace.samples) ss += (y - mean) * (y - mean);
  ctx.result("trace_std", std::sqrt(ss / static_cast<double>(trace.size())));
  ctx.write("trace.csv", [&](std::ostream& o) { bath::write_trace_csv(o, trace); });
  ctx.write("plot.gp", [](std::ostream& o) {
    o << "set datafile separator ','\nset xlabel 'time [s]'\nset ylabel 'y'\n"
         "plot 'trace.csv' using 1:2 every ::1 with lines title 'fractional frequency'\n";
  });
}

// --------------------------------------------------------------------- avar

std::vector<std::pair<double, double>> parse_windows(const std::string& text) {
  std::vector<std::pair<double, double>> out;
  if (csv::trim(text).empty()) return out;
  for (auto item : csv::split(text)) {
    const auto parts = csv::split(item, ':');
    if (parts.size() != 2) throw UsageError("exclusion window '" + std::string(item) + "' is not lo:hi");
    out.emplace_back(csv::parse_double(parts[0], "window start"), csv::parse_double(parts[1], "window end"));
  }
  return out;
}

void run_avar(Context& ctx, const fs::path& config_dir) {
  const Config& c = ctx.cfg;
  bath::FrequencyTrace trace;
  if (const std::string path = c.get("avar.trace"); !path.empty()) {
    std::ifstream in(input_path(ctx, path, config_dir));
    if (!in) throw UsageError("cannot read trace '" + path + "'");
    trace = bath::read_trace_csv(in);
  } else {
    trace = synthesize_from_config(ctx);
  }
  spectral::AvarOptions opts;
  opts.mode = c.get("avar.mode") == "raw" ? spectral::AvarMode::raw_adjacent : spectral::AvarMode::overlapping;
  opts.detrend = c.get_bool("avar.detrend");
  const auto taus = spectral::log_tau_grid(trace.dt, c.get_double("avar.tau_min"), c.get_double("avar.tau_max"),
                                           static_cast<std::size_t>(c.get_uint("avar.per_decade")));
  const auto avar = ctx.timed("avar", [&] { return spectral::overlapping_avar(trace, taus, opts); });
  for (const auto& w : avar.warnings) ctx.warnings.push_back("overlapping_avar: " + w);
  ctx.write("avar.csv", [&](std::ostream& o) { spectral::write_avar_csv(o, avar); });

  const double lo = c.get_double("avar.tau_lo");
  const double hi = c.get_double("avar.tau_hi");
  if (opts.mode == spectral::AvarMode::overlapping) {
    const auto est = spectral::extract_h_minus1(avar, lo, hi, parse_windows(c.get("avar.exclude")));
    ctx.result("h_minus1", est.h_minus1);
    ctx.result("h_minus1_stderr", est.std_error);
    ctx.result("a0", est.a0);
    ctx.result("h_minus1_points", std::to_string(est.n_points));
    // Log-log slope of sigma^2 over the window, as a flatness check.
    std::vector<double> x, y;
    for (std::size_t i = 0; i < avar.taus.size(); ++i) {
      if (avar.taus[i] >= lo && avar.taus[i] <= hi && avar.sigma2[i] > 0.0) {
        x.push_back(avar.taus[i]);
        y.push_back(avar.sigma2[i]);
      }
    }
    if (x.size() >= 3) ctx.result("avar_loglog_slope", fit::fit_powerlaw(x, y, {}, lo, hi).param("beta"));
  }

  const auto segments = static_cast<std::size_t>(c.get_uint("avar.psd_segments"));
  if (segments > 0 && trace.size() / segments >= 16) {
    const auto psd = ctx.timed("periodogram", [&] { return spectral::psd_periodogram(trace, segments); });
    ctx.write("psd.csv", [&](std::ostream& o) { spectral::write_psd_csv(o, psd); });
    try {
      ctx.result("h_minus1_from_psd", spectral::h_minus1_from_psd(psd, 1.0 / hi, 1.0 / lo));
    } catch (const UsageError& e) {
      ctx.warnings.push_back(std::string("psd h_-1 skipped: ") + e.what());
    }
  }
  ctx.write("plot.gp", [](std::ostream& o) {
    o << "set datafile separator ','\nset logscale xy\nset xlabel 'tau [s]'\nset ylabel 'sigma_y^2'\n"
         "plot 'avar.csv' using 1:2:3 every ::1 with yerrorbars title 'overlapping AVAR'\n";
  });
}

// ------------------------------------------------------------------ fitting

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double f = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    out[i] = lo * std::pow(hi / lo, f);
  }
  return out;
}

void run_fit_qn(Context& ctx, const fs::path& config_dir) {
  const Config& c = ctx.cfg;
  const auto model = fit::parse_qi_model(c.get("fit.model"));
  std::map<double, std::pair<std::vector<double>, std::vector<double>>> curves;
  if (const std::string path = c.get("fit.data"); !path.empty()) {
    for (const auto& row : read_csv_rows(input_path(ctx, path, config_dir), 3)) {
      auto& cv = curves[csv::parse_double(row[0], "temperature")];
      cv.first.push_back(csv::parse_double(row[1], "n"));
      cv.second.push_back(csv::parse_double(row[2], "qi"));
    }
  } else {
    const double noise = c.get_double("fit.noise");
    const auto ns = log_grid(c.get_double("fit.n_min"), c.get_double("fit.n_max"),
                             static_cast<std::size_t>(c.get_uint("fit.n_points")));
    std::uint64_t stream = 0;
    for (double t : c.get_list("fit.temperatures")) {
      CounterRng rng(ctx.seed, stream++, domain_fit_noise);
      std::normal_distribution<double> z;
      auto& cv = curves[t];
      for (double n : ns) {
        double q = 0.0;
        if (model == fit::QiModel::gtm) {
          q = gtm::qi_gtm(gtm::make_drive(ctx.bath, n, ctx.bath.gamma2_anchor.resonance, t), ctx.bath, t);
        } else {
          q = gtm::qi_empirical(n, ctx.bath.f_tan_delta, c.get_double("fit.empirical_n_c"),
                                c.get_double("fit.empirical_alpha"));
        }
        cv.first.push_back(n);
        cv.second.push_back(q * std::exp(noise * z(rng)));
      }
    }
  }
  ctx.write("qn_data.csv", [&](std::ostream& o) {
    o << "temperature,n,qi\n";
    for (const auto& [t, cv] : curves) {
      for (std::size_t i = 0; i < cv.first.size(); ++i) {
        o << csv::fmt(t) << ',' << csv::fmt(cv.first[i]) << ',' << csv::fmt(cv.second[i]) << '\n';
      }
    }
  });

  std::vector<double> temps, c_nc;
  std::ostringstream fits;
  bool header = false;
  for (const auto& [t, cv] : curves) {
    const auto res = ctx.timed("fit_qi_vs_n", [&] { return fit::fit_qi_vs_n(cv.first, cv.second, model); });
    if (!header) {
      fits << "temperature";
      for (const auto& n : res.names) fits << ',' << n << ',' << n << "_stderr";
      fits << ",converged\n";
      header = true;
    }
    fits << csv::fmt(t);
    for (std::size_t i = 0; i < res.params.size(); ++i) {
      fits << ',' << csv::fmt(res.params[i]) << ',' << csv::fmt(res.std_error[i]);
    }
    fits << ',' << (res.converged ? "true" : "false") << '\n';
    if (!res.converged) ctx.warnings.push_back("Q fit at T=" + csv::fmt(t) + " did not converge");
    if (model == fit::QiModel::gtm) {
      temps.push_back(t);
      c_nc.push_back(res.param("c_nc"));
    }
    for (std::size_t i = 0; i < res.names.size(); ++i) {
      ctx.result("T=" + csv::fmt(t) + " " + res.names[i], res.params[i]);
    }
  }
  ctx.write("qn_fits.csv", [&](std::ostream& o) { o << fits.str(); });
  if (temps.size() >= 3) {
    const auto pl = fit::fit_powerlaw(temps, c_nc, {}, temps.front(), temps.back());
    ctx.result("c_nc_temperature_slope", pl.param("beta"));
    ctx.result("c_nc_temperature_slope_stderr", pl.error("beta"));
  }
  ctx.write("plot.gp", [](std::ostream& o) {
    o << "set datafile separator ','\nset logscale x\nset xlabel '<N>'\nset ylabel 'Q_i'\n"
         "plot 'qn_data.csv' using 2:3 every ::1 with points title 'Q_i'\n";
  });
}

void run_fit_noise(Context& ctx, const fs::path& config_dir) {
  const Config& c = ctx.cfg;
  std::vector<double> ns, sy, se;
  if (const std::string path = c.get("fit.data"); !path.empty()) {
    for (const auto& row : read_csv_rows(input_path(ctx, path, config_dir), 3)) {
      ns.push_back(csv::parse_double(row[0], "n"));
      sy.push_back(csv::parse_double(row[1], "s_y"));
      se.push_back(csv::parse_double(row[2], "s_err"));
    }
  } else {
    const double t = c.get_double("fit.noise_temperature");
    const double noise = c.get_double("fit.noise");
    ns = log_grid(c.get_double("fit.noise_n_min"), c.get_double("fit.noise_n_max"),
                  static_cast<std::size_t>(c.get_uint("fit.noise_points")));
    CounterRng rng(ctx.seed, 0, domain_fit_noise);
    std::normal_distribution<double> z;
    for (double n : ns) {
      const auto drive = gtm::make_drive(ctx.bath, n, ctx.bath.gamma2_anchor.resonance, t);
      const double s = gtm::noise_magnitude(ctx.bath, drive, t, 1.0).s_y;
      sy.push_back(s * std::exp(noise * z(rng)));
      se.push_back(noise > 0.0 ? noise * s : s);
    }
    ctx.result("model_n_c_eff", gtm::effective_critical_photon_number(ctx.bath, t, ctx.bath.gamma2_anchor.resonance));
  }
  const auto res = ctx.timed("fit_noise_vs_n", [&] { return fit::fit_noise_vs_n(ns, sy, se); });
  ctx.write("noise_data.csv", [&](std::ostream& o) {
    o << "n,s_y,s_err\n";
    for (std::size_t i = 0; i < ns.size(); ++i) {
      o << csv::fmt(ns[i]) << ',' << csv::fmt(sy[i]) << ',' << csv::fmt(se[i]) << '\n';
    }
  });
  ctx.write("noise_fit.txt", [&](std::ostream& o) { fit::write_fit_report(o, res); });
  ctx.result("plateau", res.param("plateau"));
  ctx.result("plateau_stderr", res.error("plateau"));
  ctx.result("n_c", res.param("n_c"));
  ctx.result("n_c_stderr", res.error("n_c"));
  for (const auto& f : res.flags) ctx.warnings.push_back("fit_noise_vs_n: " + f);
  ctx.write("plot.gp", [](std::ostream& o) {
    o << "set datafile separator ','\nset logscale xy\nset xlabel '<N>'\nset ylabel 'S_y(1 Hz)'\n"
         "plot 'noise_data.csv' using 1:2:3 every ::1 with yerrorbars title 'S_y'\n";
  });
}

// -------------------------------------------------------------------- sweep

void run_sweep(Context& ctx) {
  const Config& c = ctx.cfg;
  const auto temps = log_grid(c.get_double("sweep.t_min"), c.get_double("sweep.t_max"),
                              static_cast<std::size_t>(c.get_uint("sweep.n_points")));
  const double f = c.get_double("sweep.fourier_freq");
  const double nu0 = c.get_double("sweep.resonance");
  const auto regime = gtm::parse_regime(c.get("sweep.regime"));
  const double hlo = c.get_double("sweep.high_lo"), hhi = c.get_double("sweep.high_hi");
  const double llo = c.get_double("sweep.low_lo"), lhi = c.get_double("sweep.low_hi");

  std::ostringstream data;
  data << "temperature,photons,s_y,regime\n";
  std::vector<SweepFit> fits;
  for (double n : c.get_list("sweep.photons")) {
    std::vector<double> s;
    for (double t : temps) {
      const auto est = gtm::noise_magnitude(ctx.bath, gtm::make_drive(ctx.bath, n, nu0, t), t, f, regime);
      s.push_back(est.s_y);
      data << csv::fmt(t) << ',' << csv::fmt(n) << ',' << csv::fmt(est.s_y) << ',' << gtm::to_string(est.regime) << '\n';
    }
    const auto high = fit::fit_powerlaw(temps, s, {}, hlo, hhi);
    const auto low = fit::fit_powerlaw(temps, s, {}, llo, lhi);
    SweepFit sf;
    sf.photons = n;
    sf.high_slope = high.param("beta");
    sf.high_slope_err = high.error("beta");
    sf.low_slope = low.param("beta");
    sf.low_slope_err = low.error("beta");
    sf.crossover = std::exp(std::log(low.param("prefactor") / high.param("prefactor")) /
                            (sf.high_slope - sf.low_slope));
    sf.model_crossover = gtm::crossover_temperature(ctx.bath, gtm::make_drive(ctx.bath, n, nu0, sf.crossover),
                                                    gtm::CrossoverKind::relaxation);
    fits.push_back(sf);
    const std::string tag = "N=" + csv::fmt(n) + " ";
    ctx.result(tag + "high_slope", sf.high_slope);
    ctx.result(tag + "low_slope", sf.low_slope);
    ctx.result(tag + "crossover_K", sf.crossover);
  }
  ctx.write("sweep.csv", [&](std::ostream& o) { o << data.str(); });
  ctx.write("sweep_fits.csv", [&](std::ostream& o) {
    o << "photons,high_slope,high_slope_err,low_slope,low_slope_err,crossover_k,model_crossover_k\n";
    for (const auto& sf : fits) {
      o << csv::fmt(sf.photons) << ',' << csv::fmt(sf.high_slope) << ',' << csv::fmt(sf.high_slope_err) << ','
        << csv::fmt(sf.low_slope) << ',' << csv::fmt(sf.low_slope_err) << ',' << csv::fmt(sf.crossover) << ','
        << csv::fmt(sf.model_crossover) << '\n';
    }
  });
  ctx.write("plot.gp", [](std::ostream& o) {
    o << "set datafile separator ','\nset logscale xy\nset xlabel 'T [K]'\nset ylabel 'S_y [1/Hz]'\n"
         "plot 'sweep.csv' using 1:3 every ::1 with points title 'S_y(T)'\n";
  });
}

// ------------------------------------------------------------------- budget

void run_budget(Context& ctx) {
  const Config& c = ctx.cfg;
  cryo::StageChain chain;
  chain.input_temperature = c.get_double("chain.input_temperature");
  for (const auto& s : config::parse_stage_list(c.get("chain.stages"))) {
    chain.stages.push_back({s.name, s.temperature, s.attenuation_db});
  }
  const auto photons = cryo::photon_cascade(chain, c.get_double("chain.freq"));
  const auto loads = cryo::active_load(chain, c.get_double("chain.input_power_dbm"));
  ctx.write("budget.csv", [&](std::ostream& o) { cryo::write_budget_csv(o, chain, photons, loads); });
  ctx.write("budget.txt", [&](std::ostream& o) { cryo::write_budget_table(o, chain, photons, loads); });
  ctx.result("total_attenuation_db", chain.total_attenuation_db());
  ctx.result("final_occupation", photons.final_occupation);
  ctx.result("delivered_dbm", cryo::watt_to_dbm(loads.delivered));

  const double kap = c.get_double("thermal.kapitza_coefficient");
  const auto cell = cryo::cell_temperatures(c.get_double("thermal.heat"), c.get_double("thermal.wf_resistance"),
                                            c.get_double("thermal.t_cold"), kap);
  ctx.result("t_hx_K", cell.t_hx);
  ctx.result("t_he3_K", cell.t_he3);
  ctx.result("kapitza_resistance_at_t_hx", cryo::kapitza_resistance(cell.t_hx, kap));
  const auto cap = cryo::he3_heat_capacity(c.get_double("thermal.he3_temperature"), c.get_double("thermal.moles"));
  for (const auto& w : cap.warnings) ctx.warnings.push_back("he3_heat_capacity: " + w);
  ctx.result("he3_heat_capacity_J_per_K", cap.value);
  ctx.result("cooling_time_constant_s", cryo::cooling_time_constant(c.get_double("thermal.moles"), kap));
  const double n = c.get_double("thermal.photons"), nu0 = c.get_double("thermal.nu0");
  ctx.result("dissipated_power_W", cryo::dissipated_power(n, nu0, c.get_double("thermal.q_internal")));
  ctx.result("circulating_power_W", cryo::circulating_power(n, nu0));

  const auto a = c.get_optional("thermal.conductivity_a");
  if (a && !a->empty()) {
    cryo::ConductivityLaw law{c.get_double("thermal.conductivity_a"), c.get_double("thermal.conductivity_b")};
    ctx.result("passive_load_W", cryo::passive_load(law, c.get_double("thermal.area_over_length"),
                                                    c.get_double("thermal.passive_t_cold"),
                                                    c.get_double("thermal.passive_t_hot")));
  }
  ctx.write("plot.gp", [](std::ostream& o) {
    o << "set datafile separator ','\nset logscale y\nset ylabel 'thermal photons'\nset style data linespoints\n"
         "plot 'budget.csv' using 0:4:xtic(1) every ::1 title 'occupation after stage'\n";
  });
}

// --------------------------------------------------------------- dielectric

void run_dielectric(Context& ctx, const fs::path& config_dir) {
  const Config& c = ctx.cfg;
  double filling = c.get_double("dielectric.filling");
  if (const std::string path = c.get("dielectric.fields"); !path.empty()) {
    std::ifstream in(input_path(ctx, path, config_dir));
    if (!in) throw UsageError("cannot read field samples '" + path + "'");
    filling = dielectric::filling_factor(dielectric::read_field_samples_csv(in));
  }
  const double nu0 = c.get_double("dielectric.nu0");
  const double eps = c.get_double("dielectric.eps_svp");
  const double shift = dielectric::fill_freq_shift(nu0, filling, eps);
  double participation = c.get_double("dielectric.film_participation");
  if (const std::string path = c.get("dielectric.participation"); !path.empty()) {
    std::ifstream in(input_path(ctx, path, config_dir));
    if (!in) throw UsageError("cannot read participation table '" + path + "'");
    participation = dielectric::read_participation_csv(in).at(c.get_double("dielectric.film_thickness_nm"));
  }
  const double eps_p = dielectric::pressure_eps(eps, c.get_double("dielectric.density_ratio"));
  const auto qf = c.get_list("dielectric.qi_full");
  const auto qe = c.get_list("dielectric.qi_empty");
  const auto bound = dielectric::loss_tangent_bound(dielectric::mean_q(qf), dielectric::mean_q(qe), filling);
  const double t1 = dielectric::t1_bound(c.get_double("dielectric.nu_qubit"), filling, bound.tan_delta);
  const double t_c = c.get_double("dielectric.t_c");
  const dielectric::HyperfineModel hf{c.get_double("dielectric.splitting")};

  std::vector<std::pair<std::string, double>> rows = {
      {"filling_factor", filling},
      {"fill_shift_hz", shift},
      {"film_participation", participation},
      {"film_shift_hz", dielectric::film_freq_shift(shift, participation)},
      {"eps_compressed", eps_p},
      {"compressed_extra_shift_hz", dielectric::fill_freq_shift(nu0, filling, eps_p) - shift},
      {"mean_qi_full", dielectric::mean_q(qf)},
      {"mean_qi_empty", dielectric::mean_q(qe)},
      {"f_tan_delta_bound", bound.f_tan_delta},
      {"tan_delta_bound", bound.tan_delta},
      {"t1_bound_s", t1},
      {"hyperfine_temperature_k", hf.equivalent_temperature()},
      {"gamma1_pressure_factor", gtm::relax_rate_ratio(gtm::compressed(gtm::helium3_svp(), 1.3, 1.3), gtm::helium3_svp())},
  };
  ctx.write("dielectric.csv", [&](std::ostream& o) {
    o << "quantity,value\n";
    for (const auto& [k, v] : rows) o << k << ',' << csv::fmt(v) << '\n';
  });
  for (const auto& [k, v] : rows) ctx.result(k, v);
  ctx.warnings.push_back("t1_bound uses T1 = 1/(nu F tan_delta); a 2 pi convention would give a 2 pi shorter bound");

  ctx.write("esr.csv", [&](std::ostream& o) {
    o << "temperature,ratio,normalized\n";
    for (double t : c.get_list("dielectric.esr_temperatures")) {
      const auto e = dielectric::esr_peak_ratio(t, hf);
      o << csv::fmt(t) << ',' << csv::fmt(e.ratio) << ',' << csv::fmt(e.normalized) << '\n';
    }
  });
  ctx.write("gap.csv", [&](std::ostream& o) {
    o << "temperature,gap_hz,normal_state\n";
    for (double t : c.get_list("dielectric.gap_temperatures")) {
      const auto g = dielectric::he3_bcs_gap(t, t_c);
      o << csv::fmt(t) << ',' << csv::fmt(g.gap) << ',' << (g.normal_state ? "true" : "false") << '\n';
    }
  });
  ctx.write("plot.gp", [](std::ostream& o) {
    o << "set datafile separator ','\nset logscale x\nset xlabel 'T [K]'\nset ylabel 'I3/I1'\n"
         "plot 'esr.csv' using 1:2 every ::1 with linespoints title 'ratio', "
         "'esr.csv' using 1:3 every ::1 with linespoints title 'normalized'\n";
  });
}

// ------------------------------------------------------------------- report

void write_report(Context& ctx, const std::string& scenario, const std::string& digest) {
  ctx.write("report.txt", [&](std::ostream& o) {
    o << "tool tlsnoise " << TLSNOISE_VERSION << '\n';
    o << "scenario " << scenario << '\n';
    o << "seed " << ctx.seed << '\n';
    o << "config_digest fnv1a64:" << digest << '\n';
    o << "\n[results]\n";
    for (const auto& [k, v] : ctx.results) o << k << " = " << v << '\n';
    o << "\n[warnings]\n";
    for (const auto& w : ctx.warnings) o << w << '\n';
    o << "\n[timings_s]\n";
    for (const auto& [k, v] : ctx.timings) o << k << " = " << csv::fmt(v) << '\n';
    o << "\n[files]\n";
    for (const auto& f : ctx.files) o << f << '\n';
  });
}

}  // namespace

fs::path default_output_root() {
  if (const char* env = std::getenv("TLSNOISE_OUT"); env && *env) return env;
  return "tlsnoise_out";
}

gtm::BathConfig resolve_bath(Config& cfg) {
  gtm::BathConfig b = cfg.get("bath.preset") == "helium" ? gtm::BathConfig::helium() : gtm::BathConfig::vacuum();
  struct Field {
    const char* key;
    double* target;
  };
  const Field fields[] = {
      {"bath.mu", &b.mu},
      {"bath.chi", &b.chi},
      {"bath.gamma1", &b.gamma1},
      {"bath.gamma1_min", &b.gamma1_min},
      {"bath.gamma1_max", &b.gamma1_max},
      {"bath.anchor_temperature", &b.gamma2_anchor.temperature},
      {"bath.anchor_rate", &b.gamma2_anchor.rate},
      {"bath.anchor_resonance", &b.gamma2_anchor.resonance},
      {"bath.fluct_density", &b.fluct_density},
      {"bath.interaction_radius", &b.interaction_radius},
      {"bath.u0", &b.u0},
      {"bath.p_gamma", &b.p_gamma},
      {"bath.c_const", &b.c_const},
      {"bath.f_tan_delta", &b.f_tan_delta},
      {"bath.nc_calibration", &b.nc_calibration},
      {"bath.low_t_exponent", &b.low_t_exponent},
      {"bath.noise_ref_temperature", &b.noise_reference.temperature},
      {"bath.noise_ref_photons", &b.noise_reference.photons},
      {"bath.noise_ref_freq", &b.noise_reference.fourier_freq},
      {"bath.noise_ref_resonance", &b.noise_reference.resonance},
      {"bath.noise_ref_s_y", &b.noise_reference.s_y},
  };
  for (const auto& f : fields) {
    if (auto v = cfg.get_optional(f.key); v && !v->empty()) *f.target = csv::parse_double(*v, f.key);
  }
  b.validate();
  for (const auto& f : fields) cfg.set(f.key, csv::fmt(*f.target));
  return b;
}

int run(const RunRequest& request, std::ostream& out, std::ostream& err) {
  try {
    Config cfg = Config::load(request.config_path);
    for (const auto& o : request.overrides) cfg.apply_override(o);
    if (!request.scenario.empty()) cfg.set("run.scenario", request.scenario);
    if (request.seed) cfg.set("run.seed", std::to_string(*request.seed));

    const auto diags = config::validate(cfg);
    if (!diags.empty()) {
      std::string msg;
      for (const auto& d : diags) msg += (msg.empty() ? "" : "; ") + d.key + ": " + d.message;
      throw UsageError("invalid configuration: " + msg);
    }

    Context ctx;
    ctx.bath = resolve_bath(cfg);
    ctx.seed = cfg.get_uint("run.seed");
    const std::string scenario = cfg.get("run.scenario");
    ctx.out = request.out_dir ? *request.out_dir : default_output_root() / scenario;
    fs::create_directories(ctx.out);
    ctx.cfg = cfg;

    const std::string effective = cfg.serialize();
    const std::string digest = config::fnv1a_hex(effective);
    ctx.write("effective.conf", [&](std::ostream& o) { o << effective; });

    const fs::path config_dir = request.config_path.has_parent_path() ? request.config_path.parent_path() : fs::path(".");
    if (scenario == "synth") {
      run_synth(ctx);
    } else if (scenario == "avar") {
      run_avar(ctx, config_dir);
    } else if (scenario == "fit-qn") {
      run_fit_qn(ctx, config_dir);
    } else if (scenario == "fit-noise") {
      run_fit_noise(ctx, config_dir);
    } else if (scenario == "sweep-temp") {
      run_sweep(ctx);
    } else if (scenario == "budget") {
      run_budget(ctx);
    } else if (scenario == "dielectric") {
      run_dielectric(ctx, config_dir);
    } else {
      throw UsageError("unknown scenario '" + scenario + "'");
    }
    write_report(ctx, scenario, digest);
    for (const auto& [k, v] : ctx.results) out << k << " = " << v << '\n';
    for (const auto& w : ctx.warnings) out << "warning: " << w << '\n';
    out << "output " << ctx.out.string() << '\n';
    return exit_ok;
  } catch (const UsageError& e) {
    err << "error kind=usage message=\"" << escape(e.what()) << "\"\n";
    return exit_usage;
  } catch (const DomainError& e) {
    err << "error kind=domain message=\"" << escape(e.what()) << "\"\n";
    return exit_domain;
  } catch (const fs::filesystem_error& e) {
    err << "error kind=usage message=\"" << escape(e.what()) << "\"\n";
    return exit_usage;
  } catch (const std::exception& e) {
    err << "error kind=domain message=\"" << escape(e.what()) << "\"\n";
    return exit_domain;
  }
}

int validate_file(const fs::path& config_path, std::ostream& out, std::ostream& err) {
  Config cfg;
  try {
    cfg = Config::load(config_path);
  } catch (const UsageError& e) {
    out << "config: " << e.what() << '\n';
    (void)err;
    return 1;
  }
  const auto diags = config::validate(cfg);
  for (const auto& d : diags) out << d.key << ": " << d.message << '\n';
  return diags.empty() ? 0 : 1;
}

std::vector<SweepFit> read_sweep_fits(const fs::path& csv_path) {
  std::vector<SweepFit> out;
  for (const auto& row : read_csv_rows(csv_path, 7)) {
    SweepFit s;
    double* dst[] = {&s.photons, &s.high_slope, &s.high_slope_err, &s.low_slope,
                     &s.low_slope_err, &s.crossover, &s.model_crossover};
    for (std::size_t i = 0; i < 7; ++i) *dst[i] = csv::parse_double(row[i], "sweep fit");
    out.push_back(s);
  }
  return out;
}

}  // namespace tlsnoise::runner
