#include "tlsnoise/cryo.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "tlsnoise/constants.hpp"
#include "tlsnoise/csv.hpp"

namespace tlsnoise::cryo {

namespace c = tlsnoise::constants;

void StageChain::validate() const {
  if (stages.empty()) throw DomainError("stage chain is empty");
  if (!(input_temperature >= 0.0)) throw DomainError("input temperature must be >= 0");
  for (const auto& s : stages) {
    if (!(s.temperature > 0.0)) throw DomainError("stage '" + s.name + "' needs temperature > 0");
    if (!(s.attenuation_db >= 0.0)) throw DomainError("stage '" + s.name + "' needs attenuation >= 0 dB");
  }
}

double StageChain::total_attenuation_db() const {
  double total = 0.0;
  for (const auto& s : stages) total += s.attenuation_db;
  return total;
}

StageChain reference_chain() {
  StageChain chain;
  chain.input_temperature = 300.0;
  chain.stages = {{"RTP", 300.0, 0.0},  {"PT1P", 50.0, 0.0}, {"PT2P", 4.0, 20.0},
                  {"CP", 0.1, 20.0},    {"MCP", 0.013, 20.0}, {"ANDRP", 0.013, 0.0}};
  return chain;
}

double bose_einstein(double freq, double temperature) {
  if (!(freq > 0.0)) throw DomainError("frequency must be positive");
  if (temperature < 0.0) throw DomainError("temperature must be >= 0");
  if (temperature == 0.0) return 0.0;
  const double x = freq / (c::kelvin_to_hz * temperature);
  return 1.0 / std::expm1(x);
}

CascadeProfile photon_cascade(const StageChain& chain, double freq) {
  chain.validate();
  CascadeProfile out;
  double n = bose_einstein(freq, chain.input_temperature);
  for (const auto& s : chain.stages) {
    const double inv_a = std::pow(10.0, -s.attenuation_db / 10.0);
    n = n * inv_a + (1.0 - inv_a) * bose_einstein(freq, s.temperature);
    out.occupation.push_back(n);
  }
  out.final_occupation = n;
  return out;
}

double dbm_to_watt(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }
double watt_to_dbm(double watt) { return 10.0 * std::log10(watt / 1e-3); }

LoadProfile active_load(const StageChain& chain, double input_power_dbm) {
  chain.validate();
  LoadProfile out;
  out.input = dbm_to_watt(input_power_dbm);
  double p = out.input;
  for (const auto& s : chain.stages) {
    const double passed = p * std::pow(10.0, -s.attenuation_db / 10.0);
    out.incoming.push_back(p);
    out.dissipated.push_back(p - passed);
    p = passed;
  }
  out.delivered = p;
  return out;
}

double passive_load(const ConductivityLaw& law, double area_over_length, double t_cold,
                    double t_hot) {
  if (!(law.a > 0.0)) throw DomainError("conductivity prefactor must be positive");
  if (!(area_over_length > 0.0)) throw DomainError("area/length must be positive");
  if (!(t_cold > 0.0) || !(t_hot >= t_cold)) throw DomainError("passive load needs 0 < t_cold <= t_hot");
  double integral = 0.0;
  if (std::abs(law.b + 1.0) < 1e-12) {
    integral = law.a * std::log(t_hot / t_cold);
  } else {
    const double e = law.b + 1.0;
    integral = law.a * (std::pow(t_hot, e) - std::pow(t_cold, e)) / e;
  }
  return area_over_length * integral;
}

double kapitza_resistance(double temperature, double coefficient) {
  if (!(temperature > 0.0)) throw DomainError("Kapitza resistance needs T > 0");
  if (!(coefficient > 0.0)) throw DomainError("Kapitza coefficient must be positive");
  return coefficient / temperature;
}

Diagnosed<double> he3_heat_capacity(double temperature, double moles) {
  if (!(temperature > 0.0)) throw DomainError("heat capacity needs T > 0");
  if (moles < 0.0) throw DomainError("amount of 3He must be >= 0");
  Diagnosed<double> out;
  out.value = 2.3 * temperature * (moles / 0.1);
  if (temperature > 0.010) {
    out.warnings.push_back("linear 3He heat capacity used above its 10 mK validity limit");
  }
  return out;
}

double cooling_time_constant(double moles, double coefficient) {
  if (moles < 0.0) throw DomainError("amount of 3He must be >= 0");
  return coefficient * 2.3 * (moles / 0.1);
}

double wf_step(double heat, double resistance, double t_cold) {
  if (heat < 0.0) throw DomainError("heat must be >= 0");
  if (!(resistance > 0.0)) throw DomainError("resistance must be positive");
  if (t_cold < 0.0) throw DomainError("temperature must be >= 0");
  return std::sqrt(t_cold * t_cold + 2.0 * resistance * heat / c::lorenz_number);
}

double kapitza_step(double heat, double temperature, double coefficient) {
  if (heat < 0.0) throw DomainError("heat must be >= 0");
  return heat * kapitza_resistance(temperature, coefficient);
}

void ThermalLink::validate() const {
  if (!(coefficient > 0.0)) throw DomainError("thermal link coefficient must be positive");
}

double link_hot_temperature(const ThermalLink& link, double heat, double t_cold) {
  link.validate();
  if (link.kind == LinkKind::kapitza) return t_cold + kapitza_step(heat, t_cold, link.coefficient);
  return wf_step(heat, link.coefficient, t_cold);
}

CellTemperatures cell_temperatures(double heat, double resistance, double t_cold,
                                   double kapitza_coefficient) {
  CellTemperatures t;
  t.t_cold = t_cold;
  t.t_hx = wf_step(heat, resistance, t_cold);
  t.t_he3 = t.t_hx + kapitza_step(heat, t.t_hx, kapitza_coefficient);
  return t;
}

double dissipated_power(double photon_number, double nu0, double q_internal) {
  if (photon_number < 0.0) throw DomainError("photon number must be >= 0");
  if (!(nu0 > 0.0) || !(q_internal > 0.0)) throw DomainError("frequency and Q_i must be positive");
  const double w = 2.0 * c::pi * nu0;
  return photon_number * c::pi * c::hbar * w * w / (2.0 * q_internal);
}

double circulating_power(double photon_number, double nu0) {
  if (photon_number < 0.0) throw DomainError("photon number must be >= 0");
  const double w = 2.0 * c::pi * nu0;
  return photon_number * c::hbar * w * w;
}

void write_budget_table(std::ostream& out, const StageChain& chain, const CascadeProfile& photons,
                        const LoadProfile& loads) {
  char line[160];
  std::snprintf(line, sizeof line, "%-8s %12s %8s %14s %14s %14s\n", "stage", "T[K]", "att[dB]",
                "n_thermal", "P_in[W]", "P_diss[W]");
  out << line;
  for (std::size_t i = 0; i < chain.stages.size(); ++i) {
    const auto& s = chain.stages[i];
    std::snprintf(line, sizeof line, "%-8s %12.6g %8.2f %14.6e %14.6e %14.6e\n", s.name.c_str(),
                  s.temperature, s.attenuation_db, photons.occupation[i], loads.incoming[i],
                  loads.dissipated[i]);
    out << line;
  }
  std::snprintf(line, sizeof line, "final occupation %.6e, delivered %.6e W (%.3f dBm)\n",
                photons.final_occupation, loads.delivered, watt_to_dbm(loads.delivered));
  out << line;
}

void write_budget_csv(std::ostream& out, const StageChain& chain, const CascadeProfile& photons,
                      const LoadProfile& loads) {
  out << "stage,temperature,attenuation_db,occupation,incoming_w,dissipated_w\n";
  for (std::size_t i = 0; i < chain.stages.size(); ++i) {
    const auto& s = chain.stages[i];
    out << s.name << ',' << csv::fmt(s.temperature) << ',' << csv::fmt(s.attenuation_db) << ','
        << csv::fmt(photons.occupation[i]) << ',' << csv::fmt(loads.incoming[i]) << ','
        << csv::fmt(loads.dissipated[i]) << '\n';
  }
}

}  // namespace tlsnoise::cryo
