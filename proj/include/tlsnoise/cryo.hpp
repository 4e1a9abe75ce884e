#pragma once

// Cryostat budget: thermal photons through an attenuator chain, RF heat
// loads, boundary and metallic thermal links, and resonator dissipation.

#include <iosfwd>
#include <string>
#include <vector>

#include "tlsnoise/errors.hpp"

namespace tlsnoise::cryo {

struct Stage {
  std::string name;
  double temperature = 0.0;     // K
  double attenuation_db = 0.0;  // lumped attenuator plus the cable feeding it
};

/// Stages in signal order, hot side first. Temperatures need not be monotone.
struct StageChain {
  std::vector<Stage> stages;
  double input_temperature = 300.0;  // K, source termination

  void validate() const;
  double total_attenuation_db() const;
};

/// 60 dB at 6 GHz with 20 dB on a 13 mK mixing-chamber plate.
StageChain reference_chain();

double bose_einstein(double freq, double temperature);

struct CascadeProfile {
  std::vector<double> occupation;  // after each stage
  double final_occupation = 0.0;
};

/// n <- n/A + (1 - 1/A) n_BE(T_stage), starting from n_BE(input_temperature).
CascadeProfile photon_cascade(const StageChain& chain, double freq);

struct LoadProfile {
  std::vector<double> incoming;     // W entering each stage
  std::vector<double> dissipated;   // W absorbed by each attenuator
  double input = 0.0;               // W
  double delivered = 0.0;           // W leaving the last stage
};

double dbm_to_watt(double dbm);
double watt_to_dbm(double watt);

LoadProfile active_load(const StageChain& chain, double input_power_dbm);

/// Power-law thermal conductivity k(T) = a T^b in W/(m K).
struct ConductivityLaw {
  double a = 0.0;
  double b = 1.0;
};

/// Conducted heat (W) through a uniform member of the given area/length (m),
/// integrating k(T) analytically between the two ends.
double passive_load(const ConductivityLaw& law, double area_over_length, double t_cold,
                    double t_hot);

inline constexpr double default_kapitza_coefficient = 41.5;  // K^2/W

/// R_K = coefficient / T, in K/W.
double kapitza_resistance(double temperature, double coefficient = default_kapitza_coefficient);

/// C = 2.3 T (moles/0.1) J/K; warns above 10 mK.
Diagnosed<double> he3_heat_capacity(double temperature, double moles);

/// R_K C, independent of temperature.
double cooling_time_constant(double moles, double coefficient = default_kapitza_coefficient);

/// Hot-end temperature of a metal link carrying `heat` (W) with electrical
/// resistance `resistance` (Ohm): sqrt(Tc^2 + 2 R Q / L0).
double wf_step(double heat, double resistance, double t_cold);

/// Temperature step Q R_K(T) across the liquid/heat-exchanger boundary.
double kapitza_step(double heat, double temperature,
                    double coefficient = default_kapitza_coefficient);

enum class LinkKind { kapitza, wiedemann_franz };

struct ThermalLink {
  LinkKind kind = LinkKind::kapitza;
  double coefficient = default_kapitza_coefficient;  // K^2/W, or Ohm for wiedemann_franz

  void validate() const;
};

/// Warm-side temperature of one link carrying `heat` from a side at `t_cold`.
double link_hot_temperature(const ThermalLink& link, double heat, double t_cold);

struct CellTemperatures {
  double t_cold = 0.0;  // refrigerator side of the silver link
  double t_hx = 0.0;    // heat exchanger
  double t_he3 = 0.0;   // liquid
};

/// Composes wf_step and kapitza_step.
CellTemperatures cell_temperatures(double heat, double resistance, double t_cold,
                                   double kapitza_coefficient = default_kapitza_coefficient);

/// N pi hbar omega0^2 / (2 Q_i), omega0 = 2 pi nu0.
double dissipated_power(double photon_number, double nu0, double q_internal);
/// N hbar omega0^2.
double circulating_power(double photon_number, double nu0);

/// Aligned text table of the cascade and loads.
void write_budget_table(std::ostream& out, const StageChain& chain, const CascadeProfile& photons,
                        const LoadProfile& loads);
/// stage,temperature,attenuation_db,occupation,incoming_w,dissipated_w
void write_budget_csv(std::ostream& out, const StageChain& chain, const CascadeProfile& photons,
                      const LoadProfile& loads);

}  // namespace tlsnoise::cryo
