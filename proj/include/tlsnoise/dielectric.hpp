#pragma once

// Dielectric participation, loss bounds, pressure-dependent permittivity,
// the 3He BCS gap and hydrogen hyperfine ESR thermometry.

#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace tlsnoise::dielectric {

enum class Region { helium, substrate, other };
Region parse_region(std::string_view label);
std::string_view to_string(Region region);

struct FieldSample {
  double e2 = 0.0;   // |E|^2, V^2/m^2
  double eps = 1.0;  // relative permittivity
  double dv = 0.0;   // m^3
  Region region = Region::other;
};

struct FieldSampleSet {
  std::vector<FieldSample> samples;
  void validate() const;
};

/// Share of the electric energy stored in `region` (helium by default).
double filling_factor(const FieldSampleSet& fields, Region region = Region::helium);

/// First-order shift -(F/2)(eps - 1) nu0, Hz.
double fill_freq_shift(double nu0, double filling, double eps_r);

/// Clausius-Mossotti: (eps-1)/(eps+2) scales with density.
double pressure_eps(double eps_svp, double density_ratio);

struct LossBound {
  double f_tan_delta = 0.0;
  double tan_delta = 0.0;
};

LossBound loss_tangent_bound(double qi_full, double qi_empty, double filling);

/// Harmonic mean, i.e. the Q of the mean loss.
double mean_q(std::span<const double> q);

/// T1 = 1/(nu F tan_delta).
double t1_bound(double nu_qubit, double filling, double tan_delta);

struct HyperfineModel {
  double splitting = 1.42e9;  // Hz
  double equivalent_temperature() const;  // h A / k_B
};

struct EsrIntensity {
  double ratio = 0.0;       // I3/I1
  double normalized = 0.0;  // I3/(I1 + I3)
};

EsrIntensity esr_peak_ratio(double temperature, const HyperfineModel& model = {});

struct GapResult {
  double gap = 0.0;  // Delta/h, Hz
  bool normal_state = false;
};

inline constexpr double he3_tc_svp = 0.9e-3;  // K

/// 3.06 k_B T_c sqrt(1 - T/T_c) / h; zero and flagged normal above T_c.
GapResult he3_bcs_gap(double temperature, double t_c = he3_tc_svp);

/// Fraction of the full-fill energy participation held by a thin film.
struct ParticipationTable {
  std::vector<double> thickness_nm;
  std::vector<double> participation;

  void validate() const;
  /// Linear interpolation, clamped at the table ends.
  double at(double thickness_nm) const;
};

/// Shift produced by a film: participation fraction times the full-fill shift.
double film_freq_shift(double full_fill_shift, double participation);

/// `e2,eps,dv,region` with region in helium|substrate|other.
FieldSampleSet read_field_samples_csv(std::istream& in);
/// `thickness_nm,participation`.
ParticipationTable read_participation_csv(std::istream& in);

}  // namespace tlsnoise::dielectric
