#include "tlsnoise/gtm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tlsnoise/constants.hpp"
#include "tlsnoise/errors.hpp"

namespace tlsnoise::gtm {

namespace c = tlsnoise::constants;

namespace {

constexpr double max_crossover_temperature = 10.0;  // K

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw DomainError(std::string(what) + " must be positive and finite");
  }
}

double coth(double x) { return 1.0 / std::tanh(x); }

// Unit-free noise kernels; the absolute scale is fixed by the noise reference.
// weak:        T / Gamma_2^2
// strong:      weak * sqrt(Gamma_2/Gamma_1) * (E_c/E)^2  (R0^3 = U0/Omega_R, F ~ E_c)
// relaxation:  T / (2 Gamma_1)^2 * (T/T_x)^(beta-1)
struct Kernels {
  double weak = 0.0;
  double strong = 0.0;
  double relaxation = 0.0;
  bool relaxation_limited = false;
  bool strong_field = false;
  double n_c_eff = 0.0;
};

Kernels kernels(const BathConfig& bath, const DriveState& drive, double temperature) {
  const double g2 = dephasing_rate(bath, temperature, drive.resonance);
  const double g1 = bath.gamma1;
  const double t_ref = bath.gamma2_anchor.temperature;
  const double g_ref = bath.gamma2_anchor.rate;
  const double tn = temperature / t_ref;

  Kernels k;
  k.weak = tn * (g_ref / g2) * (g_ref / g2);

  const double n_c = critical_photon_number(bath, temperature, drive.resonance);
  if (drive.photon_number > 0.0 && n_c > 0.0) {
    k.strong = k.weak * std::sqrt(g2 / g1) * (n_c / drive.photon_number);
  } else {
    k.strong = std::numeric_limits<double>::infinity();
  }

  // Gamma_2(t_x) = 2 Gamma_1; keeps the relaxation branch continuous with the weak one.
  const double t_x =
      t_ref * std::pow(2.0 * g1 / g_ref *
                           std::pow(drive.resonance / bath.gamma2_anchor.resonance, bath.mu),
                       1.0 / (1.0 + bath.mu));
  k.relaxation = tn * (g_ref / (2.0 * g1)) * (g_ref / (2.0 * g1)) *
                 std::pow(temperature / t_x, bath.low_t_exponent - 1.0);

  k.relaxation_limited = g2 <= 2.0 * g1;
  k.strong_field = drive.photon_number >= n_c;
  k.n_c_eff = effective_critical_photon_number(bath, temperature, drive.resonance);
  return k;
}

NoiseEstimate raw_noise(const BathConfig& bath, const DriveState& drive,
                        double temperature, double fourier_freq, NoiseRegime regime) {
  const Kernels k = kernels(bath, drive, temperature);
  NoiseEstimate est;
  switch (regime) {
    case NoiseRegime::weak_field:
      est = {k.weak, NoiseRegime::weak_field};
      break;
    case NoiseRegime::strong_field:
      if (!(drive.photon_number > 0.0)) {
        throw DomainError("strong-field noise branch needs a non-zero photon number");
      }
      est = {k.strong, NoiseRegime::strong_field};
      break;
    case NoiseRegime::relaxation:
      est = {k.relaxation, NoiseRegime::relaxation};
      break;
    case NoiseRegime::automatic: {
      const double base = k.relaxation_limited ? k.relaxation : k.weak;
      est.s_y = base / std::sqrt(1.0 + drive.photon_number / k.n_c_eff);
      est.regime = k.relaxation_limited ? NoiseRegime::relaxation
                   : k.strong_field     ? NoiseRegime::strong_field
                                        : NoiseRegime::weak_field;
      break;
    }
  }
  est.s_y /= fourier_freq;
  return est;
}

}  // namespace

void MaterialAcoustics::validate() const {
  require_positive(density, "density");
  require_positive(sound_speed, "sound speed");
  require_positive(deformation_potential, "deformation potential");
}

MaterialAcoustics sapphire() { return {4e3, 1e4, 1.0}; }
MaterialAcoustics helium3_svp() { return {60.0, 200.0, 1e-3}; }

MaterialAcoustics compressed(const MaterialAcoustics& m, double density_factor,
                             double speed_factor) {
  require_positive(density_factor, "density factor");
  require_positive(speed_factor, "speed factor");
  return {m.density * density_factor, m.sound_speed * speed_factor,
          m.deformation_potential};
}

void TlsParams::validate() const {
  require_positive(energy, "TLS energy");
  require_positive(tunneling, "tunneling element");
  require_positive(dipole, "dipole moment");
  if (tunneling > energy) {
    throw DomainError("tunneling element exceeds TLS energy");
  }
}

void BathConfig::validate() const {
  if (!(mu >= 0.0 && mu < 1.0)) throw DomainError("mu must lie in [0, 1)");
  require_positive(gamma2_anchor.temperature, "gamma2 anchor temperature");
  require_positive(gamma2_anchor.rate, "gamma2 anchor rate");
  require_positive(gamma2_anchor.resonance, "gamma2 anchor resonance");
  require_positive(gamma1, "gamma1");
  require_positive(gamma1_min, "gamma1_min");
  require_positive(gamma1_max, "gamma1_max");
  if (!(gamma1_min <= gamma1 && gamma1 <= gamma1_max)) {
    throw DomainError("gamma1 must lie within [gamma1_min, gamma1_max]");
  }
  if (nc_calibration < 0.0) throw DomainError("nc_calibration must be >= 0");
  require_positive(noise_reference.temperature, "noise reference temperature");
  require_positive(noise_reference.fourier_freq, "noise reference frequency");
  require_positive(noise_reference.resonance, "noise reference resonance");
  if (noise_reference.photons < 0.0) throw DomainError("noise reference photons must be >= 0");
  if (noise_reference.s_y < 0.0) throw DomainError("noise reference level must be >= 0");
}

BathConfig BathConfig::vacuum() { return BathConfig{}; }

BathConfig BathConfig::helium() {
  BathConfig b;
  b.gamma1 = 3e5;
  b.gamma1_min = 1e5;
  b.gamma1_max = 1e6;
  return b;
}

BathConfig BathConfig::from_prefactor(double c0, double chi, double gamma1_min,
                                      double gamma1_max, double mu, double nu0) {
  require_positive(c0, "c0");
  require_positive(chi, "chi");
  require_positive(nu0, "nu0");
  if (!(gamma1_min > 0.0 && gamma1_max > gamma1_min)) {
    throw DomainError("need 0 < gamma1_min < gamma1_max");
  }
  BathConfig b;
  b.mu = mu;
  b.chi = chi;
  b.gamma1_min = gamma1_min;
  b.gamma1_max = gamma1_max;
  b.gamma1 = std::sqrt(gamma1_min * gamma1_max);
  // Gamma_2 at T = 1 K for resonance nu0.
  b.gamma2_anchor = {1.0, c0 * chi * std::log(gamma1_max / gamma1_min) / std::pow(nu0, mu),
                     nu0};
  return b;
}

DriveState make_drive(const BathConfig& bath, double photon_number, double resonance,
                      double temperature) {
  if (photon_number < 0.0) throw DomainError("photon number must be >= 0");
  DriveState d{photon_number, resonance, 0.0};
  const double n_c = critical_photon_number(bath, temperature, resonance);
  d.field_ratio = n_c > 0.0 ? std::sqrt(photon_number / n_c)
                            : std::numeric_limits<double>::infinity();
  return d;
}

NoiseRegime parse_regime(std::string_view label) {
  if (label == "auto" || label == "automatic") return NoiseRegime::automatic;
  if (label == "weak") return NoiseRegime::weak_field;
  if (label == "strong") return NoiseRegime::strong_field;
  if (label == "relaxation") return NoiseRegime::relaxation;
  throw UsageError("unknown noise regime '" + std::string(label) +
                   "' (expected auto|weak|strong|relaxation)");
}

std::string_view to_string(NoiseRegime regime) {
  switch (regime) {
    case NoiseRegime::automatic: return "auto";
    case NoiseRegime::weak_field: return "weak";
    case NoiseRegime::strong_field: return "strong";
    case NoiseRegime::relaxation: return "relaxation";
  }
  return "?";
}

double phonon_relax_rate(const TlsParams& tls, const MaterialAcoustics& mat,
                         double temperature) {
  mat.validate();
  tls.validate();
  if (temperature < 0.0) throw DomainError("temperature must be >= 0");

  const double m = c::ev_to_joule(mat.deformation_potential);
  const double d0 = c::hz_to_joule(tls.tunneling);
  const double e = c::hz_to_joule(tls.energy);
  const double hb2 = c::hbar * c::hbar;
  const double rate0 = m * m * d0 * d0 * e /
                       (2.0 * c::pi * mat.density * hb2 * hb2 * std::pow(mat.sound_speed, 5));
  if (temperature == 0.0) return rate0;
  return rate0 * coth(e / (2.0 * c::boltzmann * temperature));
}

double relax_rate_ratio(const MaterialAcoustics& a, const MaterialAcoustics& b) {
  a.validate();
  b.validate();
  const double m = a.deformation_potential / b.deformation_potential;
  return m * m * (b.density / a.density) * std::pow(b.sound_speed / a.sound_speed, 5);
}

double elastic_interaction(const MaterialAcoustics& mat) {
  mat.validate();
  const double m = c::ev_to_joule(mat.deformation_potential);
  return m * m / (mat.density * mat.sound_speed * mat.sound_speed) / c::planck;
}

double dephasing_rate(const BathConfig& bath, double temperature, double nu0) {
  if (!(temperature > 0.0)) throw DomainError("dephasing rate needs temperature > 0");
  require_positive(nu0, "resonance frequency");
  const Gamma2Anchor& a = bath.gamma2_anchor;
  return a.rate * std::pow(temperature / a.temperature, 1.0 + bath.mu) *
         std::pow(a.resonance / nu0, bath.mu);
}

double effective_linewidth(const BathConfig& bath, double temperature, double nu0) {
  return std::max(dephasing_rate(bath, temperature, nu0), 2.0 * bath.gamma1);
}

double critical_field(double gamma1, double gamma2, double dipole_projection) {
  require_positive(gamma1, "gamma1");
  require_positive(gamma2, "gamma2");
  if (!(dipole_projection > 0.0)) throw DomainError("dipole projection must be positive");
  return c::hbar * std::sqrt(gamma1 * gamma2) / (2.0 * dipole_projection * c::debye);
}

double critical_photon_number(const BathConfig& bath, double temperature, double nu0) {
  return bath.nc_calibration * bath.gamma1 * dephasing_rate(bath, temperature, nu0);
}

double effective_critical_photon_number(const BathConfig& bath, double temperature,
                                        double nu0) {
  return bath.nc_calibration * bath.gamma1 * effective_linewidth(bath, temperature, nu0);
}

double rabi_frequency(const BathConfig& bath, double photon_number) {
  if (photon_number < 0.0) throw DomainError("photon number must be >= 0");
  require_positive(bath.nc_calibration, "nc_calibration");
  return std::sqrt(photon_number / bath.nc_calibration);
}

double activated_fluctuator_count(const BathConfig& bath, double temperature) {
  if (temperature < 0.0) throw DomainError("temperature must be >= 0");
  const double r = bath.interaction_radius;
  return 4.0 * c::pi / 3.0 * bath.fluct_density * r * r * r * temperature;
}

NoiseEstimate noise_magnitude(const BathConfig& bath, const DriveState& drive,
                              double temperature, double fourier_freq, NoiseRegime regime) {
  if (!(temperature > 0.0)) throw DomainError("noise needs temperature > 0");
  if (!(fourier_freq > 0.0)) throw DomainError("noise needs fourier frequency > 0");

  const NoiseReference& ref = bath.noise_reference;
  const DriveState ref_drive{ref.photons, ref.resonance, 0.0};
  const double ref_raw =
      raw_noise(bath, ref_drive, ref.temperature, ref.fourier_freq, NoiseRegime::automatic).s_y;
  NoiseEstimate est = raw_noise(bath, drive, temperature, fourier_freq, regime);
  est.s_y *= ref.s_y / ref_raw;
  return est;
}

double crossover_temperature(const BathConfig& bath, const DriveState& drive,
                             CrossoverKind kind) {
  const Gamma2Anchor& a = bath.gamma2_anchor;
  // Rate at which Gamma_2(T) must arrive for the crossover.
  double target = 0.0;
  switch (kind) {
    case CrossoverKind::saturation:
      // Power broadening sets in once the Rabi frequency exceeds the linewidth.
      target = rabi_frequency(bath, drive.photon_number);
      break;
    case CrossoverKind::relaxation:
      target = 2.0 * bath.gamma1;
      break;
  }
  require_positive(drive.resonance, "resonance frequency");
  const double scaled = target / a.rate * std::pow(drive.resonance / a.resonance, bath.mu);
  const double t = a.temperature * std::pow(scaled, 1.0 / (1.0 + bath.mu));
  if (!(t > 0.0) || t > max_crossover_temperature || !std::isfinite(t)) {
    throw OutOfRangeError("crossover temperature outside (0, 10 K]");
  }
  return t;
}

double qi_gtm(const DriveState& drive, const BathConfig& bath, double temperature) {
  if (!(drive.photon_number > 0.0)) throw DomainError("qi_gtm needs photon number > 0");
  const double n_c = critical_photon_number(bath, temperature, drive.resonance);
  const double arg = bath.c_const * std::sqrt(n_c / drive.photon_number);
  if (!(arg > 1.0)) {
    throw SaturatedRegimeError("photon number at or beyond c^2 N_c; logarithmic Q law invalid");
  }
  return 1.0 / (bath.p_gamma * bath.f_tan_delta * std::log(arg));
}

double qi_empirical(double photon_number, double f_tan_delta, double n_c, double alpha) {
  if (photon_number < 0.0) throw DomainError("photon number must be >= 0");
  require_positive(f_tan_delta, "F tan delta");
  require_positive(n_c, "n_c");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("alpha must lie in (0, 1]");
  return std::pow(1.0 + photon_number / n_c, alpha) / f_tan_delta;
}

}  // namespace tlsnoise::gtm
