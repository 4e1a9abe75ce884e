#pragma once

// Closed-form generalized tunneling model (GTM) physics for a TLS bath
// coupled to a superconducting resonator.
//
// Conventions: temperatures in kelvin, every rate and energy expressed as a
// frequency (E/h, Hz). Only the phonon Golden-rule rate is evaluated in SI
// units internally.

#include <optional>
#include <string>
#include <string_view>

namespace tlsnoise::gtm {

struct MaterialAcoustics {
  double density = 0.0;                // kg/m^3
  double sound_speed = 0.0;            // m/s
  double deformation_potential = 0.0;  // eV

  void validate() const;
};

/// Sapphire substrate: rho = 4e3 kg/m^3, v = 1e4 m/s, M = 1 eV.
MaterialAcoustics sapphire();
/// Liquid 3He at saturated vapour pressure: rho = 60 kg/m^3, v = 200 m/s, M = 1 meV.
MaterialAcoustics helium3_svp();
/// Scales density and sound speed, e.g. 1.3/1.3 for 3He near 5 bar.
MaterialAcoustics compressed(const MaterialAcoustics& m, double density_factor,
                             double speed_factor);

struct TlsParams {
  double energy = 0.0;             // E/h, Hz
  double tunneling = 0.0;          // Delta_0/h, Hz
  double dipole = 0.0;             // d_0, debye
  double dipole_projection = 0.0;  // <|sin theta|> d_0, debye

  void validate() const;
};

/// Calibration point for the dephasing power law Gamma_2(T) = rate (T/T_a)^(1+mu) (nu_a/nu_0)^mu.
struct Gamma2Anchor {
  double temperature = 0.075;  // K
  double rate = 3e6;           // Hz
  double resonance = 6.45e9;   // Hz, resonator frequency the anchor refers to
};

/// Point where the absolute noise scale is pinned: S_y(ref) = s_y.
struct NoiseReference {
  double temperature = 0.1;   // K
  double photons = 0.0;
  double fourier_freq = 0.1;  // Hz
  double resonance = 6.45e9;  // Hz
  double s_y = 1e-16;         // 1/Hz
};

struct BathConfig {
  double mu = 0.25;
  double chi = 1e-5;
  Gamma2Anchor gamma2_anchor{};
  double gamma1 = 300.0;      // Hz
  double gamma1_min = 100.0;  // Hz
  double gamma1_max = 1000.0; // Hz
  double fluct_density = 2.3873241463784303e25;  // 1/(m^3 K)
  double interaction_radius = 1e-8;              // m
  double u0 = 1e6;             // Hz
  double p_gamma = 1.0;
  double c_const = 1.0;
  double f_tan_delta = 3e-5;
  double nc_calibration = 1.0 / (300.0 * 3e6);   // photons s^2
  /// Temperature exponent of the noise in the relaxation-limited branch.
  /// 1.0 is the GTM prediction for a temperature-independent Gamma_1.
  double low_t_exponent = 1.0;
  NoiseReference noise_reference{};

  void validate() const;

  /// Vacuum defaults: Gamma_1 = 300 Hz, N_c(75 mK) = 1 photon.
  static BathConfig vacuum();
  /// Helium immersion: vacuum with Gamma_1 (and its bounds) scaled by 1000.
  static BathConfig helium();
  /// Builds the Gamma_2 anchor from the raw prefactor c0 chi ln(G1max/G1min) / nu0^mu.
  static BathConfig from_prefactor(double c0, double chi, double gamma1_min,
                                   double gamma1_max, double mu, double nu0);
};

/// Resonator drive. field_ratio is E/E_c and is derived, see make_drive().
struct DriveState {
  double photon_number = 0.0;
  double resonance = 6.45e9;  // Hz
  double field_ratio = 0.0;
};

DriveState make_drive(const BathConfig& bath, double photon_number,
                      double resonance, double temperature);

enum class NoiseRegime { automatic, weak_field, strong_field, relaxation };

/// Parses "auto", "weak", "strong" or "relaxation"; anything else is a UsageError.
NoiseRegime parse_regime(std::string_view label);
std::string_view to_string(NoiseRegime regime);

struct NoiseEstimate {
  double s_y = 0.0;  // fractional-frequency PSD, 1/Hz
  NoiseRegime regime = NoiseRegime::weak_field;  // branch selected (never automatic)
};

enum class CrossoverKind { saturation, relaxation };

/// Golden-rule phonon emission rate Gamma_1 = M^2 D0^2 E / (2 pi rho hbar^4 v^5) coth(E/2kT).
double phonon_relax_rate(const TlsParams& tls, const MaterialAcoustics& mat,
                         double temperature);

/// Gamma_1(a)/Gamma_1(b) for identical TLS: (M_a/M_b)^2 (rho_b/rho_a) (v_b/v_a)^5.
double relax_rate_ratio(const MaterialAcoustics& a, const MaterialAcoustics& b);

/// Elastic TLS-TLS interaction U0 = M^2/(rho v^2), returned as U0/h in Hz.
double elastic_interaction(const MaterialAcoustics& mat);

double dephasing_rate(const BathConfig& bath, double temperature, double nu0);

/// Linewidth actually seen by resonant TLS: max(Gamma_2, 2 Gamma_1).
double effective_linewidth(const BathConfig& bath, double temperature, double nu0);

/// E_c = hbar sqrt(Gamma_1 Gamma_2) / (2 <d0 |sin theta|>), in V/m.
double critical_field(double gamma1, double gamma2, double dipole_projection);

double critical_photon_number(const BathConfig& bath, double temperature, double nu0);

/// N_c with Gamma_2 replaced by the effective linewidth; constant once the
/// bath is relaxation limited.
double effective_critical_photon_number(const BathConfig& bath, double temperature,
                                        double nu0);

/// Rabi frequency (Hz) of a TLS driven by <N> photons, sqrt(N/kappa). Satisfies
/// Omega_R(N_c)^2 = Gamma_1 Gamma_2.
double rabi_frequency(const BathConfig& bath, double photon_number);

double activated_fluctuator_count(const BathConfig& bath, double temperature);

NoiseEstimate noise_magnitude(const BathConfig& bath, const DriveState& drive,
                              double temperature, double fourier_freq,
                              NoiseRegime regime = NoiseRegime::automatic);

double crossover_temperature(const BathConfig& bath, const DriveState& drive,
                             CrossoverKind kind);

double qi_gtm(const DriveState& drive, const BathConfig& bath, double temperature);

double qi_empirical(double photon_number, double f_tan_delta, double n_c,
                    double alpha);

}  // namespace tlsnoise::gtm
