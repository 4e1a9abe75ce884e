#pragma once

// Monte Carlo synthesis of resonator frequency traces from an ensemble of
// random-telegraph thermal fluctuators, and a discrete Pound-lock loop.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tlsnoise/errors.hpp"

namespace tlsnoise::bath {

/// Symmetric telegraph source: flips between +-amplitude with rate switch_rate
/// out of either state, so its autocorrelation is a^2 exp(-2 gamma |tau|).
struct Fluctuator {
  double switch_rate = 1.0;  // Hz
  double amplitude = 0.0;    // fractional frequency shift
  int state = 1;             // +1 or -1
  std::uint64_t id = 0;      // selects the event stream
};

struct FluctuatorEnsemble {
  std::vector<Fluctuator> fluctuators;
  double gamma_min = 1e-4;
  double gamma_max = 1e4;
  std::uint64_t seed = 0;
};

struct FrequencyTrace {
  double start_time = 0.0;
  double dt = 0.05;
  std::vector<double> samples;  // y_k = nu_k / nu_mean - 1
  double nu_mean = 6.45e9;
  std::uint64_t seed = 0;

  std::size_t size() const { return samples.size(); }
  double duration() const { return dt * static_cast<double>(samples.size()); }
  void validate() const;
};

enum class AmplitudeDistribution { equal, lognormal };

struct BathOptions {
  AmplitudeDistribution distribution = AmplitudeDistribution::equal;
  double lognormal_sigma = 0.5;  // sigma of ln(amplitude); median equals the nominal amplitude
};

/// Draws n_fluct fluctuators with log-uniform rates (density ~ 1/gamma) and
/// equiprobable initial states. Fluctuator i gets id i.
FluctuatorEnsemble sample_bath(std::size_t n_fluct, double gamma_min, double gamma_max,
                               double amplitude, std::uint64_t seed,
                               const BathOptions& options = {});

/// Union of two ensembles; ids of `b` are shifted past those of `a` only when
/// they collide, so disjoint ids keep their event streams.
FluctuatorEnsemble merge(const FluctuatorEnsemble& a, const FluctuatorEnsemble& b);

/// Adds one strong, slow fluctuator (the "RTN drift" scenario).
FluctuatorEnsemble with_drift_fluctuator(FluctuatorEnsemble ensemble, double amplitude,
                                         double switch_rate);

/// Lorentzian a^2 4 gamma / (4 gamma^2 + (2 pi f)^2). This is the two-sided
/// density; the one-sided PSD seen by a periodogram is twice this value.
double rtn_psd(double gamma, double amplitude, double fourier_freq);

/// Per-fluctuator amplitude giving a one-sided S_y(f) = h_{-1}/f for an ensemble
/// with log-uniform rates: a = sqrt(h ln(gamma_max/gamma_min) / n). Warns when
/// the rate span is below two decades.
Diagnosed<double> calibrate_amplitude(double target_h_minus1, std::size_t n_fluct,
                                      double gamma_min, double gamma_max);

struct SynthOptions {
  double nu_mean = 6.45e9;
  unsigned threads = 0;  // 0 = hardware concurrency
  /// gamma*dt above which a fluctuator is advanced gate by gate (Poisson flip
  /// count plus exact Beta-distributed occupation) instead of flip by flip.
  double per_gate_threshold = 10.0;
};

/// Gate-averaged samples y_k = (1/dt) int_{k dt}^{(k+1) dt} sum_i a_i s_i(t) dt.
FrequencyTrace synthesize_trace(const FluctuatorEnsemble& ensemble, double duration,
                                double dt, std::uint64_t seed,
                                const SynthOptions& options = {});

/// Flip instants of one fluctuator in [0, duration) from its event stream.
std::vector<double> flip_times(const Fluctuator& f, double duration, std::uint64_t seed);

struct PoundLoopOptions {
  double initial_tracked = 0.0;  // fractional frequency of the carrier at t = 0
};

/// Integral controller: once per gate, tracked += gain*gate*(true - tracked + noise).
/// Output sample j is the carrier frequency after gate j.
FrequencyTrace simulate_pound_loop(const FrequencyTrace& true_trace, double loop_gain,
                                   double meas_noise_sigma, double gate_time,
                                   std::uint64_t seed, const PoundLoopOptions& options = {});

// CSV: "# dt=<s> nu_mean=<Hz> seed=<int>" then "time,y" rows.
void write_trace_csv(std::ostream& out, const FrequencyTrace& trace);
FrequencyTrace read_trace_csv(std::istream& in);

}  // namespace tlsnoise::bath
