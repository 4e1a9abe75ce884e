#include "tlsnoise/bath.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <numbers>
#include <set>
#include <span>
#include <thread>

#include "tlsnoise/rng.hpp"

namespace tlsnoise::bath {

namespace {

// Stream domains keep ensemble draws, flip events and loop noise uncorrelated.
constexpr std::uint64_t domain_ensemble = 1;
constexpr std::uint64_t domain_events = 2;
constexpr std::uint64_t domain_pound = 3;

constexpr std::size_t target_chunks = 8;

std::size_t sample_count(double duration, double dt) {
  return static_cast<std::size_t>(std::floor(duration / dt * (1.0 + 1e-12)));
}

// Adds the gate-averaged contribution of one fluctuator to a difference array
// (length n + 1); the trace is the prefix sum.
void accumulate_events(const Fluctuator& f, std::size_t n, double dt, std::uint64_t seed,
                       std::vector<double>& diff) {
  CounterRng rng(seed, f.id, domain_events);
  const double a = f.amplitude;
  const double span = static_cast<double>(n) * dt;
  int s = f.state >= 0 ? 1 : -1;
  diff[0] += a * s;
  double t = rng.exponential(f.switch_rate);
  while (t < span) {
    const double pos = t / dt;
    const std::size_t k = std::min(static_cast<std::size_t>(pos), n - 1);
    const double after = static_cast<double>(k + 1) - pos;  // gate fraction after the flip
    const double delta = -2.0 * a * s;
    diff[k] += delta * after;
    diff[k + 1] += delta * (1.0 - after);
    s = -s;
    t += rng.exponential(f.switch_rate);
  }
}

// Exact gate-by-gate update: flips in a gate are Poisson(gamma dt); given K
// flips the fraction of the gate spent in the starting state is Beta(ceil((K+1)/2),
// floor((K+1)/2)) because uniform spacings are Dirichlet(1, ..., 1).
void accumulate_per_gate(const Fluctuator& f, std::size_t n, double dt, std::uint64_t seed,
                         std::vector<double>& diff) {
  CounterRng rng(seed, f.id, domain_events);
  std::poisson_distribution<long> flips(f.switch_rate * dt);
  std::gamma_distribution<double> gamma;
  using gamma_param = std::gamma_distribution<double>::param_type;
  const double a = f.amplitude;
  int s = f.state >= 0 ? 1 : -1;
  for (std::size_t k = 0; k < n; ++k) {
    const long count = flips(rng);
    double mean_state = s;
    if (count > 0) {
      const double x = gamma(rng, gamma_param(static_cast<double>((count + 2) / 2), 1.0));
      const double y = gamma(rng, gamma_param(static_cast<double>((count + 1) / 2), 1.0));
      mean_state = s * (2.0 * x / (x + y) - 1.0);
      if (count % 2 != 0) s = -s;
    }
    diff[k] += a * mean_state;
    diff[k + 1] -= a * mean_state;
  }
}

std::vector<double> synthesize_chunk(std::span<const Fluctuator> chunk, std::size_t n,
                                     double dt, std::uint64_t seed, double threshold) {
  std::vector<double> diff(n + 1, 0.0);
  for (const Fluctuator& f : chunk) {
    if (f.amplitude == 0.0) continue;
    if (f.switch_rate * dt > threshold) {
      accumulate_per_gate(f, n, dt, seed, diff);
    } else {
      accumulate_events(f, n, dt, seed, diff);
    }
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    acc += diff[k];
    diff[k] = acc;
  }
  diff.resize(n);
  return diff;
}

}  // namespace

void FrequencyTrace::validate() const {
  if (!(dt > 0.0)) throw DomainError("trace dt must be positive");
  if (samples.size() < 2) throw DomainError("trace needs at least two samples");
}

FluctuatorEnsemble sample_bath(std::size_t n_fluct, double gamma_min, double gamma_max,
                               double amplitude, std::uint64_t seed,
                               const BathOptions& options) {
  if (!(gamma_min > 0.0) || !(gamma_max > gamma_min)) {
    throw DomainError("fluctuator rate bounds need 0 < gamma_min < gamma_max");
  }
  if (amplitude < 0.0) throw DomainError("fluctuator amplitude must be >= 0");

  FluctuatorEnsemble ens;
  ens.gamma_min = gamma_min;
  ens.gamma_max = gamma_max;
  ens.seed = seed;
  ens.fluctuators.reserve(n_fluct);
  const double log_span = std::log(gamma_max / gamma_min);
  for (std::size_t i = 0; i < n_fluct; ++i) {
    CounterRng rng(seed, i, domain_ensemble);
    Fluctuator f;
    f.id = i;
    f.switch_rate = std::clamp(gamma_min * std::exp(rng.uniform() * log_span), gamma_min, gamma_max);
    f.state = (rng() >> 63) != 0 ? 1 : -1;
    f.amplitude = amplitude;
    if (options.distribution == AmplitudeDistribution::lognormal) {
      std::normal_distribution<double> z;
      f.amplitude = amplitude * std::exp(options.lognormal_sigma * z(rng));
    }
    ens.fluctuators.push_back(f);
  }
  return ens;
}

FluctuatorEnsemble merge(const FluctuatorEnsemble& a, const FluctuatorEnsemble& b) {
  FluctuatorEnsemble out = a;
  out.gamma_min = std::min(a.gamma_min, b.gamma_min);
  out.gamma_max = std::max(a.gamma_max, b.gamma_max);
  std::set<std::uint64_t> used;
  std::uint64_t next = 0;
  for (const auto& f : a.fluctuators) {
    used.insert(f.id);
    next = std::max(next, f.id + 1);
  }
  for (Fluctuator f : b.fluctuators) {
    if (used.contains(f.id)) f.id = next++;
    used.insert(f.id);
    next = std::max(next, f.id + 1);
    out.fluctuators.push_back(f);
  }
  return out;
}

FluctuatorEnsemble with_drift_fluctuator(FluctuatorEnsemble ensemble, double amplitude,
                                         double switch_rate) {
  if (!(switch_rate > 0.0)) throw DomainError("drift fluctuator rate must be positive");
  std::uint64_t next = 0;
  for (const auto& f : ensemble.fluctuators) next = std::max(next, f.id + 1);
  ensemble.fluctuators.push_back({switch_rate, amplitude, 1, next});
  ensemble.gamma_min = std::min(ensemble.gamma_min, switch_rate);
  ensemble.gamma_max = std::max(ensemble.gamma_max, switch_rate);
  return ensemble;
}

double rtn_psd(double gamma, double amplitude, double fourier_freq) {
  if (!(gamma > 0.0)) throw DomainError("telegraph rate must be positive");
  if (fourier_freq < 0.0) throw DomainError("fourier frequency must be >= 0");
  const double w = 2.0 * std::numbers::pi * fourier_freq;
  return amplitude * amplitude * 4.0 * gamma / (4.0 * gamma * gamma + w * w);
}

Diagnosed<double> calibrate_amplitude(double target_h_minus1, std::size_t n_fluct,
                                      double gamma_min, double gamma_max) {
  if (target_h_minus1 < 0.0) throw DomainError("target h_-1 must be >= 0");
  if (n_fluct == 0) throw DomainError("need at least one fluctuator");
  if (!(gamma_min > 0.0) || !(gamma_max > gamma_min)) {
    throw DomainError("fluctuator rate bounds need 0 < gamma_min < gamma_max");
  }
  Diagnosed<double> out;
  const double log_span = std::log(gamma_max / gamma_min);
  out.value = std::sqrt(target_h_minus1 * log_span / static_cast<double>(n_fluct));
  if (gamma_max / gamma_min < 100.0) {
    out.warnings.push_back("rate span below two decades; 1/f plateau too narrow");
  }
  return out;
}

FrequencyTrace synthesize_trace(const FluctuatorEnsemble& ensemble, double duration, double dt,
                                std::uint64_t seed, const SynthOptions& options) {
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  if (!(duration >= 2.0 * dt)) throw DomainError("duration must cover at least two samples");
  for (const auto& f : ensemble.fluctuators) {
    if (!(f.switch_rate > 0.0)) throw DomainError("fluctuator switch rate must be positive");
    if (f.amplitude < 0.0) throw DomainError("fluctuator amplitude must be >= 0");
  }

  const std::size_t n = sample_count(duration, dt);
  FrequencyTrace trace;
  trace.dt = dt;
  trace.nu_mean = options.nu_mean;
  trace.seed = seed;

  const auto& fl = ensemble.fluctuators;
  if (fl.empty()) {
    trace.samples.assign(n, 0.0);
    return trace;
  }

  // Chunk boundaries depend only on the ensemble size, never on the thread count.
  const std::size_t per_chunk = (fl.size() + target_chunks - 1) / target_chunks;
  const std::size_t n_chunks = (fl.size() + per_chunk - 1) / per_chunk;
  std::vector<std::vector<double>> partial(n_chunks);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t c = next++; c < n_chunks; c = next++) {
      const std::size_t lo = c * per_chunk;
      const std::size_t hi = std::min(fl.size(), lo + per_chunk);
      partial[c] = synthesize_chunk(std::span(fl).subspan(lo, hi - lo), n, dt, seed,
                                    options.per_gate_threshold);
    }
  };
  unsigned threads = options.threads != 0 ? options.threads : std::thread::hardware_concurrency();
  threads = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(n_chunks));
  std::vector<std::jthread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();

  // Pairwise reduction in a fixed order.
  for (std::size_t stride = 1; stride < n_chunks; stride *= 2) {
    for (std::size_t c = 0; c + stride < n_chunks; c += 2 * stride) {
      auto& dst = partial[c];
      const auto& src = partial[c + stride];
      for (std::size_t k = 0; k < n; ++k) dst[k] += src[k];
    }
  }
  trace.samples = std::move(partial[0]);
  return trace;
}

std::vector<double> flip_times(const Fluctuator& f, double duration, std::uint64_t seed) {
  if (!(f.switch_rate > 0.0)) throw DomainError("fluctuator switch rate must be positive");
  CounterRng rng(seed, f.id, domain_events);
  std::vector<double> out;
  for (double t = rng.exponential(f.switch_rate); t < duration;
       t += rng.exponential(f.switch_rate)) {
    out.push_back(t);
  }
  return out;
}

FrequencyTrace simulate_pound_loop(const FrequencyTrace& true_trace, double loop_gain,
                                   double meas_noise_sigma, double gate_time,
                                   std::uint64_t seed, const PoundLoopOptions& options) {
  true_trace.validate();
  if (!(loop_gain > 0.0)) throw DomainError("loop gain must be positive");
  if (meas_noise_sigma < 0.0) throw DomainError("measurement noise must be >= 0");
  if (!(gate_time >= true_trace.dt * (1.0 - 1e-12))) {
    throw UsageError("gate time must be at least the trace sampling interval");
  }
  const double ratio = gate_time / true_trace.dt;
  const auto per_gate = static_cast<std::size_t>(std::llround(ratio));
  if (std::abs(ratio - static_cast<double>(per_gate)) > 1e-9 * ratio) {
    throw UsageError("gate time must be an integer multiple of the trace sampling interval");
  }
  const double step = loop_gain * gate_time;
  if (step >= 2.0) {
    throw InstabilityError("loop_gain * gate_time >= 2: discrete integrator is unstable");
  }
  const std::size_t gates = true_trace.size() / per_gate;
  if (gates < 2) throw DomainError("trace shorter than two gates");

  CounterRng rng(seed, 0, domain_pound);
  std::normal_distribution<double> noise(0.0, 1.0);

  FrequencyTrace out;
  out.start_time = true_trace.start_time;
  out.dt = gate_time;
  out.nu_mean = true_trace.nu_mean;
  out.seed = seed;
  out.samples.reserve(gates);
  double tracked = options.initial_tracked;
  for (std::size_t j = 0; j < gates; ++j) {
    double mean = 0.0;
    for (std::size_t k = 0; k < per_gate; ++k) mean += true_trace.samples[j * per_gate + k];
    mean /= static_cast<double>(per_gate);
    const double measured_error =
        mean - tracked + (meas_noise_sigma > 0.0 ? meas_noise_sigma * noise(rng) : 0.0);
    tracked += step * measured_error;
    out.samples.push_back(tracked);
  }
  return out;
}

}  // namespace tlsnoise::bath
