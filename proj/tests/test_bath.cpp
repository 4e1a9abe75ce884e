#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "tlsnoise/bath.hpp"
#include "tlsnoise/errors.hpp"
#include "tlsnoise/rng.hpp"
#include "tlsnoise/spectral.hpp"

using namespace tlsnoise;
using namespace tlsnoise::bath;

namespace {

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

FluctuatorEnsemble single(double rate, double amplitude) {
  FluctuatorEnsemble e;
  e.fluctuators.push_back({rate, amplitude, 1, 0});
  e.gamma_min = e.gamma_max = rate;
  return e;
}

}  // namespace

TEST_CASE("counter rng is a pure function of its key") {
  CounterRng a(5, 7, 2), b(5, 7, 2), c(5, 8, 2);
  for (int i = 0; i < 10; ++i) {
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
  }
  CounterRng u(1, 1);
  double s = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double x = u.uniform();
    REQUIRE(x > 0.0);
    REQUIRE(x < 1.0);
    s += x;
  }
  CHECK(s / 1e5 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("sample_bath draws log-uniform rates deterministically") {
  const auto e1 = sample_bath(20000, 1e-3, 1e3, 2e-9, 42);
  const auto e2 = sample_bath(20000, 1e-3, 1e3, 2e-9, 42);
  REQUIRE(e1.fluctuators.size() == 20000);
  std::size_t below = 0, up = 0;
  for (std::size_t i = 0; i < e1.fluctuators.size(); ++i) {
    const auto& f = e1.fluctuators[i];
    CHECK(f.switch_rate == e2.fluctuators[i].switch_rate);
    CHECK(f.id == i);
    REQUIRE(f.switch_rate >= 1e-3);
    REQUIRE(f.switch_rate <= 1e3);
    if (f.switch_rate < 1.0) ++below;
    if (f.state == 1) ++up;
    CHECK(f.amplitude == 2e-9);
  }
  CHECK(static_cast<double>(below) / 20000.0 == doctest::Approx(0.5).epsilon(0.03));
  CHECK(static_cast<double>(up) / 20000.0 == doctest::Approx(0.5).epsilon(0.03));

  BathOptions ln;
  ln.distribution = AmplitudeDistribution::lognormal;
  ln.lognormal_sigma = 0.5;
  const auto e3 = sample_bath(20000, 1e-3, 1e3, 1.0, 3, ln);
  std::vector<double> logs;
  for (const auto& f : e3.fluctuators) logs.push_back(std::log(f.amplitude));
  CHECK(std::abs(mean(logs)) < 0.02);
  CHECK(std::sqrt(variance(logs)) == doctest::Approx(0.5).epsilon(0.03));

  CHECK_THROWS_AS(sample_bath(10, 1.0, 1.0, 1.0, 1), DomainError);
  CHECK_THROWS_AS(sample_bath(10, 1.0, 2.0, -1.0, 1), DomainError);
  CHECK(sample_bath(0, 1.0, 2.0, 1.0, 1).fluctuators.empty());
}

TEST_CASE("merge and drift fluctuator") {
  const auto a = sample_bath(3, 1.0, 10.0, 1.0, 1);
  const auto b = sample_bath(2, 0.1, 100.0, 1.0, 2);
  const auto m = merge(a, b);
  REQUIRE(m.fluctuators.size() == 5);
  CHECK(m.gamma_min == 0.1);
  CHECK(m.gamma_max == 100.0);
  std::vector<std::uint64_t> ids;
  for (const auto& f : m.fluctuators) ids.push_back(f.id);
  std::sort(ids.begin(), ids.end());
  CHECK(std::adjacent_find(ids.begin(), ids.end()) == ids.end());

  const auto d = with_drift_fluctuator(a, 5e-9, 1e-3);
  REQUIRE(d.fluctuators.size() == 4);
  CHECK(d.fluctuators.back().id == 3);
  CHECK(d.fluctuators.back().amplitude == 5e-9);
  CHECK(d.gamma_min == 1e-3);
  CHECK_THROWS_AS(with_drift_fluctuator(a, 1.0, 0.0), DomainError);
}

TEST_CASE("telegraph spectrum") {
  // Two-sided Lorentzian integrates to a^2 over all frequencies.
  const double g = 3.0, a = 2.0;
  CHECK(rtn_psd(g, a, 0.0) == doctest::Approx(a * a / g));
  const double fc = 2.0 * g / (2.0 * std::numbers::pi);
  CHECK(rtn_psd(g, a, fc) == doctest::Approx(0.5 * rtn_psd(g, a, 0.0)));
  double integral = 0.0;
  const double df = 1e-3;
  for (double f = 0.5 * df; f < 2e4; f += df) integral += 2.0 * rtn_psd(g, a, f) * df;
  CHECK(integral == doctest::Approx(a * a).epsilon(1e-3));
  CHECK_THROWS_AS(rtn_psd(0.0, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(rtn_psd(1.0, 1.0, -1.0), DomainError);
}

TEST_CASE("amplitude calibration") {
  const auto c = calibrate_amplitude(1e-17, 10000, 1e-4, 1e4);
  CHECK(c.value == doctest::Approx(std::sqrt(1e-17 * std::log(1e8) / 1e4)));
  CHECK(c.warnings.empty());
  CHECK_FALSE(calibrate_amplitude(1e-17, 10, 1.0, 50.0).warnings.empty());
  CHECK(calibrate_amplitude(0.0, 10, 1.0, 50.0).value == 0.0);
  CHECK_THROWS_AS(calibrate_amplitude(1e-17, 0, 1.0, 10.0), DomainError);
  CHECK_THROWS_AS(calibrate_amplitude(-1.0, 10, 1.0, 10.0), DomainError);

  // Summing the Lorentzians of a log-uniform ensemble gives h/f in the band.
  const double h = 1e-17, gmin = 1e-4, gmax = 1e4;
  const double amp = calibrate_amplitude(h, 1, gmin, gmax).value;
  const double f = 1.0;
  double s = 0.0;
  const int steps = 200000;
  const double dl = std::log(gmax / gmin) / steps;
  for (int i = 0; i < steps; ++i) {
    const double g = gmin * std::exp((i + 0.5) * dl);
    s += 2.0 * rtn_psd(g, amp, f) * dl / std::log(gmax / gmin);
  }
  CHECK(s * f == doctest::Approx(h).epsilon(1e-3));
}

TEST_CASE("flip times follow a Poisson process at the switch rate") {
  Fluctuator f{2.0, 1.0, 1, 9};
  const auto t = flip_times(f, 5000.0, 11);
  CHECK(static_cast<double>(t.size()) == doctest::Approx(10000.0).epsilon(0.03));
  CHECK(std::is_sorted(t.begin(), t.end()));
  CHECK(t == flip_times(f, 5000.0, 11));
  CHECK(t != flip_times(f, 5000.0, 12));
}

TEST_CASE("synthesized trace basics") {
  const auto e = single(0.5, 1.0);
  const auto tr = synthesize_trace(e, 20000.0, 0.05, 3);
  CHECK(tr.size() == 400000);
  CHECK(tr.dt == 0.05);
  for (double y : tr.samples) REQUIRE(std::abs(y) <= 1.0 + 1e-12);
  CHECK(std::abs(mean(tr.samples)) < 0.05);
  // gamma dt << 1: variance close to a^2.
  CHECK(variance(tr.samples) == doctest::Approx(1.0).epsilon(0.03));

  const auto empty = synthesize_trace(FluctuatorEnsemble{}, 10.0, 0.1, 1);
  CHECK(empty.size() == 100);
  for (double y : empty.samples) CHECK(y == 0.0);

  CHECK_THROWS_AS(synthesize_trace(e, 0.05, 0.05, 1), DomainError);
  CHECK_THROWS_AS(synthesize_trace(e, 10.0, 0.0, 1), DomainError);
}

TEST_CASE("synthesis is independent of the thread count") {
  const auto e = sample_bath(300, 1e-2, 1e2, 1e-9, 5);
  SynthOptions one, many;
  one.threads = 1;
  many.threads = 4;
  const auto a = synthesize_trace(e, 200.0, 0.05, 9, one);
  const auto b = synthesize_trace(e, 200.0, 0.05, 9, many);
  REQUIRE(a.size() == b.size());
  bool identical = true;
  for (std::size_t i = 0; i < a.size(); ++i) identical = identical && a.samples[i] == b.samples[i];
  CHECK(identical);
  const auto c = synthesize_trace(e, 200.0, 0.05, 10, one);
  CHECK(c.samples != a.samples);
}

TEST_CASE("per-gate and per-flip paths agree statistically") {
  // gamma dt = 20: gate averaging shrinks the variance to ~ a^2/(gamma dt).
  const auto e = single(400.0, 1.0);
  SynthOptions flips, gates;
  flips.per_gate_threshold = 1e9;
  gates.per_gate_threshold = 1.0;
  const auto a = synthesize_trace(e, 2000.0, 0.05, 4, flips);
  const auto b = synthesize_trace(e, 2000.0, 0.05, 4, gates);
  const double x = 2.0 * 400.0 * 0.05;
  const double expected = 2.0 * (x - 1.0 + std::exp(-x)) / (x * x);
  CHECK(variance(a.samples) == doctest::Approx(expected).epsilon(0.05));
  CHECK(variance(b.samples) == doctest::Approx(expected).epsilon(0.05));
}

TEST_CASE("pound loop") {
  FrequencyTrace t;
  t.dt = 0.01;
  t.samples.assign(5000, 3e-9);
  const auto out = simulate_pound_loop(t, 20.0, 0.0, 0.05, 1);
  CHECK(out.size() == 1000);
  CHECK(out.dt == 0.05);
  CHECK(out.samples.back() == doctest::Approx(3e-9).epsilon(1e-9));
  // First step moves by gain * gate of the error.
  CHECK(out.samples.front() == doctest::Approx(20.0 * 0.05 * 3e-9));

  CHECK_THROWS_AS(simulate_pound_loop(t, 40.0, 0.0, 0.05, 1), InstabilityError);
  CHECK_THROWS_AS(simulate_pound_loop(t, 20.0, 0.0, 0.025, 1), UsageError);
  CHECK_THROWS_AS(simulate_pound_loop(t, 20.0, 0.0, 0.005, 1), UsageError);
  CHECK_THROWS_AS(simulate_pound_loop(t, 0.0, 0.0, 0.05, 1), DomainError);

  const auto n1 = simulate_pound_loop(t, 5.0, 1e-10, 0.05, 2);
  const auto n2 = simulate_pound_loop(t, 5.0, 1e-10, 0.05, 2);
  CHECK(n1.samples == n2.samples);
}

TEST_CASE("trace csv round trip") {
  const auto e = sample_bath(20, 1e-2, 1e2, 1e-9, 5);
  auto tr = synthesize_trace(e, 10.0, 0.05, 9);
  tr.start_time = 0.0;
  std::stringstream ss;
  write_trace_csv(ss, tr);
  const auto back = read_trace_csv(ss);
  CHECK(back.dt == tr.dt);
  CHECK(back.nu_mean == tr.nu_mean);
  CHECK(back.seed == tr.seed);
  CHECK(back.samples == tr.samples);

  std::stringstream bad("# dt=0.1\ntime,y\n0,1\n0.1,abc\n");
  CHECK_THROWS_AS(read_trace_csv(bad), UsageError);
}

TEST_CASE("log-uniform rates fill each decade equally") {
  const auto e = sample_bath(10000, 1e-4, 1e4, 1.0, 8);
  std::vector<int> counts(8, 0);
  for (const auto& f : e.fluctuators) {
    const int d = std::min(7, static_cast<int>(std::floor(std::log10(f.switch_rate) + 4.0)));
    ++counts[static_cast<std::size_t>(d)];
  }
  for (int c : counts) CHECK(std::abs(c / 10000.0 - 0.125) <= 0.01);
}

TEST_CASE("telegraph marginals and flip counting") {
  const Fluctuator f{0.2, 1.0, 1, 0};
  const auto tr = synthesize_trace(single(0.2, 1.0), 50000.0, 0.05, 6);
  double up = 0.0;
  for (double y : tr.samples) up += 0.5 * (1.0 + y);
  CHECK(std::abs(up / static_cast<double>(tr.size()) - 0.5) <= 0.02);

  const double expected = f.switch_rate * 50000.0;
  const double n = static_cast<double>(flip_times(f, 50000.0, 6).size());
  CHECK(std::abs(n - expected) <= 3.0 * std::sqrt(expected));
}

TEST_CASE("superposition of disjoint ensembles") {
  const auto a = sample_bath(40, 1e-2, 1e2, 1e-9, 1);
  auto b = sample_bath(30, 1e-2, 1e2, 2e-9, 2);
  for (auto& f : b.fluctuators) f.id += 1000;
  const auto ab = merge(a, b);
  const auto ta = synthesize_trace(a, 100.0, 0.05, 17);
  const auto tb = synthesize_trace(b, 100.0, 0.05, 17);
  const auto tab = synthesize_trace(ab, 100.0, 0.05, 17);
  double worst = 0.0;
  for (std::size_t k = 0; k < tab.size(); ++k) {
    worst = std::max(worst, std::abs(tab.samples[k] - ta.samples[k] - tb.samples[k]));
  }
  CHECK(worst <= 1e-20);
}

TEST_CASE("pound loop step response") {
  FrequencyTrace t;
  t.dt = 0.05;
  t.samples.assign(400, 1e-8);
  const double g = 4.0, gate = 0.05;
  const auto out = simulate_pound_loop(t, g, 0.0, gate, 1);
  for (std::size_t j = 0; j < 40; j += 7) {
    const double residual = 1e-8 - out.samples[j];
    CHECK(residual == doctest::Approx(1e-8 * std::pow(1.0 - g * gate, double(j + 1))).epsilon(1e-6));
  }
}

TEST_CASE("ensemble periodogram follows 1/f") {
  const double h = 1e-17, gmin = 1e-4, gmax = 1e1;
  const std::size_t n = 3000;
  const double amp = calibrate_amplitude(h, n, gmin, gmax).value;
  const auto tr = synthesize_trace(sample_bath(n, gmin, gmax, amp, 12), 20000.0, 0.05, 12);
  const auto binned = spectral::log_bin(spectral::psd_periodogram(tr, 16), 5);
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int m = 0;
  for (std::size_t k = 0; k < binned.freqs.size(); ++k) {
    if (binned.freqs[k] < 0.01 || binned.freqs[k] > 0.3) continue;
    const double x = std::log10(binned.freqs[k]), y = std::log10(binned.psd[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  REQUIRE(m >= 6);
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  CHECK(std::abs(slope + 1.0) <= 0.1);
}
