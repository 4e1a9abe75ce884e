#include "tlsnoise/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <ostream>

#include "tlsnoise/csv.hpp"

namespace tlsnoise::spectral {

namespace {

// FFTW planning touches global state.
std::mutex fftw_plan_mutex;

std::vector<double> prepared_samples(const bath::FrequencyTrace& trace, bool detrend) {
  std::vector<double> y = trace.samples;
  if (detrend) {
    const double n = static_cast<double>(y.size());
    const double k_mean = (n - 1.0) / 2.0;
    double y_mean = 0.0;
    for (double v : y) y_mean += v;
    y_mean /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
      const double dk = static_cast<double>(k) - k_mean;
      sxy += dk * (y[k] - y_mean);
      sxx += dk * dk;
    }
    const double slope = sxy / sxx;
    for (std::size_t k = 0; k < y.size(); ++k) {
      y[k] -= y_mean + slope * (static_cast<double>(k) - k_mean);
    }
  }
  return y;
}

struct TermStats {
  double mean = 0.0;
  double std_dev = 0.0;
};

TermStats term_stats(const std::vector<double>& terms) {
  TermStats s;
  for (double t : terms) s.mean += t;
  s.mean /= static_cast<double>(terms.size());
  double ss = 0.0;
  for (double t : terms) ss += (t - s.mean) * (t - s.mean);
  s.std_dev = terms.size() > 1 ? std::sqrt(ss / static_cast<double>(terms.size() - 1)) : 0.0;
  return s;
}

}  // namespace

AllanSpectrum overlapping_avar(const bath::FrequencyTrace& trace, const std::vector<double>& taus,
                               const AvarOptions& options) {
  trace.validate();
  std::vector<std::size_t> ns;
  for (double tau : taus) {
    const double ratio = tau / trace.dt;
    const double rounded = std::round(ratio);
    if (!(rounded >= 1.0) || std::abs(ratio - rounded) > 1e-6 * rounded) {
      throw UsageError("tau " + csv::fmt(tau) + " s is not a positive integer multiple of dt");
    }
    ns.push_back(static_cast<std::size_t>(rounded));
  }
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());

  const std::vector<double> y = prepared_samples(trace, options.detrend);
  const std::size_t N = y.size();

  AllanSpectrum out;
  if (options.mode == AvarMode::overlapping) {
    // Offsetting by the first sample keeps a constant trace exactly at zero.
    std::vector<long double> prefix(N + 1, 0.0L);
    for (std::size_t k = 0; k < N; ++k) prefix[k + 1] = prefix[k] + (y[k] - y[0]);
    std::vector<double> terms;
    for (std::size_t n : ns) {
      const double tau = static_cast<double>(n) * trace.dt;
      if (n > N / 5 || N < 2 * n + 1) {
        out.warnings.push_back("tau " + csv::fmt(tau) + " s omitted: exceeds duration/5");
        continue;
      }
      const std::size_t count = N - 2 * n + 1;
      if (count < 2) {
        out.warnings.push_back("tau " + csv::fmt(tau) + " s omitted: fewer than two terms");
        continue;
      }
      terms.resize(count);
      const long double inv_n = 1.0L / static_cast<long double>(n);
      for (std::size_t k = 0; k < count; ++k) {
        const long double d = (prefix[k + 2 * n] - 2.0L * prefix[k + n] + prefix[k]) * inv_n;
        terms[k] = static_cast<double>(d * d) / 2.0;
      }
      const TermStats s = term_stats(terms);
      const double n_eff = std::max(1.0, static_cast<double>(count) / static_cast<double>(n));
      out.taus.push_back(tau);
      out.sigma2.push_back(s.mean);
      out.std_error.push_back(s.std_dev / std::sqrt(n_eff));
      out.n_terms.push_back(count);
    }
  } else {
    std::vector<double> means;
    std::vector<double> terms;
    for (std::size_t n : ns) {
      const double tau = static_cast<double>(n) * trace.dt;
      const std::size_t m = N / n;
      if (n > N / 5 || m < 3) {
        out.warnings.push_back("tau " + csv::fmt(tau) + " s omitted: exceeds duration/5");
        continue;
      }
      means.assign(m, 0.0);
      for (std::size_t j = 0; j < m; ++j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) acc += trace.nu_mean * (1.0 + y[j * n + k]);
        means[j] = acc / static_cast<double>(n);
      }
      terms.resize(m - 1);
      for (std::size_t j = 0; j + 1 < m; ++j) {
        const double d = means[j + 1] - means[j];
        terms[j] = d * d / 2.0;
      }
      const TermStats s = term_stats(terms);
      out.taus.push_back(tau);
      out.sigma2.push_back(s.mean);
      out.std_error.push_back(s.std_dev / std::sqrt(static_cast<double>(terms.size())));
      out.n_terms.push_back(terms.size());
    }
  }
  return out;
}

std::vector<double> log_tau_grid(double dt, double tau_min, double tau_max,
                                 std::size_t per_decade) {
  if (!(dt > 0.0) || !(tau_min > 0.0) || !(tau_max >= tau_min) || per_decade == 0) {
    throw UsageError("tau grid needs dt > 0, 0 < tau_min <= tau_max and per_decade >= 1");
  }
  std::vector<double> out;
  const double decades = std::log10(tau_max / tau_min);
  const auto steps = static_cast<std::size_t>(std::floor(decades * static_cast<double>(per_decade) + 1e-9));
  long long last = 0;
  for (std::size_t i = 0; i <= steps; ++i) {
    const double tau = tau_min * std::pow(10.0, static_cast<double>(i) / static_cast<double>(per_decade));
    const long long n = std::max(1LL, std::llround(tau / dt));
    if (n == last) continue;
    last = n;
    out.push_back(static_cast<double>(n) * dt);
  }
  const long long n_max = std::max(1LL, std::llround(tau_max / dt));
  if (n_max > last) out.push_back(static_cast<double>(n_max) * dt);
  return out;
}

OneOverFEstimate extract_h_minus1(const AllanSpectrum& avar, double tau_lo, double tau_hi,
                                  const std::vector<std::pair<double, double>>& exclude) {
  if (avar.taus.empty()) throw UsageError("empty Allan spectrum");
  if (!(tau_lo > 0.0) || !(tau_hi > tau_lo)) throw UsageError("tau window needs 0 < lo < hi");
  constexpr double slack = 1e-9;
  if (tau_lo < avar.taus.front() * (1.0 - slack) || tau_hi > avar.taus.back() * (1.0 + slack)) {
    throw UsageError("tau window [" + csv::fmt(tau_lo) + ", " + csv::fmt(tau_hi) +
                     "] s lies outside the computed grid [" + csv::fmt(avar.taus.front()) + ", " +
                     csv::fmt(avar.taus.back()) + "] s");
  }
  if (tau_hi / tau_lo < 10.0 * (1.0 - slack)) throw UsageError("tau window must span at least one decade");

  std::vector<double> vals;
  for (std::size_t i = 0; i < avar.taus.size(); ++i) {
    const double tau = avar.taus[i];
    if (tau < tau_lo * (1.0 - slack) || tau > tau_hi * (1.0 + slack)) continue;
    bool skip = false;
    for (const auto& [lo, hi] : exclude) skip = skip || (tau >= lo && tau <= hi);
    if (!skip) vals.push_back(avar.sigma2[i]);
  }
  if (vals.size() < 3) throw UsageError("tau window holds fewer than three grid points");

  const TermStats s = term_stats(vals);
  const double norm = 2.0 * std::numbers::ln2;
  OneOverFEstimate est;
  est.h_minus1 = s.mean / norm;
  est.a0 = 2.0 * std::numbers::pi * est.h_minus1;
  est.std_error = s.std_dev / norm;
  est.tau_range = {tau_lo, tau_hi};
  est.n_points = vals.size();
  return est;
}

Periodogram psd_periodogram(const bath::FrequencyTrace& trace, std::size_t n_segments) {
  trace.validate();
  if (n_segments == 0) throw UsageError("n_segments must be >= 1");
  const std::size_t len = trace.size() / n_segments;
  if (len < 16) throw UsageError("periodogram segments must hold at least 16 samples");

  std::vector<double> window(len);
  double w2 = 0.0;
  for (std::size_t k = 0; k < len; ++k) {
    window[k] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) /
                                     static_cast<double>(len));
    w2 += window[k] * window[k];
  }

  const std::size_t n_bins = len / 2 + 1;
  double* in = fftw_alloc_real(len);
  fftw_complex* spec = fftw_alloc_complex(n_bins);
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex);
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(len), in, spec, FFTW_ESTIMATE);
  }

  const double fs = 1.0 / trace.dt;
  Periodogram out;
  out.df = fs / static_cast<double>(len);
  out.freqs.resize(n_bins);
  out.psd.assign(n_bins, 0.0);
  for (std::size_t b = 0; b < n_bins; ++b) out.freqs[b] = static_cast<double>(b) * out.df;

  for (std::size_t s = 0; s < n_segments; ++s) {
    const double* seg = trace.samples.data() + s * len;
    double mean = 0.0;
    for (std::size_t k = 0; k < len; ++k) mean += seg[k];
    mean /= static_cast<double>(len);
    for (std::size_t k = 0; k < len; ++k) in[k] = (seg[k] - mean) * window[k];
    fftw_execute(plan);
    for (std::size_t b = 0; b < n_bins; ++b) {
      const double p = spec[b][0] * spec[b][0] + spec[b][1] * spec[b][1];
      const bool edge = b == 0 || (len % 2 == 0 && b == n_bins - 1);
      out.psd[b] += (edge ? 1.0 : 2.0) * p;
    }
  }
  const double scale = 1.0 / (fs * w2 * static_cast<double>(n_segments));
  for (double& p : out.psd) p *= scale;

  {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex);
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(spec);
  return out;
}

BinnedPsd log_bin(const Periodogram& p, std::size_t per_decade) {
  if (per_decade == 0) throw UsageError("per_decade must be >= 1");
  BinnedPsd out;
  if (p.freqs.size() < 2) return out;
  const double f0 = p.freqs[1];
  const double step = 1.0 / static_cast<double>(per_decade);
  std::size_t i = 1;
  while (i < p.freqs.size()) {
    const double idx = std::floor(std::log10(p.freqs[i] / f0) / step + 1e-9);
    const double hi = f0 * std::pow(10.0, (idx + 1.0) * step);
    double sum = 0.0;
    double lsum = 0.0;
    std::size_t count = 0;
    while (i < p.freqs.size() && p.freqs[i] < hi) {
      sum += p.psd[i];
      lsum += std::log(p.freqs[i]);
      ++count;
      ++i;
    }
    if (count == 0) continue;
    out.freqs.push_back(std::exp(lsum / static_cast<double>(count)));
    out.psd.push_back(sum / static_cast<double>(count));
    out.counts.push_back(count);
  }
  return out;
}

double h_minus1_from_psd(const Periodogram& p, double f_lo, double f_hi) {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 1; i < p.freqs.size(); ++i) {
    if (p.freqs[i] < f_lo || p.freqs[i] > f_hi) continue;
    sum += p.psd[i] * p.freqs[i];
    ++count;
  }
  if (count == 0) throw UsageError("frequency band holds no periodogram bins");
  return sum / static_cast<double>(count);
}

void write_avar_csv(std::ostream& out, const AllanSpectrum& avar) {
  out << "tau,sigma2,stderr,n_terms\n";
  for (std::size_t i = 0; i < avar.taus.size(); ++i) {
    out << csv::fmt(avar.taus[i]) << ',' << csv::fmt(avar.sigma2[i]) << ','
        << csv::fmt(avar.std_error[i]) << ',' << avar.n_terms[i] << '\n';
  }
}

void write_psd_csv(std::ostream& out, const Periodogram& p) {
  out << "freq,psd\n";
  for (std::size_t i = 0; i < p.freqs.size(); ++i) {
    out << csv::fmt(p.freqs[i]) << ',' << csv::fmt(p.psd[i]) << '\n';
  }
}

}  // namespace tlsnoise::spectral
