#pragma once

// Allan variance, periodogram PSD and 1/f magnitude extraction.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "tlsnoise/bath.hpp"

namespace tlsnoise::spectral {

struct AllanSpectrum {
  std::vector<double> taus;       // s, strictly increasing
  std::vector<double> sigma2;
  std::vector<double> std_error;
  std::vector<std::size_t> n_terms;
  std::vector<std::string> warnings;  // one per omitted tau
};

enum class AvarMode {
  /// Overlapping estimator on fractional frequency y.
  overlapping,
  /// Literal two-sample formula on raw nu = nu_mean (1 + y): non-overlapping
  /// adjacent n-sample means, 1/(2(M-1)) sum (nu_{k+1} - nu_k)^2, in Hz^2.
  raw_adjacent,
};

struct AvarOptions {
  AvarMode mode = AvarMode::overlapping;
  bool detrend = false;  // remove a least-squares line first
};

/// Each tau must be an integer multiple of trace.dt (UsageError otherwise).
/// Taus with n > samples/5 or fewer than two terms are dropped with a warning.
AllanSpectrum overlapping_avar(const bath::FrequencyTrace& trace,
                               const std::vector<double>& taus,
                               const AvarOptions& options = {});

/// Roughly log-spaced taus between tau_min and tau_max (always included),
/// rounded to distinct multiples of dt.
std::vector<double> log_tau_grid(double dt, double tau_min, double tau_max,
                                 std::size_t per_decade);

struct OneOverFEstimate {
  double h_minus1 = 0.0;
  double a0 = 0.0;  // 2 pi h_-1
  double std_error = 0.0;
  std::pair<double, double> tau_range{0.0, 0.0};
  std::size_t n_points = 0;
};

/// h_-1 = mean(sigma^2)/(2 ln 2) over taus in [tau_lo, tau_hi], minus any
/// excluded windows. std_error is the sample standard deviation / (2 ln 2).
OneOverFEstimate extract_h_minus1(const AllanSpectrum& avar, double tau_lo, double tau_hi,
                                  const std::vector<std::pair<double, double>>& exclude = {});

struct Periodogram {
  std::vector<double> freqs;  // Hz, bin k at k fs / L
  std::vector<double> psd;    // one-sided, 1/Hz
  double df = 0.0;
};

/// Hann-windowed, segment-averaged one-sided periodogram. Each segment has its
/// mean removed; sum(psd) df matches the trace variance.
Periodogram psd_periodogram(const bath::FrequencyTrace& trace, std::size_t n_segments);

struct BinnedPsd {
  std::vector<double> freqs;  // geometric bin centres
  std::vector<double> psd;    // arithmetic mean within the bin
  std::vector<std::size_t> counts;
};

/// Averages periodogram bins (DC excluded) into log-spaced bands.
BinnedPsd log_bin(const Periodogram& p, std::size_t per_decade);

/// Mean of psd(f) f over bins in [f_lo, f_hi].
double h_minus1_from_psd(const Periodogram& p, double f_lo, double f_hi);

void write_avar_csv(std::ostream& out, const AllanSpectrum& avar);
void write_psd_csv(std::ostream& out, const Periodogram& p);

}  // namespace tlsnoise::spectral
