#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace tlsnoise {

/// Counter-based generator: output k of stream (seed, id, domain) is a pure
/// function of those four integers (SplitMix64 finalizer over a keyed counter).
/// Streams for different ids are independent of the order they are consumed in.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t domain = 0)
      : key_(mix(mix(seed ^ 0x243F6A8885A308D3ULL) ^ mix(stream_id + 0x13198A2E03707344ULL) ^
                 mix(domain + 0xA4093822299F31D0ULL))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return mix(key_ + (++counter_) * 0x9E3779B97F4A7C15ULL); }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53; }

  /// Exponential variate with the given rate.
  double exponential(double rate) { return -std::log(uniform()) / rate; }

  std::uint64_t counter() const { return counter_; }

 private:
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace tlsnoise
