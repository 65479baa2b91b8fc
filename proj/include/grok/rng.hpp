#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace grok {

// Independent substreams per generated field. The numeric ids are stable and
// define reproducibility: changing them changes every generated instance.
enum class Stream : std::uint64_t {
  raw = 0,
  basis = 1,        // orthonormal bases, singular vectors
  measurement = 2,  // Gaussian measurement rows
  support = 3,      // sparse support / observed-entry selection
  signal = 4,       // nonzero values of the target
  noise = 5,        // measurement noise
  init = 6,         // optimizer initialization
  split = 7,        // train/validation split
  teacher = 8,      // teacher weights and inputs
  probe = 9,        // Monte Carlo sampling in estimators
};

std::uint64_t splitmix64(std::uint64_t x);

// mt19937_64 seeded through splitmix64(seed, stream). Distributions are
// implemented here rather than taken from <random> so that sequences are the
// same with every standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, Stream stream = Stream::raw);

  std::uint64_t next() { return eng_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Standard normal (Marsaglia polar method).
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  // Uniform integer in [0, n), unbiased.
  std::uint64_t below(std::uint64_t n);
  // k distinct indices from [0, n), in draw order.
  std::vector<long> sample_without_replacement(long n, long k);

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace grok
