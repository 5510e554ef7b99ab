#pragma once

#include <cstdint>
#include <cstddef>
#include <vector>

namespace wpolab {

// Deterministic random stream: xoshiro256++ core seeded through splitmix64,
// with explicit Box-Muller normals. Draw sequences are reproducible across
// platforms and standard libraries, which the metrics determinism guarantee
// relies on. Draw order per call is documented at each method.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // one u64 draw, result in [0, 1)
  double uniform();
  // one u64 draw, result in [lo, hi)
  double uniform(double lo, double hi);
  // one u64 draw, result in {0, ..., n-1}; n must be > 0
  std::size_t uniform_index(std::size_t n);
  // two u64 draws on the first call of a pair, zero on the second
  double normal();
  double normal(double mean, double stddev);
  // one u64 draw
  double exponential(double scale);

  std::vector<double> normal_vec(std::size_t n);

 private:
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace wpolab
