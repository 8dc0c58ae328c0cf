#pragma once

#include <cstdint>
#include <random>

#include "actol/embedding.hpp"

namespace actol {

/// SplitMix64 finalizer; used to derive independent seeds from (seed, stream).
std::uint64_t splitmix64(std::uint64_t x);

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream + 0x9E3779B97F4A7C15ULL));
}

/// Seedable generator with a fully specified output sequence.
///
/// The engine is std::mt19937_64, whose sequence is fixed by the C++
/// standard. Distributions are implemented here rather than through
/// <random>, whose distribution algorithms are implementation-defined:
///   uniform():  top 53 bits of one engine draw, scaled to [0, 1).
///   normal():   Box-Muller on two uniforms, both outputs used in turn.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  double normal();
  double normal(double mean, double sigma) { return mean + sigma * normal(); }

  Vector gaussian_vector(Eigen::Index dim);
  /// Uniformly distributed point on the unit sphere.
  Vector unit_vector(Eigen::Index dim);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace actol
