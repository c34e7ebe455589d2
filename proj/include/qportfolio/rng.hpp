#pragma once

#include <cstdint>
#include <random>

namespace qportfolio {

// Deterministic random stream: same seed, same sequence, on every platform.
//
// std::mt19937_64 has a portable, standard-mandated output sequence, but the
// standard *distributions* on top of it do not (libstdc++ and libc++ produce
// different normal/gamma draws).  All variate generation is therefore done
// here: 53-bit uniforms, Box-Muller normals, Marsaglia-Tsang gamma draws.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  // Independent substream for parallel work items (per path, per chunk).
  // Derivation mixes (seed, index) through splitmix64, so substreams do not
  // depend on how much of the parent stream has been consumed.
  RngStream derive(std::uint64_t index) const;

  std::uint64_t seed() const noexcept { return seed_; }

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Uniform on [a, b).
  double uniform(double a, double b);
  // Uniform integer in {0, ..., n-1}; n must be positive.
  std::uint64_t uniform_below(std::uint64_t n);

  // Standard normal (Box-Muller; draws come out in cached pairs).
  double normal();

  // Gamma(shape, 1) via Marsaglia-Tsang, with the U^(1/shape) boost for
  // shape < 1.  shape must be positive.
  double gamma(double shape);

  // Chi-squared with k degrees of freedom (k > 0, not necessarily integer).
  double chi_squared(double dof);

 private:
  double uniform_positive();  // (0, 1]

  std::uint64_t seed_;
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace qportfolio
