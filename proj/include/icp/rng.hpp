#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace icp {

// Seeded random stream with portable output.
//
// std::mt19937_64 is fully specified by the standard, but the std
// distributions are not, so uniform/normal/bounded draws are implemented
// here on top of the raw 64-bit engine output. Two Rng objects built from the
// same seed produce the same sequence on every conforming platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on the open interval (0, 1).
  double uniform();

  // Standard normal via the Box-Muller transform; the second variate of
  // each pair is cached.
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

  // Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

// Derives an independent sub-stream seed from (master, label, index).
// Streams are keyed by purpose rather than by call order, so any subset of
// the derived streams can be regenerated in isolation.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                          std::uint64_t index = 0);

// Uniformly random permutation of 0..n-1 (Fisher-Yates).
std::vector<std::size_t> permutation(std::size_t n, Rng& rng);

}  // namespace icp
