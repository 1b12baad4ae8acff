#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace myhpo {

// Seedable stream shared by every stochastic component. The engine is
// std::mt19937_64, whose output sequence is fixed by the C++ standard, and
// every derived draw below is computed by hand so that results do not depend
// on the standard library's distribution implementations.
class Rng {
 public:
  static constexpr std::string_view kAlgorithm = "mt19937_64+box_muller";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on [lo, hi).
  double uniform(double lo, double hi);

  // Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal();

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace myhpo
