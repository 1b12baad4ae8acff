#include "myhpo/rng.hpp"

#include <cmath>
#include <numbers>

namespace myhpo {

double Rng::uniform(double lo, double hi) {
  const double x = lo + (hi - lo) * uniform();
  // lo + (hi-lo)*u can round up to hi when u is within an ulp of 1.
  return x < hi ? x : std::nextafter(hi, lo);
}

double Rng::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

std::uint64_t Rng::below(std::uint64_t n) {
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % n;
}

}  // namespace myhpo
