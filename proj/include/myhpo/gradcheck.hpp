#pragma once

#include <cstdint>
#include <string>

namespace myhpo {

struct GradcheckReport {
  long instances = 0;
  long checks = 0;
  double max_rel_error = 0.0;
  std::string worst;  // which gradient produced max_rel_error
  bool ok = false;
};

// Compares every analytic gradient against central differences on random
// instances (d <= 20, N <= 50, both losses).
GradcheckReport gradcheck(long instances, std::uint64_t seed, double tol = 1e-4);

}  // namespace myhpo
