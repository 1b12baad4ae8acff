#pragma once

#include <cstdint>
#include <limits>

#include "myhpo/problem.hpp"
#include "myhpo/rng.hpp"
#include "myhpo/trace.hpp"

namespace myhpo {

// Alternating-gradient baseline with a local affine hypernetwork. Each
// iteration perturbs lambda, takes a training-gradient step on (phi1, phi0)
// through the chain rule, then a validation-hypergradient step on lambda.
struct ShoConfig {
  double alpha = 0.01;  // phi step
  double beta = 0.01;   // lambda step
  double sigma = 1e-4;  // std of the lambda perturbation
  long max_iters = std::numeric_limits<long>::max();
  std::uint64_t seed = 0;

  void validate() const;
};

struct ShoState {
  BestResponse br;
  double lambda = -1.0;
  long iter = 0;
  long grad_count = 0;

  static ShoState initial(Eigen::Index d, double lambda0 = -1.0) {
    return {BestResponse::zeros(d), lambda0, 0, 0};
  }
};

// Throws NonFiniteIterate when the update leaves the finite range.
ShoState sho_step(const ShoState& state, LossKind kind, const Dataset& train,
                  const Dataset& val, const ShoConfig& cfg, Rng& rng);

// Steps until the next iteration would exceed `budget` gradient evaluations
// or max_iters is reached. Divergence ends the run but keeps the trace.
RunTrace sho_run(const ShoState& init, const Problem& problem, const ShoConfig& cfg,
                 long budget);

}  // namespace myhpo
