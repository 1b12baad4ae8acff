#include "myhpo/sho.hpp"

#include <cmath>
#include <string>

#include "myhpo/error.hpp"
#include "run_support.hpp"

namespace myhpo {

void ShoConfig::validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0) || !(sigma >= 0.0) || max_iters < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "SHO needs alpha, beta, sigma >= 0 and max_iters >= 1");
  }
}

ShoState sho_step(const ShoState& state, LossKind kind, const Dataset& train,
                  const Dataset& val, const ShoConfig& cfg, Rng& rng) {
  ShoState next = state;
  const double lambda_hat = state.lambda + cfg.sigma * rng.normal();

  // d/dphi of L_T(G(lambda_hat)) = [lambda_hat * g ; g].
  const Vector g = grad_w_train(kind, best_response(state.br, lambda_hat), lambda_hat, train);
  next.br.phi1 -= (cfg.alpha * lambda_hat) * g;
  next.br.phi0 -= cfg.alpha * g;

  // d/dlambda of L_V(G(lambda)) = phi1^T grad_w L_V, at the updated phi.
  const Vector gv = grad_w_val(kind, best_response(next.br, state.lambda), val);
  next.lambda = state.lambda - cfg.beta * next.br.phi1.dot(gv);

  next.iter += 1;
  next.grad_count += 2;

  if (!std::isfinite(lambda_hat) || !std::isfinite(next.lambda) ||
      !detail::all_finite(next.br.phi1) || !detail::all_finite(next.br.phi0)) {
    throw Error(ErrorCode::kNonFiniteIterate,
                "SHO iterate left the finite range at iteration " + std::to_string(next.iter));
  }
  return next;
}

RunTrace sho_run(const ShoState& init, const Problem& problem, const ShoConfig& cfg,
                 long budget) {
  cfg.validate();
  if (budget < 2) throw Error(ErrorCode::kInvalidArgument, "SHO budget must be >= 2");

  RunTrace trace;
  trace.solver = "sho";
  trace.seed = cfg.seed;
  trace.prng = std::string(Rng::kAlgorithm);
  trace.params = {
      {"loss", std::string(to_string(problem.loss))},
      {"alpha", format_double(cfg.alpha)},
      {"beta", format_double(cfg.beta)},
      {"sigma", format_double(cfg.sigma)},
      {"lambda0", format_double(init.lambda)},
      {"max_iters", std::to_string(cfg.max_iters)},
      {"budget_n_g", std::to_string(budget)},
  };

  Rng rng(cfg.seed);
  ShoState state = init;
  trace.status = RunStatus::kBudget;
  while (true) {
    if (state.grad_count + 2 > budget) {
      trace.status = RunStatus::kBudget;
      break;
    }
    if (state.iter >= cfg.max_iters) {
      trace.status = RunStatus::kMaxIters;
      break;
    }
    try {
      state = sho_step(state, problem.loss, problem.train, problem.val, cfg, rng);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNonFiniteIterate) throw;
      trace.diverged = true;
      trace.status = RunStatus::kDiverged;
      break;
    }
    const Vector w = best_response(state.br, state.lambda);
    const detail::Losses losses = detail::report_losses(problem, w);
    if (!losses.finite()) {
      trace.diverged = true;
      trace.status = RunStatus::kDiverged;
      break;
    }
    trace.rows.push_back(detail::make_row(state.iter, state.grad_count, state.lambda, losses, 0));
    trace.weights = w;
    trace.lambda = state.lambda;
  }
  if (trace.rows.empty()) {
    trace.weights = best_response(init.br, init.lambda);
    trace.lambda = init.lambda;
  }
  return trace;
}

}  // namespace myhpo
