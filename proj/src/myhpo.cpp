#include "myhpo/myhpo.hpp"

#include <cmath>
#include <string>

#include "myhpo/error.hpp"
#include "myhpo/line_search.hpp"
#include "run_support.hpp"

namespace myhpo {

std::string_view to_string(MyhpoVariant variant) {
  switch (variant) {
    case MyhpoVariant::kSimplifiedConstant:
      return "myhpo_c";
    case MyhpoVariant::kSimplifiedBacktracking:
      return "myhpo_bt";
    case MyhpoVariant::kFull:
      return "myhpo_full";
  }
  return "myhpo";
}

void MyhpoConfig::validate() const {
  if (!(rho >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "rho must be >= 0");
  if (!(alpha > 0.0) || !(beta > 0.0) || !(delta > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha, beta, delta must be > 0");
  }
  if (!(eps_tol > 0.0)) throw Error(ErrorCode::kInvalidArgument, "eps_tol must be > 0");
  if (max_iters < 1 || max_halvings < 1 || inner_max_iters < 1 || !(inner_tol > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "max_iters, max_halvings, inner_max_iters and inner_tol must be positive");
  }
}

MyhpoState MyhpoState::initial(Eigen::Index d, double lambda0) {
  MyhpoState s;
  s.v = Vector::Zero(d);
  s.w = Vector::Zero(d);
  s.u = Vector::Zero(d);
  s.lambda = lambda0;
  s.br = BestResponse::zeros(d);
  return s;
}

Residuals residuals(const MyhpoState& state_new, double lambda_old, double rho) {
  Residuals res;
  res.r = state_new.w - best_response(state_new.br, state_new.lambda);
  res.s = (rho * (state_new.lambda - lambda_old)) * state_new.br.phi1;
  res.r_norm = res.r.norm();
  res.s_norm = res.s.norm();
  return res;
}

double w_merit(LossKind kind, const Vector& w, double lambda, const Vector& u,
               const Vector& consensus, double rho, const Dataset& train) {
  const Vector gap = w - consensus;
  return train_loss(kind, w, lambda, train) + u.dot(gap) + 0.5 * rho * gap.squaredNorm();
}

double lambda_merit(LossKind kind, double lambda, const BestResponse& br, const Vector& w,
                    const Vector& u, double rho, const Dataset& val) {
  const Vector g = best_response(br, lambda);
  const Vector gap = w - g;
  return val_loss(kind, g, val) + u.dot(gap) + 0.5 * rho * gap.squaredNorm();
}

double lambda_merit_grad(LossKind kind, double lambda, const BestResponse& br, const Vector& w,
                         const Vector& u, double rho, const Dataset& val) {
  const Vector g = best_response(br, lambda);
  const Vector gap = w - g;
  return br.phi1.dot(grad_w_val(kind, g, val)) - u.dot(br.phi1) - rho * br.phi1.dot(gap);
}

namespace {

void require_finite(const MyhpoState& s) {
  if (!std::isfinite(s.lambda) || !s.v.allFinite() || !s.w.allFinite() || !s.u.allFinite() ||
      !s.br.phi1.allFinite() || !s.br.phi0.allFinite()) {
    throw Error(ErrorCode::kNonFiniteIterate,
                "MY-HPO iterate left the finite range at iteration " + std::to_string(s.iter));
  }
}

StepResult finish_step(MyhpoState next, double lambda_old, const MyhpoConfig& cfg) {
  next.u = next.u + cfg.rho * (next.w - best_response(next.br, next.lambda));
  next.iter += 1;
  require_finite(next);
  StepResult out;
  out.res = residuals(next, lambda_old, cfg.rho);
  out.state = std::move(next);
  return out;
}

StepResult simplified_step(const MyhpoState& state, LossKind kind, const Dataset& train,
                           const Dataset& val, const MyhpoConfig& cfg, bool backtracking) {
  MyhpoState next = state;
  StepResult rec;
  const double lambda = state.lambda;

  // Step 1: one gradient step on v, then re-derive phi.
  const Vector g_train = grad_w_train(kind, state.v, lambda, train);
  next.grad_count += 1;
  double t_v = cfg.alpha;
  if (backtracking && !g_train.isZero(0.0)) {
    auto merit = [&](const Vector& x) { return train_loss(kind, x, lambda, train); };
    rec.v_block.merit_before = merit(state.v);
    const BacktrackResult bt =
        backtrack(merit, state.v, g_train, rec.v_block.merit_before, cfg.alpha, cfg.max_halvings);
    next.loss_eval_count += 1 + bt.evaluations;
    t_v = bt.step;
    rec.v_block.evaluated = true;
    rec.v_block.stalled = bt.stalled;
    rec.v_block.step = bt.step;
    rec.v_block.merit_after = bt.value;
    if (bt.stalled) next.stalled_backtracks += 1;
  }
  if (t_v != 0.0) next.v = state.v - t_v * g_train;
  next.br = split_best_response(next.v, lambda);
  const Vector consensus = best_response(next.br, lambda);

  // Step 2: one step on the augmented w-objective. The training gradient is
  // the Step-1 gradient unless fresh_w_gradient is set.
  Vector g_w = g_train;
  if (cfg.fresh_w_gradient) {
    g_w = grad_w_train(kind, state.w, lambda, train);
    next.grad_count += 1;
  }
  const Vector dir_w = g_w + state.u + cfg.rho * (state.w - consensus);
  double t_w = cfg.beta;
  if (backtracking && !dir_w.isZero(0.0)) {
    auto merit = [&](const Vector& x) {
      return w_merit(kind, x, lambda, state.u, consensus, cfg.rho, train);
    };
    rec.w_block.merit_before = merit(state.w);
    const BacktrackResult bt =
        backtrack(merit, state.w, dir_w, rec.w_block.merit_before, cfg.beta, cfg.max_halvings);
    next.loss_eval_count += 1 + bt.evaluations;
    t_w = bt.step;
    rec.w_block.evaluated = true;
    rec.w_block.stalled = bt.stalled;
    rec.w_block.step = bt.step;
    rec.w_block.merit_after = bt.value;
    if (bt.stalled) next.stalled_backtracks += 1;
  }
  if (t_w != 0.0) next.w = state.w - t_w * dir_w;

  // Step 3: one step on the lambda-objective with w fixed.
  const double dir_lambda =
      lambda_merit_grad(kind, lambda, next.br, next.w, state.u, cfg.rho, val);
  next.grad_count += 1;
  double t_lambda = cfg.delta;
  if (backtracking && dir_lambda != 0.0) {
    auto merit = [&](double x) {
      return lambda_merit(kind, x, next.br, next.w, state.u, cfg.rho, val);
    };
    rec.lambda_block.merit_before = merit(lambda);
    const BacktrackResult bt = backtrack(merit, lambda, dir_lambda,
                                         rec.lambda_block.merit_before, cfg.delta,
                                         cfg.max_halvings);
    next.loss_eval_count += 1 + bt.evaluations;
    t_lambda = bt.step;
    rec.lambda_block.evaluated = true;
    rec.lambda_block.stalled = bt.stalled;
    rec.lambda_block.step = bt.step;
    rec.lambda_block.merit_after = bt.value;
    if (bt.stalled) next.stalled_backtracks += 1;
  }
  if (t_lambda != 0.0) next.lambda = lambda - t_lambda * dir_lambda;

  // Step 4 and residuals.
  StepResult out = finish_step(std::move(next), lambda, cfg);
  out.v_block = rec.v_block;
  out.w_block = rec.w_block;
  out.lambda_block = rec.lambda_block;
  return out;
}

// Minimizes a smooth strongly convex objective from x by damped gradient
// descent. Each gradient evaluation is charged to grad_count.
template <class Objective, class Gradient>
Vector descend(Objective&& f, Gradient&& grad, Vector x, const MyhpoConfig& cfg,
               long& grad_count, long& loss_evals, const char* what) {
  double step = 1.0;
  for (long it = 0; it < cfg.inner_max_iters; ++it) {
    const Vector g = grad(x);
    grad_count += 1;
    if (g.norm() <= cfg.inner_tol) return x;
    const double f0 = f(x);
    loss_evals += 1;
    const BacktrackResult bt = backtrack(f, x, g, f0, step, 60);
    loss_evals += bt.evaluations;
    if (bt.stalled) {
      // Descent is no longer resolvable in double precision.
      return x;
    }
    x -= bt.step * g;
    step = 2.0 * bt.step;
  }
  throw Error(ErrorCode::kInnerSolveFailed,
              std::string(what) + ": gradient norm above inner_tol after inner_max_iters");
}

// Newton passes on a quadratic with fixed Hessian; converges in one pass up
// to rounding, later passes only polish.
template <class Gradient>
Vector newton_quadratic(Gradient&& grad, const Eigen::LDLT<Matrix>& hessian, Vector x,
                        const MyhpoConfig& cfg, long& grad_count) {
  constexpr int kMaxPasses = 3;
  for (int pass = 0; pass < kMaxPasses; ++pass) {
    const Vector g = grad(x);
    grad_count += 1;
    if (g.norm() <= cfg.inner_tol) break;
    x -= hessian.solve(g);
  }
  return x;
}

Matrix train_hessian(const Dataset& train, double lambda, double shift) {
  const double n = static_cast<double>(train.samples());
  Matrix h = train.X.transpose() * train.X / n;
  h.diagonal().array() += 2.0 * std::exp(lambda) + shift;
  return h;
}

// Safeguarded Newton on the monotone scalar derivative of the lambda-objective.
double solve_lambda(LossKind kind, double lambda0, const BestResponse& br, const Vector& w,
                    const Vector& u, const MyhpoConfig& cfg, const Dataset& val,
                    long& grad_count) {
  auto h = [&](double lam) {
    grad_count += 1;
    return lambda_merit_grad(kind, lam, br, w, u, cfg.rho, val);
  };
  auto h_prime = [&](double lam) {
    grad_count += 1;
    return curvature_data_fit(kind, best_response(br, lam), br.phi1, val) +
           cfg.rho * br.phi1.squaredNorm();
  };

  double lam = lambda0;
  double hv = h(lam);
  if (std::abs(hv) <= cfg.inner_tol) return lam;

  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  (hv > 0.0 ? hi : lo) = lam;
  constexpr int kNewtonIters = 100;
  for (int it = 0; it < kNewtonIters; ++it) {
    const double slope = h_prime(lam);
    double cand = (slope > 0.0 && std::isfinite(slope)) ? lam - hv / slope
                                                        : std::numeric_limits<double>::quiet_NaN();
    if (!(cand > lo && cand < hi)) {
      if (std::isfinite(lo) && std::isfinite(hi)) {
        cand = 0.5 * (lo + hi);
      } else {
        break;
      }
    }
    lam = cand;
    hv = h(lam);
    if (!std::isfinite(hv)) break;
    if (std::abs(hv) <= cfg.inner_tol) return lam;
    (hv > 0.0 ? hi : lo) = lam;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(lam))) {
      return lam;
    }
  }

  // Fallback: fixed-step gradient descent from the starting point.
  lam = lambda0;
  for (int it = 0; it < 50; ++it) lam -= cfg.delta * h(lam);
  return lam;
}

}  // namespace

StepResult my_step_simplified(const MyhpoState& state, LossKind kind, const Dataset& train,
                              const Dataset& val, const MyhpoConfig& cfg) {
  return simplified_step(state, kind, train, val, cfg, false);
}

StepResult my_step_backtracking(const MyhpoState& state, LossKind kind, const Dataset& train,
                                const Dataset& val, const MyhpoConfig& cfg) {
  return simplified_step(state, kind, train, val, cfg, true);
}

StepResult my_step_full(const MyhpoState& state, LossKind kind, const Dataset& train,
                        const Dataset& val, const MyhpoConfig& cfg) {
  MyhpoState next = state;
  const double lambda = state.lambda;

  // Step 1: v = argmin_v L_T(v, lambda), warm-started at the previous v.
  auto train_obj = [&](const Vector& x) { return train_loss(kind, x, lambda, train); };
  auto train_grad = [&](const Vector& x) { return grad_w_train(kind, x, lambda, train); };
  if (kind == LossKind::kLeastSquares) {
    const Eigen::LDLT<Matrix> hess(train_hessian(train, lambda, 0.0));
    next.v = newton_quadratic(train_grad, hess, state.v, cfg, next.grad_count);
  } else {
    next.v = descend(train_obj, train_grad, state.v, cfg, next.grad_count, next.loss_eval_count,
                     "v-subproblem");
  }
  next.br = split_best_response(next.v, lambda);
  const Vector consensus = best_response(next.br, lambda);

  // Step 2: w = argmin of the augmented training objective.
  auto w_obj = [&](const Vector& x) {
    return w_merit(kind, x, lambda, state.u, consensus, cfg.rho, train);
  };
  auto w_grad = [&](const Vector& x) {
    return Vector(grad_w_train(kind, x, lambda, train) + state.u + cfg.rho * (x - consensus));
  };
  if (kind == LossKind::kLeastSquares) {
    const Eigen::LDLT<Matrix> hess(train_hessian(train, lambda, cfg.rho));
    next.w = newton_quadratic(w_grad, hess, state.w, cfg, next.grad_count);
  } else {
    next.w = descend(w_obj, w_grad, state.w, cfg, next.grad_count, next.loss_eval_count,
                     "w-subproblem");
  }

  // Step 3: scalar lambda-subproblem.
  next.lambda = solve_lambda(kind, lambda, next.br, next.w, state.u, cfg, val, next.grad_count);

  return finish_step(std::move(next), lambda, cfg);
}

StepResult my_step(const MyhpoState& state, LossKind kind, const Dataset& train,
                   const Dataset& val, const MyhpoConfig& cfg) {
  switch (cfg.variant) {
    case MyhpoVariant::kSimplifiedConstant:
      return my_step_simplified(state, kind, train, val, cfg);
    case MyhpoVariant::kSimplifiedBacktracking:
      return my_step_backtracking(state, kind, train, val, cfg);
    case MyhpoVariant::kFull:
      return my_step_full(state, kind, train, val, cfg);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown MY-HPO variant");
}

RunTrace myhpo_run(const MyhpoState& init, const Problem& problem, const MyhpoConfig& cfg,
                   long budget) {
  cfg.validate();
  if (budget < 2) throw Error(ErrorCode::kInvalidArgument, "MY-HPO budget must be >= 2");

  RunTrace trace;
  trace.solver = std::string(to_string(cfg.variant));
  trace.prng = "none";
  trace.params = {
      {"loss", std::string(to_string(problem.loss))},
      {"variant", std::string(to_string(cfg.variant))},
      {"rho", format_double(cfg.rho)},
      {"alpha", format_double(cfg.alpha)},
      {"beta", format_double(cfg.beta)},
      {"delta", format_double(cfg.delta)},
      {"lambda0", format_double(init.lambda)},
      {"eps_tol", format_double(cfg.eps_tol)},
      {"max_iters", std::to_string(cfg.max_iters)},
      {"max_halvings", std::to_string(cfg.max_halvings)},
      {"inner_tol", format_double(cfg.inner_tol)},
      {"inner_max_iters", std::to_string(cfg.inner_max_iters)},
      {"fresh_w_gradient", cfg.fresh_w_gradient ? "true" : "false"},
      {"budget_n_g", std::to_string(budget)},
  };

  const long per_iter = cfg.variant == MyhpoVariant::kFull ? 0 : (cfg.fresh_w_gradient ? 3 : 2);
  MyhpoState state = init;
  trace.weights = state.w;
  trace.lambda = state.lambda;
  while (true) {
    if (state.iter >= cfg.max_iters) {
      trace.status = RunStatus::kMaxIters;
      break;
    }
    if (per_iter > 0 && state.grad_count + per_iter > budget) {
      trace.status = RunStatus::kBudget;
      break;
    }
    StepResult step;
    try {
      step = my_step(state, problem.loss, problem.train, problem.val, cfg);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kNonFiniteIterate) {
        trace.diverged = true;
        trace.status = RunStatus::kDiverged;
      } else if (e.code() == ErrorCode::kSplitDegenerate) {
        trace.status = RunStatus::kSplitDegenerate;
      } else if (e.code() == ErrorCode::kInnerSolveFailed) {
        trace.status = RunStatus::kInnerSolveFailed;
      } else {
        throw;
      }
      break;
    }
    if (step.state.grad_count > budget) {
      // Full variant: the step overran the ledger, so it is not taken.
      trace.status = RunStatus::kBudget;
      break;
    }
    state = std::move(step.state);
    const detail::Losses losses = detail::report_losses(problem, state.w);
    if (!losses.finite()) {
      trace.diverged = true;
      trace.status = RunStatus::kDiverged;
      break;
    }
    TraceRow row = detail::make_row(state.iter, state.grad_count, state.lambda, losses,
                                    state.loss_eval_count);
    row.r_norm = step.res.r_norm;
    row.s_norm = step.res.s_norm;
    row.u_norm = state.u.norm();
    trace.rows.push_back(row);
    trace.weights = state.w;
    trace.lambda = state.lambda;
    if (step.res.error() < cfg.eps_tol) {
      trace.status = RunStatus::kConverged;
      break;
    }
  }
  return trace;
}

StationarityReport check_stationarity(LossKind kind, const Vector& w, double lambda,
                                      const Vector& u, const BestResponse& br,
                                      const Dataset& train, const Dataset& val, double tol) {
  StationarityReport rep;
  const Vector g = best_response(br, lambda);
  rep.grad_w_plus_u = (grad_w_train(kind, w, lambda, train) + u).norm();
  rep.lambda_balance = std::abs(grad_lambda_val(kind, br, lambda, val) - u.dot(br.phi1));
  rep.consensus = (w - g).norm();
  // grad_phi L_T(Lambda phi) = Lambda^T grad_w = [lambda * g_T ; g_T].
  rep.grad_phi = std::sqrt(lambda * lambda + 1.0) * grad_w_train(kind, g, lambda, train).norm();
  rep.u_norm = u.norm();
  rep.ok = rep.grad_w_plus_u <= tol && rep.lambda_balance <= tol && rep.consensus <= tol &&
           rep.grad_phi <= tol && rep.u_norm <= tol;
  return rep;
}

}  // namespace myhpo
