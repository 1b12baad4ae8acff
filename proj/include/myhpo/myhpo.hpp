#pragma once

#include <algorithm>
#include <limits>
#include <string_view>

#include "myhpo/problem.hpp"
#include "myhpo/trace.hpp"

namespace myhpo {

enum class MyhpoVariant { kSimplifiedConstant, kSimplifiedBacktracking, kFull };

std::string_view to_string(MyhpoVariant variant);

struct MyhpoConfig {
  double rho = 1.0;
  double alpha = 0.1;  // v step
  double beta = 0.1;   // w step
  double delta = 0.5;  // lambda step
  MyhpoVariant variant = MyhpoVariant::kSimplifiedBacktracking;
  long max_iters = std::numeric_limits<long>::max();
  double eps_tol = 1e-6;
  int max_halvings = 30;
  double inner_tol = 1e-10;
  long inner_max_iters = 10000;
  // Evaluate a fresh training gradient at w for the w-update instead of
  // reusing the v-update gradient (costs a third gradient per iteration).
  bool fresh_w_gradient = false;

  void validate() const;
};

// Iterate bundle. br is re-derived from v every iteration.
struct MyhpoState {
  Vector v;
  Vector w;
  Vector u;
  double lambda = -1.0;
  BestResponse br;
  long iter = 0;
  long grad_count = 0;
  long loss_eval_count = 0;
  long stalled_backtracks = 0;

  // lambda = lambda0, v = w = u = 0.
  static MyhpoState initial(Eigen::Index d, double lambda0 = -1.0);
};

struct Residuals {
  Vector r;  // primal: w - (lambda_new * phi1 + phi0)
  Vector s;  // dual:   rho * (lambda_new - lambda_old) * phi1
  double r_norm = 0.0;
  double s_norm = 0.0;

  double error() const { return std::max(r_norm, s_norm); }
};

Residuals residuals(const MyhpoState& state_new, double lambda_old, double rho);

// Merit before/after one block update, kept for descent audits.
struct BlockRecord {
  double merit_before = 0.0;
  double merit_after = 0.0;
  double step = 0.0;
  bool stalled = false;
  bool evaluated = false;
};

struct StepResult {
  MyhpoState state;
  Residuals res;
  BlockRecord v_block;
  BlockRecord w_block;
  BlockRecord lambda_block;
};

// The three block objectives at the current iterate.
double w_merit(LossKind kind, const Vector& w, double lambda, const Vector& u,
               const Vector& consensus, double rho, const Dataset& train);
double lambda_merit(LossKind kind, double lambda, const BestResponse& br, const Vector& w,
                    const Vector& u, double rho, const Dataset& val);
// d/dlambda of lambda_merit.
double lambda_merit_grad(LossKind kind, double lambda, const BestResponse& br, const Vector& w,
                         const Vector& u, double rho, const Dataset& val);

StepResult my_step_simplified(const MyhpoState& state, LossKind kind, const Dataset& train,
                              const Dataset& val, const MyhpoConfig& cfg);
StepResult my_step_backtracking(const MyhpoState& state, LossKind kind, const Dataset& train,
                                const Dataset& val, const MyhpoConfig& cfg);
StepResult my_step_full(const MyhpoState& state, LossKind kind, const Dataset& train,
                        const Dataset& val, const MyhpoConfig& cfg);
StepResult my_step(const MyhpoState& state, LossKind kind, const Dataset& train,
                   const Dataset& val, const MyhpoConfig& cfg);

// Runs the configured variant until the budget or max_iters is exhausted or
// max(r_norm, s_norm) < eps_tol. Every row carries both residual norms.
RunTrace myhpo_run(const MyhpoState& init, const Problem& problem, const MyhpoConfig& cfg,
                   long budget);

struct StationarityReport {
  double grad_w_plus_u = 0.0;    // ||grad_w L_T(w, lambda) + u||
  double lambda_balance = 0.0;   // |grad_lambda L_V - u^T phi1|
  double consensus = 0.0;        // ||w - G_phi(lambda)||
  double grad_phi = 0.0;         // ||grad_phi L_T(G_phi(lambda), lambda)||
  double u_norm = 0.0;
  bool ok = false;
};

StationarityReport check_stationarity(LossKind kind, const Vector& w, double lambda,
                                      const Vector& u, const BestResponse& br,
                                      const Dataset& train, const Dataset& val, double tol);

}  // namespace myhpo
