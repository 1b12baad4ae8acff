#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "../support/oracles.hpp"
#include "myhpo/datasets.hpp"
#include "myhpo/error.hpp"
#include "myhpo/line_search.hpp"
#include "myhpo/myhpo.hpp"

using namespace myhpo;

namespace {

oracle::Vec to_vec(const Vector& v) { return {v.data(), v.data() + v.size()}; }

oracle::Mat to_mat(const Matrix& m) {
  oracle::Mat out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i].push_back(m(i, j));
  return out;
}

Problem toy_problem() {
  Matrix xt(5, 2), xv(4, 2);
  xt << 1, 0.2, 0.1, 1, 0.5, 0.5, -0.3, 0.8, 0.7, -0.1;
  xv << 0.9, 0.1, 0.2, 1.1, 0.4, 0.3, -0.2, 0.6;
  Vector yt(5), yv(4);
  yt << 1, -0.5, 0.3, 0.2, 0.9;
  yv << 0.8, -0.4, 0.2, 0.1;
  return Problem(LossKind::kLeastSquares, Dataset(xt, yt, Role::kTrain),
                 Dataset(xv, yv, Role::kValidation));
}

Problem synthetic_problem(std::uint64_t seed) {
  SyntheticSpec spec;
  spec.scale = 50.0;
  spec.seed = seed;
  SplitSpec s;
  s.use_counts = true;
  s.train_count = 30;
  s.val_count = 15;
  s.test_count = 15;
  s.seed = seed;
  Splits sp = split(synthesize(spec), s);
  return Problem(LossKind::kLeastSquares, sp.train, sp.val, sp.test);
}

// The four updates of one constant-step iteration, written out with the
// least-squares formulas on plain vectors.
struct OracleState {
  oracle::Vec v, w, u;
  double lambda;
};

oracle::Vec ls_grad(const oracle::Mat& x, const oracle::Vec& y, const oracle::Vec& w) {
  oracle::Vec g(w.size(), 0.0);
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = oracle::dot(w, x[i]) - y[i];
    for (std::size_t j = 0; j < w.size(); ++j) g[j] += r * x[i][j] / n;
  }
  return g;
}

OracleState oracle_step(const OracleState& s, const oracle::Mat& xt, const oracle::Vec& yt,
                        const oracle::Mat& xv, const oracle::Vec& yv, double rho, double alpha,
                        double beta, double delta) {
  const std::size_t d = s.v.size();
  oracle::Vec g = ls_grad(xt, yt, s.v);
  for (std::size_t j = 0; j < d; ++j) g[j] += 2.0 * std::exp(s.lambda) * s.v[j];
  OracleState n = s;
  for (std::size_t j = 0; j < d; ++j) n.v[j] = s.v[j] - alpha * g[j];
  double mean = 0.0;
  for (double x : n.v) mean += x;
  mean /= static_cast<double>(d);
  oracle::Vec phi1(d), phi0(d, mean);
  for (std::size_t j = 0; j < d; ++j) phi1[j] = (n.v[j] - mean) / s.lambda;
  oracle::Vec cons(d);
  for (std::size_t j = 0; j < d; ++j) cons[j] = s.lambda * phi1[j] + phi0[j];
  for (std::size_t j = 0; j < d; ++j)
    n.w[j] = s.w[j] - beta * (g[j] + s.u[j] + rho * (s.w[j] - cons[j]));
  const oracle::Vec gv = ls_grad(xv, yv, cons);
  double dl = oracle::dot(phi1, gv) - oracle::dot(s.u, phi1);
  for (std::size_t j = 0; j < d; ++j) dl -= rho * phi1[j] * (n.w[j] - cons[j]);
  n.lambda = s.lambda - delta * dl;
  for (std::size_t j = 0; j < d; ++j)
    n.u[j] = s.u[j] + rho * (n.w[j] - (n.lambda * phi1[j] + phi0[j]));
  return n;
}

}  // namespace

TEST_CASE("residual examples") {
  MyhpoState s = MyhpoState::initial(2, 2.0);
  s.br.phi1 << 1, 0;
  s.br.phi0 << 0.5, -0.5;
  s.w = best_response(s.br, 2.0);
  Residuals r = residuals(s, 2.0, 1.0);
  CHECK(r.r_norm == 0.0);
  CHECK(r.s_norm == 0.0);
  r = residuals(s, 1.0, 1.0);
  CHECK(r.r_norm == 0.0);
  CHECK(r.s(0) == 1.0);
  CHECK(r.s(1) == 0.0);
  r = residuals(s, -5.0, 0.0);
  CHECK(r.s_norm == 0.0);
}

TEST_CASE("1-D step matches the scripted formulas") {
  const Dataset tr(Matrix::Constant(1, 1, 1.0), Vector::Constant(1, 1.0), Role::kTrain);
  const Dataset va(Matrix::Constant(1, 1, 1.0), Vector::Constant(1, 1.0), Role::kValidation);
  MyhpoConfig cfg;
  cfg.variant = MyhpoVariant::kSimplifiedConstant;
  const StepResult r = my_step(MyhpoState::initial(1), LossKind::kLeastSquares, tr, va, cfg);
  // g = -1; v = 0.1; phi = (0, 0.1); w = 0 - 0.1 * (-1 - 0.1) = 0.11; u = 0.01.
  CHECK(r.state.v(0) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(r.state.br.phi1(0) == 0.0);
  CHECK(r.state.br.phi0(0) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(r.state.w(0) == doctest::Approx(0.11).epsilon(1e-15));
  CHECK(r.state.lambda == -1.0);
  CHECK(r.state.u(0) == doctest::Approx(0.01).epsilon(1e-13));
  CHECK(r.res.r_norm == doctest::Approx(0.01).epsilon(1e-13));
  CHECK(r.res.s_norm == 0.0);
  CHECK(r.state.grad_count == 2);
}

TEST_CASE("multi-step trace matches the scripted formulas") {
  const Problem p = toy_problem();
  const oracle::Mat xt = to_mat(p.train.X), xv = to_mat(p.val.X);
  const oracle::Vec yt = to_vec(p.train.y), yv = to_vec(p.val.y);
  MyhpoConfig cfg;
  cfg.variant = MyhpoVariant::kSimplifiedConstant;
  cfg.delta = 0.3;
  MyhpoState s = MyhpoState::initial(2);
  OracleState o{{0, 0}, {0, 0}, {0, 0}, -1.0};
  for (int k = 0; k < 25; ++k) {
    s = my_step(s, p.loss, p.train, p.val, cfg).state;
    o = oracle_step(o, xt, yt, xv, yv, cfg.rho, cfg.alpha, cfg.beta, cfg.delta);
    CHECK(oracle::rel_err(to_vec(s.v), o.v) <= 1e-12);
    CHECK(oracle::rel_err(to_vec(s.w), o.w) <= 1e-12);
    CHECK(oracle::rel_err(to_vec(s.u), o.u) <= 1e-11);
    CHECK(oracle::rel_err(s.lambda, o.lambda) <= 1e-12);
  }
}

TEST_CASE("a stationary point is a fixed point of every variant") {
  // 1-D: phi1 is identically zero, so the lambda direction vanishes and the
  // ridge minimizer with u = 0 and w = v is stationary.
  const Dataset tr(Matrix::Constant(3, 1, 1.0), Vector::Constant(3, 2.0), Role::kTrain);
  const Dataset va(Matrix::Constant(2, 1, 1.0), Vector::Constant(2, 1.0), Role::kValidation);
  const double lambda = std::log(0.5);
  MyhpoState s = MyhpoState::initial(1, lambda);
  s.v(0) = 1.0;  // (1 + 2 * 0.5) v = 2
  s.w = s.v;
  s.br = split_best_response(s.v, lambda);
  for (MyhpoVariant var : {MyhpoVariant::kSimplifiedConstant,
                           MyhpoVariant::kSimplifiedBacktracking, MyhpoVariant::kFull}) {
    MyhpoConfig cfg;
    cfg.variant = var;
    const StepResult r = my_step(s, LossKind::kLeastSquares, tr, va, cfg);
    CHECK(r.state.v == s.v);
    CHECK(r.state.w == s.w);
    CHECK(r.state.u == s.u);
    CHECK(r.state.lambda == s.lambda);
    CHECK(r.res.r_norm == 0.0);
    CHECK(r.res.s_norm == 0.0);
  }
}

TEST_CASE("rho zero with u zero updates v and w identically") {
  const Problem p = toy_problem();
  MyhpoConfig cfg;
  cfg.variant = MyhpoVariant::kSimplifiedConstant;
  cfg.rho = 0.0;
  cfg.alpha = cfg.beta = 0.2;
  MyhpoState s = MyhpoState::initial(2);
  for (int k = 0; k < 20; ++k) {
    s = my_step(s, p.loss, p.train, p.val, cfg).state;
    CHECK(s.v == s.w);
    CHECK(s.u.isZero(0.0));
  }
}

TEST_CASE("halving rule on f(x) = x^2") {
  auto f = [](double x) { return x * x; };
  const BacktrackResult r = backtrack(f, 1.0, 2.0, 1.0, 1.0, 30);
  CHECK(r.step == 0.5);
  CHECK(r.value == 0.0);
  CHECK(r.halvings == 1);
  CHECK_FALSE(r.stalled);
  const BacktrackResult stall = backtrack(f, 0.0, 1.0, 0.0, 1.0, 5);
  CHECK(stall.stalled);
  CHECK(stall.step == 0.0);
  CHECK(stall.evaluations == 6);
}

TEST_CASE("backtracking equals the constant step when no halving happens") {
  const Problem p = toy_problem();
  MyhpoConfig c, bt;
  c.variant = MyhpoVariant::kSimplifiedConstant;
  bt.variant = MyhpoVariant::kSimplifiedBacktracking;
  c.alpha = bt.alpha = c.beta = bt.beta = c.delta = bt.delta = 0.05;
  MyhpoState a = MyhpoState::initial(2), b = a;
  for (int k = 0; k < 10; ++k) {
    const StepResult rb = my_step(b, p.loss, p.train, p.val, bt);
    a = my_step(a, p.loss, p.train, p.val, c).state;
    b = rb.state;
    REQUIRE(rb.v_block.step == 0.05);
    REQUIRE(rb.w_block.step == 0.05);
    if (rb.lambda_block.evaluated) REQUIRE(rb.lambda_block.step == 0.05);
    CHECK(a.v == b.v);
    CHECK(a.w == b.w);
    CHECK(a.lambda == b.lambda);
    CHECK(a.u == b.u);
  }
  CHECK(b.loss_eval_count > 0);
  CHECK(a.loss_eval_count == 0);
}

TEST_CASE("accepted backtracking steps decrease their merit on the ill-conditioned instance") {
  const Problem p = synthetic_problem(1);
  MyhpoConfig cfg;
  cfg.variant = MyhpoVariant::kSimplifiedBacktracking;
  MyhpoState s = MyhpoState::initial(p.dim());
  long checked = 0;
  for (int k = 0; k < 300; ++k) {
    const StepResult r = my_step(s, p.loss, p.train, p.val, cfg);
    for (const BlockRecord* b : {&r.v_block, &r.w_block, &r.lambda_block}) {
      if (!b->evaluated || b->stalled) continue;
      CHECK(b->merit_after < b->merit_before);
      ++checked;
    }
    CHECK(r.state.grad_count == 2 * r.state.iter);
    s = r.state;
  }
  CHECK(checked > 0);
}

TEST_CASE("full variant steps solve their subproblems") {
  const Problem p = synthetic_problem(2);
  const oracle::Mat x = to_mat(p.train.X);
  const oracle::Vec y = to_vec(p.train.y);
  MyhpoConfig cfg;
  cfg.variant = MyhpoVariant::kFull;
  MyhpoState s = MyhpoState::initial(p.dim());
  s.u = Vector::Constant(p.dim(), 0.01);
  const StepResult r = my_step(s, p.loss, p.train, p.val, cfg);
  const oracle::Vec zero(p.dim(), 0.0);
  const oracle::Vec v = oracle::ridge(x, y, std::exp(s.lambda), zero, 0.0, zero);
  CHECK(oracle::rel_err(to_vec(r.state.v), v) <= 1e-8);
  const oracle::Vec w = oracle::ridge(x, y, std::exp(s.lambda), to_vec(s.u), cfg.rho,
                                      to_vec(best_response(r.state.br, s.lambda)));
  CHECK(oracle::rel_err(to_vec(r.state.w), w) <= 1e-8);

  cfg.rho = 0.0;
  const StepResult r0 = my_step(MyhpoState::initial(p.dim()), p.loss, p.train, p.val, cfg);
  CHECK((r0.state.w - r0.state.v).norm() <= 1e-8 * r0.state.v.norm());
}

TEST_CASE("run stopping rules") {
  const Problem p = toy_problem();
  MyhpoConfig cfg;
  cfg.eps_tol = 1e300;
  RunTrace t = myhpo_run(MyhpoState::initial(2), p, cfg, 2000);
  CHECK(t.rows.size() == 1);
  CHECK(t.status == RunStatus::kConverged);

  cfg.eps_tol = 1e-300;
  cfg.variant = MyhpoVariant::kSimplifiedConstant;
  t = myhpo_run(MyhpoState::initial(2), p, cfg, 2000);
  CHECK(t.rows.size() == 1000);
  CHECK(t.last()->n_grad == 2000);
  for (const TraceRow& r : t.rows) {
    CHECK(r.n_grad == 2 * r.iter);
    CHECK(r.r_norm.has_value());
    CHECK(r.s_norm.has_value());
  }

  cfg.fresh_w_gradient = true;
  t = myhpo_run(MyhpoState::initial(2), p, cfg, 2000);
  CHECK(t.last()->n_grad == 1998);
  CHECK_THROWS_AS(myhpo_run(MyhpoState::initial(2), p, cfg, 1), Error);
}

TEST_CASE("converged run stays converged") {
  const Problem p = toy_problem();
  MyhpoConfig cfg;
  cfg.variant = MyhpoVariant::kFull;
  cfg.eps_tol = 1e-8;
  const RunTrace t = myhpo_run(MyhpoState::initial(2), p, cfg, 1000000);
  REQUIRE(t.status == RunStatus::kConverged);
  // The run stops at the first hit; ten further steps from there stay below.
  MyhpoState s = MyhpoState::initial(2);
  for (std::size_t k = 0; k < t.rows.size(); ++k) s = my_step(s, p.loss, p.train, p.val, cfg).state;
  for (int k = 0; k < 10; ++k) {
    const StepResult r = my_step(s, p.loss, p.train, p.val, cfg);
    CHECK(r.res.error() < cfg.eps_tol);
    s = r.state;
  }
}

TEST_CASE("stationarity report") {
  const Problem p = synthetic_problem(3);
  const oracle::Vec zero(p.dim(), 0.0);
  const double lambda = -2.0;
  const oracle::Vec w =
      oracle::ridge(to_mat(p.train.X), to_vec(p.train.y), std::exp(lambda), zero, 0.0, zero);
  const Vector wv = Eigen::Map<const Vector>(w.data(), p.dim());
  const BestResponse br = split_best_response(wv, lambda);
  const Vector u0 = Vector::Zero(p.dim());
  StationarityReport rep = check_stationarity(p.loss, wv, lambda, u0, br, p.train, p.val, 1e-4);
  CHECK(rep.grad_w_plus_u <= 1e-8);
  CHECK(rep.grad_phi <= 1e-8);
  CHECK(rep.consensus <= 1e-12);

  const Vector w2 = Vector::Constant(p.dim(), 0.3);
  const Vector u = -grad_w_train(p.loss, w2, lambda, p.train);
  rep = check_stationarity(p.loss, w2, lambda, u, br, p.train, p.val, 1e-4);
  CHECK(rep.grad_w_plus_u == 0.0);
  CHECK_FALSE(rep.ok);
}

TEST_CASE("config validation") {
  MyhpoConfig cfg;
  cfg.rho = -1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = MyhpoConfig{};
  cfg.delta = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = MyhpoConfig{};
  cfg.eps_tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}
