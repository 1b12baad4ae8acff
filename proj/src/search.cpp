#include "myhpo/search.hpp"

#include <cmath>
#include <string>

#include "myhpo/error.hpp"
#include "myhpo/rng.hpp"
#include "run_support.hpp"

namespace myhpo {

void SearchConfig::validate() const {
  if (!(lo < hi) || n_s < 1 || n_t < 1 || !(alpha_train >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "search needs lo < hi, n_s >= 1, n_t >= 1 and alpha_train >= 0");
  }
}

TrainResult train_model(LossKind kind, double lambda, const Dataset& train, double alpha_train,
                        long n_t) {
  TrainResult out;
  out.w = Vector::Zero(train.dim());
  for (long t = 0; t < n_t; ++t) {
    out.w -= alpha_train * grad_w_train(kind, out.w, lambda, train);
    ++out.grad_count;
    if (!detail::all_finite(out.w)) {
      out.diverged = true;
      break;
    }
  }
  return out;
}

std::vector<double> grid_candidates(const SearchConfig& cfg) {
  cfg.validate();
  std::vector<double> out(static_cast<std::size_t>(cfg.n_s));
  if (cfg.n_s == 1) {
    out[0] = cfg.lo;
    return out;
  }
  const double span = cfg.hi - cfg.lo;
  const auto last = static_cast<double>(cfg.n_s - 1);
  for (long i = 0; i < cfg.n_s; ++i) {
    out[static_cast<std::size_t>(i)] = cfg.lo + span * (static_cast<double>(i) / last);
  }
  out.back() = cfg.hi;
  return out;
}

std::vector<double> random_candidates(const SearchConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  std::vector<double> out(static_cast<std::size_t>(cfg.n_s));
  for (double& x : out) x = rng.uniform(cfg.lo, cfg.hi);
  return out;
}

std::size_t select_winner(const std::vector<CandidateResult>& candidates) {
  if (candidates.empty()) throw Error(ErrorCode::kInvalidArgument, "no candidates");
  auto better = [](const CandidateResult& a, const CandidateResult& b) {
    const bool a_ok = !a.diverged && std::isfinite(a.val_loss);
    const bool b_ok = !b.diverged && std::isfinite(b.val_loss);
    if (a_ok != b_ok) return a_ok;
    if (a_ok && a.val_loss != b.val_loss) return a.val_loss < b.val_loss;
    return a.lambda < b.lambda;
  };
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (better(candidates[i], candidates[best])) best = i;
  }
  return best;
}

SearchResult search_evaluate(LossKind kind, const std::vector<double>& candidates,
                             const Dataset& train, const Dataset& val, const Dataset* test,
                             const SearchConfig& cfg) {
  cfg.validate();
  if (candidates.empty()) throw Error(ErrorCode::kInvalidArgument, "no candidates");
  SearchResult out;
  for (const double lambda : candidates) {
    const TrainResult tr = train_model(kind, lambda, train, cfg.alpha_train, cfg.n_t);
    out.grad_count += tr.grad_count;
    CandidateResult c;
    c.lambda = lambda;
    c.diverged = tr.diverged;
    if (!tr.diverged) {
      c.train_loss = data_fit(kind, tr.w, train);
      c.val_loss = data_fit(kind, tr.w, val);
      if (test) c.test_loss = data_fit(kind, tr.w, *test);
      if (!std::isfinite(c.train_loss) || !std::isfinite(c.val_loss)) c.diverged = true;
    }
    out.candidates.push_back(c);
  }
  out.winner = select_winner(out.candidates);
  return out;
}

RunTrace search_run(const std::vector<double>& candidates, const Problem& problem,
                    const SearchConfig& cfg, std::string_view solver_name) {
  cfg.validate();
  if (candidates.empty()) throw Error(ErrorCode::kInvalidArgument, "no candidates");
  RunTrace trace;
  trace.solver = std::string(solver_name);
  trace.seed = cfg.seed;
  trace.prng = solver_name == "random" ? std::string(Rng::kAlgorithm) : "none";
  trace.params = {
      {"loss", std::string(to_string(problem.loss))},
      {"lo", format_double(cfg.lo)},
      {"hi", format_double(cfg.hi)},
      {"n_s", std::to_string(cfg.n_s)},
      {"n_t", std::to_string(cfg.n_t)},
      {"alpha_train", format_double(cfg.alpha_train)},
  };

  std::vector<CandidateResult> seen;
  long n_grad = 0;
  Vector best_w = Vector::Zero(problem.dim());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double lambda = candidates[i];
    const TrainResult tr = train_model(problem.loss, lambda, problem.train, cfg.alpha_train,
                                       cfg.n_t);
    n_grad += tr.grad_count;
    CandidateResult c;
    c.lambda = lambda;
    c.diverged = tr.diverged;
    if (!tr.diverged) {
      const detail::Losses l = detail::report_losses(problem, tr.w);
      c.diverged = !l.finite();
      c.train_loss = l.train;
      c.val_loss = l.val;
      c.test_loss = l.test;
    }
    seen.push_back(c);
    const std::size_t w = select_winner(seen);
    if (w == i && !c.diverged) best_w = tr.w;
    const CandidateResult& win = seen[w];
    if (win.diverged) {
      // Nothing finite yet; the row still advances the ledger.
      trace.rows.push_back(detail::make_row(static_cast<long>(i) + 1, n_grad, lambda,
                                            {NAN, NAN, std::nullopt}, 0));
      continue;
    }
    trace.rows.push_back(detail::make_row(static_cast<long>(i) + 1, n_grad, win.lambda,
                                          {win.train_loss, win.val_loss, win.test_loss}, 0));
    trace.lambda = win.lambda;
  }
  trace.weights = best_w;
  trace.diverged = seen[select_winner(seen)].diverged;
  trace.status = trace.diverged ? RunStatus::kDiverged : RunStatus::kMaxIters;
  return trace;
}

}  // namespace myhpo
