#pragma once

#include <cmath>
#include <optional>

#include "myhpo/problem.hpp"
#include "myhpo/trace.hpp"

namespace myhpo::detail {

struct Losses {
  double train = 0.0;
  double val = 0.0;
  std::optional<double> test;

  bool finite() const {
    return std::isfinite(train) && std::isfinite(val) && (!test || std::isfinite(*test));
  }
};

// Unregularized losses of the current model on every split.
inline Losses report_losses(const Problem& problem, const Vector& w) {
  Losses out;
  out.train = data_fit(problem.loss, w, problem.train);
  out.val = data_fit(problem.loss, w, problem.val);
  if (problem.test) out.test = data_fit(problem.loss, w, *problem.test);
  return out;
}

inline bool all_finite(const Vector& v) { return v.allFinite(); }

inline TraceRow make_row(long iter, long n_grad, double lambda, const Losses& losses,
                         long loss_evals) {
  TraceRow row;
  row.iter = iter;
  row.n_grad = n_grad;
  row.lambda = lambda;
  row.train_loss = losses.train;
  row.val_loss = losses.val;
  row.test_loss = losses.test;
  row.loss_eval_count = loss_evals;
  return row;
}

}  // namespace myhpo::detail
