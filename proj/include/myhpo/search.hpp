#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "myhpo/problem.hpp"
#include "myhpo/trace.hpp"

namespace myhpo {

struct SearchConfig {
  double lo = -10.0;
  double hi = 5.0;
  long n_s = 2;
  long n_t = 1;
  double alpha_train = 0.1;
  std::uint64_t seed = 0;  // random search only

  void validate() const;
};

struct TrainResult {
  Vector w;
  long grad_count = 0;
  bool diverged = false;
};

// n_t plain gradient steps on L_T(., lambda) from w = 0.
TrainResult train_model(LossKind kind, double lambda, const Dataset& train, double alpha_train,
                        long n_t);

std::vector<double> grid_candidates(const SearchConfig& cfg);
std::vector<double> random_candidates(const SearchConfig& cfg);

struct CandidateResult {
  double lambda = 0.0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  std::optional<double> test_loss;
  bool diverged = false;
};

struct SearchResult {
  std::vector<CandidateResult> candidates;  // in candidate order
  std::size_t winner = 0;
  long grad_count = 0;
};

// Index of the lowest validation loss; ties go to the smaller lambda and
// diverged candidates rank last.
std::size_t select_winner(const std::vector<CandidateResult>& candidates);

SearchResult search_evaluate(LossKind kind, const std::vector<double>& candidates,
                             const Dataset& train, const Dataset& val, const Dataset* test,
                             const SearchConfig& cfg);

// One trace row per candidate holding the best-so-far winner's losses.
RunTrace search_run(const std::vector<double>& candidates, const Problem& problem,
                    const SearchConfig& cfg, std::string_view solver_name);

}  // namespace myhpo
