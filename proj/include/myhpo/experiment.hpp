#pragma once

#include <string>
#include <vector>

#include "myhpo/config.hpp"
#include "myhpo/problem.hpp"
#include "myhpo/trace.hpp"

namespace myhpo {

struct BuiltProblem {
  Problem problem;
  // Population variance of y per split, for regression reports.
  double var_train = 0.0;
  double var_val = 0.0;
  double var_test = 0.0;
  std::string source;
};

// Loads or synthesizes the data and splits it with `data_seed`.
BuiltProblem build_problem(const ProblemConfig& cfg, std::uint64_t data_seed);

// Runs one solver block on a built problem under `budget` gradients.
RunTrace run_solver(const SolverBlock& block, const Problem& problem, long budget,
                    std::uint64_t seed);

long block_budget(const ExperimentConfig& cfg, const SolverBlock& block);

std::string trace_file_name(const std::string& label, long rep);

struct ExperimentResult {
  // traces[rep][block]
  std::vector<std::vector<RunTrace>> traces;
};

// Runs every (repetition, block) pair on up to `jobs` threads. With
// write_files the traces land in cfg.output_dir, one file per pair.
ExperimentResult run_experiment(const ExperimentConfig& cfg, int jobs = 1,
                                bool write_files = true);

}  // namespace myhpo
