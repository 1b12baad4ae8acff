#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "myhpo/datasets.hpp"
#include "myhpo/model.hpp"

namespace myhpo {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

enum class ProblemKind { kSynthetic, kIdx, kCsv };

struct ProblemConfig {
  ProblemKind kind = ProblemKind::kSynthetic;
  LossKind loss = LossKind::kLeastSquares;
  SyntheticSpec synthetic;
  std::string idx_images;
  std::string idx_labels;
  std::string csv_path;
  std::string csv_target = "y";
  std::optional<double> class_a;
  std::optional<double> class_b;
  SplitSpec split;
  bool append_ones = false;
  // When set, data generation and splitting use this seed for every
  // repetition instead of the per-run seed.
  std::optional<std::uint64_t> data_seed;
};

// One solver entry. Only the fields relevant to `name` are echoed.
struct SolverBlock {
  std::string name;
  std::string label;
  std::optional<long> budget_n_g;  // overrides the experiment budget
  double alpha = 0.0;
  double beta = 0.0;
  double sigma = 1e-4;
  double rho = 1.0;
  double delta = 0.5;
  double lambda0 = -1.0;
  double eps_tol = 1e-6;
  int max_halvings = 30;
  double inner_tol = 1e-10;
  long inner_max_iters = 10000;
  bool fresh_w_gradient = false;
  std::optional<long> max_iters;
  double lo = -10.0;
  double hi = 5.0;
  long n_s = 2;
  std::optional<long> n_t;  // default budget / n_s
  double alpha_train = 0.1;

  bool is_myhpo() const { return name.rfind("myhpo_", 0) == 0; }
  bool is_search() const { return name == "random" || name == "grid"; }
  // Resolved parameters, with defaults filled in, as "key=value" pairs.
  KeyValues echo() const;
};

struct ExperimentConfig {
  ProblemConfig problem;
  long budget_n_g = 0;
  long repetitions = 1;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  std::vector<SolverBlock> solvers;

  KeyValues problem_echo() const;
  // Canonical sorted key=value text of every resolved setting except output_dir.
  std::string canonical() const;
  // FNV-1a 64 of canonical(), as 16 hex digits.
  std::string hash() const;
};

inline constexpr const char* kSolverNames[] = {"sho",   "myhpo_c", "myhpo_bt", "myhpo_full",
                                               "random", "grid"};

// Flat "key = value" lines; '#' starts a comment. Relative data paths are
// resolved against base_dir. Throws SchemaError or UnknownSolver.
ExperimentConfig parse_config_text(const std::string& text, const std::string& base_dir = "");
ExperimentConfig parse_config(const std::string& path);

}  // namespace myhpo
