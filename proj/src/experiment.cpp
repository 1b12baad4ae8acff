#include "myhpo/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <mutex>
#include <thread>

#include "myhpo/datasets.hpp"
#include "myhpo/error.hpp"
#include "myhpo/myhpo.hpp"
#include "myhpo/search.hpp"
#include "myhpo/sho.hpp"

namespace myhpo {

BuiltProblem build_problem(const ProblemConfig& cfg, std::uint64_t data_seed) {
  RawTable table;
  switch (cfg.kind) {
    case ProblemKind::kSynthetic: {
      SyntheticSpec spec = cfg.synthetic;
      spec.seed = data_seed;
      table = synthesize(spec);
      break;
    }
    case ProblemKind::kIdx:
      table = load_idx(cfg.idx_images, cfg.idx_labels);
      break;
    case ProblemKind::kCsv:
      table = load_csv(cfg.csv_path, cfg.csv_target);
      break;
  }
  if (cfg.class_a) table = make_classification(table, *cfg.class_a, *cfg.class_b);
  if (cfg.append_ones) table = append_ones(table);
  SplitSpec spec = cfg.split;
  spec.seed = data_seed;
  Splits s = split(table, spec);
  BuiltProblem out{Problem(cfg.loss, std::move(s.train), std::move(s.val), std::move(s.test)),
                   0.0, 0.0, 0.0, table.source};
  out.var_train = population_variance(out.problem.train.y);
  out.var_val = population_variance(out.problem.val.y);
  out.var_test = population_variance(out.problem.test->y);
  return out;
}

long block_budget(const ExperimentConfig& cfg, const SolverBlock& block) {
  return block.budget_n_g.value_or(cfg.budget_n_g);
}

RunTrace run_solver(const SolverBlock& block, const Problem& problem, long budget,
                    std::uint64_t seed) {
  const Eigen::Index d = problem.dim();
  RunTrace trace;
  if (block.name == "sho") {
    ShoConfig c;
    c.alpha = block.alpha;
    c.beta = block.beta;
    c.sigma = block.sigma;
    c.seed = seed;
    if (block.max_iters) c.max_iters = *block.max_iters;
    trace = sho_run(ShoState::initial(d, block.lambda0), problem, c, budget);
  } else if (block.is_myhpo()) {
    MyhpoConfig c;
    c.rho = block.rho;
    c.alpha = block.alpha;
    c.beta = block.beta;
    c.delta = block.delta;
    c.eps_tol = block.eps_tol;
    c.max_halvings = block.max_halvings;
    c.inner_tol = block.inner_tol;
    c.inner_max_iters = block.inner_max_iters;
    c.fresh_w_gradient = block.fresh_w_gradient;
    if (block.max_iters) c.max_iters = *block.max_iters;
    c.variant = block.name == "myhpo_c"    ? MyhpoVariant::kSimplifiedConstant
                : block.name == "myhpo_bt" ? MyhpoVariant::kSimplifiedBacktracking
                                           : MyhpoVariant::kFull;
    trace = myhpo_run(MyhpoState::initial(d, block.lambda0), problem, c, budget);
    trace.seed = seed;
  } else {
    SearchConfig c;
    c.lo = block.lo;
    c.hi = block.hi;
    c.n_s = block.n_s;
    c.n_t = block.n_t.value_or(budget / block.n_s);
    c.alpha_train = block.alpha_train;
    c.seed = seed;
    if (c.n_t < 1 || c.n_t * c.n_s > budget) {
      throw Error(ErrorCode::kSchemaError, "'" + block.label + "': n_s * n_t exceeds budget " +
                                               std::to_string(budget));
    }
    const auto candidates = block.name == "grid" ? grid_candidates(c) : random_candidates(c);
    trace = search_run(candidates, problem, c, block.name);
  }
  trace.label = block.label;
  return trace;
}

std::string trace_file_name(const std::string& label, long rep) {
  return label + "__rep" + std::to_string(rep) + ".csv";
}

namespace {

// Header echo: block identity, problem, solver settings, then whatever the
// solver itself recorded that is not already present.
void decorate(RunTrace& trace, const ExperimentConfig& cfg, const BuiltProblem& built,
              std::size_t block, long rep, std::uint64_t data_seed) {
  KeyValues params = {
      {"block", std::to_string(block)},
      {"rep", std::to_string(rep)},
      {"data_seed", std::to_string(data_seed)},
      {"experiment.budget_n_g", std::to_string(cfg.budget_n_g)},
      {"experiment.repetitions", std::to_string(cfg.repetitions)},
      {"experiment.seed", std::to_string(cfg.seed)},
  };
  for (const auto& kv : cfg.problem_echo()) params.push_back(kv);
  params.emplace_back("problem.source", built.source);
  params.emplace_back("n_train", std::to_string(built.problem.train.samples()));
  params.emplace_back("n_val", std::to_string(built.problem.val.samples()));
  params.emplace_back("n_test", std::to_string(built.problem.test->samples()));
  params.emplace_back("var_y.train", format_double(built.var_train));
  params.emplace_back("var_y.val", format_double(built.var_val));
  params.emplace_back("var_y.test", format_double(built.var_test));
  for (const auto& [k, v] : cfg.solvers[block].echo()) params.emplace_back("solver." + k, v);
  for (const auto& kv : trace.params) {
    const bool seen = std::any_of(params.begin(), params.end(),
                                  [&](const auto& p) { return p.first == kv.first; });
    if (!seen) params.push_back(kv);
  }
  trace.params = std::move(params);
  trace.config_hash = cfg.hash();
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, int jobs, bool write_files) {
  const long reps = cfg.repetitions;
  const std::size_t blocks = cfg.solvers.size();
  if (write_files) {
    std::error_code ec;
    std::filesystem::create_directories(cfg.output_dir, ec);
    if (ec) throw Error(ErrorCode::kIoError, "cannot create '" + cfg.output_dir + "'");
  }

  auto data_seed_of = [&](long rep) {
    return cfg.problem.data_seed.value_or(cfg.seed + static_cast<std::uint64_t>(rep));
  };

  // Data is built once per repetition, then shared read-only by the blocks.
  std::vector<std::optional<BuiltProblem>> problems(static_cast<std::size_t>(reps));
  ExperimentResult result;
  result.traces.assign(static_cast<std::size_t>(reps), std::vector<RunTrace>(blocks));

  const std::size_t tasks = static_cast<std::size_t>(reps) * (blocks + 1);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&](bool building) {
    while (true) {
      const std::size_t t = next.fetch_add(1);
      const std::size_t total = building ? static_cast<std::size_t>(reps)
                                         : static_cast<std::size_t>(reps) * blocks;
      if (t >= total) return;
      try {
        if (building) {
          problems[t].emplace(build_problem(cfg.problem, data_seed_of(static_cast<long>(t))));
          continue;
        }
        const auto rep = static_cast<long>(t / blocks);
        const std::size_t b = t % blocks;
        const SolverBlock& block = cfg.solvers[b];
        const BuiltProblem& built = *problems[static_cast<std::size_t>(rep)];
        const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(rep);
        RunTrace trace = run_solver(block, built.problem, block_budget(cfg, block), seed);
        decorate(trace, cfg, built, b, rep, data_seed_of(rep));
        if (write_files) {
          write_trace_file(
              (std::filesystem::path(cfg.output_dir) / trace_file_name(block.label, rep))
                  .string(),
              trace);
        }
        result.traces[static_cast<std::size_t>(rep)][b] = std::move(trace);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(tasks);
        return;
      }
    }
  };

  auto run_phase = [&](bool building) {
    next.store(0);
    const int n = std::max(1, jobs);
    std::vector<std::thread> pool;
    for (int i = 1; i < n; ++i) pool.emplace_back(worker, building);
    worker(building);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  };
  run_phase(true);
  run_phase(false);
  return result;
}

}  // namespace myhpo
