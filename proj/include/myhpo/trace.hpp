#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "myhpo/model.hpp"

namespace myhpo {

enum class RunStatus {
  kBudget,
  kMaxIters,
  kConverged,
  kDiverged,
  kSplitDegenerate,
  kInnerSolveFailed,
};

std::string_view to_string(RunStatus status);
RunStatus parse_run_status(std::string_view text);

// One row per outer iteration (or per evaluated candidate for searches).
struct TraceRow {
  long iter = 0;
  long n_grad = 0;
  double lambda = 0.0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  std::optional<double> test_loss;
  std::optional<double> r_norm;
  std::optional<double> s_norm;
  std::optional<double> u_norm;
  long loss_eval_count = 0;
};

struct RunTrace {
  std::string label;
  std::string solver;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string prng;
  bool diverged = false;
  RunStatus status = RunStatus::kBudget;
  // Every parameter that influenced the run, echoed into the file header.
  std::vector<std::pair<std::string, std::string>> params;
  std::vector<TraceRow> rows;

  // Final model, not serialized.
  Vector weights;
  double lambda = 0.0;

  const TraceRow* last() const { return rows.empty() ? nullptr : &rows.back(); }
  std::optional<std::string> param(std::string_view key) const;
};

inline constexpr std::string_view kTraceColumns =
    "iter,n_grad,lambda,train_loss,val_loss,test_loss,r_norm,s_norm,u_norm,loss_eval_count";

// Metadata as '#'-prefixed 'key=value' lines, then the column header, then rows.
void write_trace(std::ostream& out, const RunTrace& trace);
void write_trace_file(const std::string& path, const RunTrace& trace);
RunTrace read_trace(std::istream& in);
RunTrace read_trace_file(const std::string& path);

// Shortest decimal text that round-trips the double.
std::string format_double(double value);

}  // namespace myhpo
