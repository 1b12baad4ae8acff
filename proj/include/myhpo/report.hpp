#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "myhpo/trace.hpp"

namespace myhpo {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample (n - 1) form, 0 for a single run
};

MeanStd mean_std(const std::vector<double>& xs);

struct SummaryRow {
  std::string label;
  std::string solver;
  long runs = 0;
  long diverged = 0;
  double mean_iters = 0.0;
  double mean_n_grad = 0.0;
  bool normalized = false;  // regression losses divided by var(y) of the split
  MeanStd train;
  MeanStd val;
  std::optional<MeanStd> test;
};

struct SummaryTable {
  std::vector<SummaryRow> rows;
};

// Final-row losses of each trace, grouped by label. Groups follow the
// "block" header param when present, otherwise first appearance.
SummaryTable summarize(const std::vector<RunTrace>& traces);

// "5.43 ± 0.25": values scaled by 100, two decimals.
std::string format_cell(const MeanStd& m);

void emit_summary_csv(std::ostream& out, const SummaryTable& table);
void emit_summary_text(std::ostream& out, const SummaryTable& table);

enum class CurveAxis { kIter, kNGrad };

// Long format: solver,seed,x,train_loss,val_loss,diverged. The last row of a
// diverged run carries diverged=true.
void emit_curves(std::ostream& out, const std::vector<RunTrace>& traces, CurveAxis axis);

// Every *.csv trace in `dir`, sorted by file name.
std::vector<RunTrace> read_trace_dir(const std::string& dir);

}  // namespace myhpo
