#include "myhpo/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "myhpo/error.hpp"

namespace myhpo {

namespace {

double param_or(const RunTrace& t, std::string_view key, double fallback) {
  const auto v = t.param(key);
  return v ? std::stod(*v) : fallback;
}

std::string fixed2(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", x);
  return buf;
}

}  // namespace

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd out;
  if (xs.empty()) return out;
  double sum = 0.0;
  for (const double x : xs) sum += x;
  out.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (const double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return out;
}

SummaryTable summarize(const std::vector<RunTrace>& traces) {
  struct Group {
    long order = 0;
    std::vector<const RunTrace*> members;
  };
  std::map<std::string, Group> groups;
  long appearance = 0;
  for (const RunTrace& t : traces) {
    auto [it, fresh] = groups.try_emplace(t.label);
    if (fresh) {
      const auto block = t.param("block");
      it->second.order = block ? std::stol(*block) : 1000000 + appearance;
      ++appearance;
    }
    it->second.members.push_back(&t);
  }
  std::vector<std::pair<std::string, const Group*>> ordered;
  for (const auto& [label, g] : groups) ordered.emplace_back(label, &g);
  std::stable_sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
    return a.second->order < b.second->order;
  });

  SummaryTable table;
  for (const auto& [label, g] : ordered) {
    SummaryRow row;
    row.label = label;
    row.solver = g->members.front()->solver;
    std::vector<double> tr, va, te, iters, grads;
    bool have_test = true;
    for (const RunTrace* t : g->members) {
      ++row.runs;
      if (t->diverged) ++row.diverged;
      const TraceRow* last = t->last();
      if (!last) {
        have_test = false;
        tr.push_back(NAN);
        va.push_back(NAN);
        iters.push_back(0);
        grads.push_back(0);
        continue;
      }
      const bool regression = t->param("loss") == std::optional<std::string>("least_squares") ||
                              t->param("problem.loss") ==
                                  std::optional<std::string>("least_squares");
      const bool normalize = regression && t->param("var_y.train").has_value();
      row.normalized = normalize;
      const double vt = normalize ? param_or(*t, "var_y.train", 1.0) : 1.0;
      const double vv = normalize ? param_or(*t, "var_y.val", 1.0) : 1.0;
      const double ve = normalize ? param_or(*t, "var_y.test", 1.0) : 1.0;
      tr.push_back(last->train_loss / vt);
      va.push_back(last->val_loss / vv);
      if (last->test_loss) te.push_back(*last->test_loss / ve);
      else have_test = false;
      iters.push_back(static_cast<double>(last->iter));
      grads.push_back(static_cast<double>(last->n_grad));
    }
    row.train = mean_std(tr);
    row.val = mean_std(va);
    if (have_test) row.test = mean_std(te);
    row.mean_iters = mean_std(iters).mean;
    row.mean_n_grad = mean_std(grads).mean;
    table.rows.push_back(row);
  }
  return table;
}

std::string format_cell(const MeanStd& m) {
  return fixed2(m.mean * 100.0) + " ± " + fixed2(m.std * 100.0);
}

void emit_summary_csv(std::ostream& out, const SummaryTable& table) {
  out << "label,solver,runs,diverged,mean_iters,mean_n_grad,normalized,"
         "train_mean,train_std,val_mean,val_std,test_mean,test_std\n";
  for (const SummaryRow& r : table.rows) {
    out << r.label << ',' << r.solver << ',' << r.runs << ',' << r.diverged << ','
        << format_double(r.mean_iters) << ',' << format_double(r.mean_n_grad) << ','
        << (r.normalized ? "true" : "false") << ',' << format_double(r.train.mean) << ','
        << format_double(r.train.std) << ',' << format_double(r.val.mean) << ','
        << format_double(r.val.std) << ',';
    if (r.test) out << format_double(r.test->mean) << ',' << format_double(r.test->std);
    else out << ',';
    out << '\n';
  }
}

void emit_summary_text(std::ostream& out, const SummaryTable& table) {
  // Solvers as columns, splits as rows, loss values x 1e-2.
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> head = {"(x1e-2)"};
  std::vector<std::string> train = {"train"}, val = {"val"}, test = {"test"};
  std::vector<std::string> iters = {"iters"}, diverged = {"diverged"};
  for (const SummaryRow& r : table.rows) {
    head.push_back(r.label);
    const bool all_diverged = r.runs > 0 && r.diverged == r.runs;
    train.push_back(all_diverged ? "diverged" : format_cell(r.train));
    val.push_back(all_diverged ? "diverged" : format_cell(r.val));
    test.push_back(all_diverged ? "diverged" : r.test ? format_cell(*r.test) : "-");
    iters.push_back(fixed2(r.mean_iters));
    diverged.push_back(std::to_string(r.diverged) + "/" + std::to_string(r.runs));
  }
  grid = {head, train, val, test, iters, diverged};

  // Width in code points; the only non-ASCII glyph is the plus-minus sign.
  auto width = [](const std::string& s) {
    std::size_t w = 0;
    for (const unsigned char c : s) w += (c & 0xC0) != 0x80;
    return w;
  };
  std::vector<std::size_t> cols(head.size(), 0);
  for (const auto& line : grid)
    for (std::size_t c = 0; c < line.size(); ++c) cols[c] = std::max(cols[c], width(line[c]));
  for (const auto& line : grid) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      if (c > 0) out << "  ";
      out << line[c];
      if (c + 1 < line.size()) out << std::string(cols[c] - width(line[c]), ' ');
    }
    out << '\n';
  }
  if (!table.rows.empty() && table.rows.front().normalized) {
    out << "losses divided by the population variance of y on each split\n";
  }
}

void emit_curves(std::ostream& out, const std::vector<RunTrace>& traces, CurveAxis axis) {
  out << "solver,seed,x,train_loss,val_loss,diverged\n";
  for (const RunTrace& t : traces) {
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      const TraceRow& r = t.rows[i];
      const bool flag = t.diverged && i + 1 == t.rows.size();
      out << t.label << ',' << t.seed << ','
          << (axis == CurveAxis::kIter ? r.iter : r.n_grad) << ','
          << format_double(r.train_loss) << ',' << format_double(r.val_loss) << ','
          << (flag ? "true" : "false") << '\n';
    }
  }
}

std::vector<RunTrace> read_trace_dir(const std::string& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw Error(ErrorCode::kIoError, "'" + dir + "' is not a directory");
  }
  std::vector<std::string> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
    // Summary and curve outputs share the directory; traces open with metadata.
    std::ifstream probe(entry.path(), std::ios::binary);
    if (probe.peek() == '#') files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  std::vector<RunTrace> out;
  for (const auto& f : files) {
    out.push_back(read_trace_file(f));
  }
  return out;
}

}  // namespace myhpo
