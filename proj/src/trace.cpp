#include "myhpo/trace.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "myhpo/error.hpp"

namespace myhpo {

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::kBudget:
      return "budget";
    case RunStatus::kMaxIters:
      return "max_iters";
    case RunStatus::kConverged:
      return "converged";
    case RunStatus::kDiverged:
      return "diverged";
    case RunStatus::kSplitDegenerate:
      return "split_degenerate";
    case RunStatus::kInnerSolveFailed:
      return "inner_solve_failed";
  }
  return "unknown";
}

RunStatus parse_run_status(std::string_view text) {
  for (RunStatus s : {RunStatus::kBudget, RunStatus::kMaxIters, RunStatus::kConverged,
                      RunStatus::kDiverged, RunStatus::kSplitDegenerate,
                      RunStatus::kInnerSolveFailed}) {
    if (to_string(s) == text) return s;
  }
  throw Error(ErrorCode::kParseError, "unknown run status '" + std::string(text) + "'");
}

std::optional<std::string> RunTrace::param(std::string_view key) const {
  for (const auto& [k, v] : params) {
    if (k == key) return v;
  }
  return std::nullopt;
}

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, end);
}

namespace {

std::string format_optional(const std::optional<double>& value) {
  return value ? format_double(*value) : std::string();
}

double parse_double(std::string_view text, long line) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::kParseError,
                "trace line " + std::to_string(line) + ": bad number '" + std::string(text) + "'");
  }
  return value;
}

long parse_long(std::string_view text, long line) {
  long value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::kParseError,
                "trace line " + std::to_string(line) + ": bad integer '" + std::string(text) + "'");
  }
  return value;
}

std::optional<double> parse_optional(std::string_view text, long line) {
  if (text.empty()) return std::nullopt;
  return parse_double(text, line);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

}  // namespace

void write_trace(std::ostream& out, const RunTrace& trace) {
  out << "# label=" << trace.label << '\n';
  out << "# solver=" << trace.solver << '\n';
  out << "# seed=" << trace.seed << '\n';
  out << "# config_hash=" << trace.config_hash << '\n';
  out << "# prng=" << trace.prng << '\n';
  out << "# diverged=" << (trace.diverged ? "true" : "false") << '\n';
  out << "# status=" << to_string(trace.status) << '\n';
  for (const auto& [key, value] : trace.params) out << "# param." << key << '=' << value << '\n';
  out << kTraceColumns << '\n';
  for (const TraceRow& row : trace.rows) {
    out << row.iter << ',' << row.n_grad << ',' << format_double(row.lambda) << ','
        << format_double(row.train_loss) << ',' << format_double(row.val_loss) << ','
        << format_optional(row.test_loss) << ',' << format_optional(row.r_norm) << ','
        << format_optional(row.s_norm) << ',' << format_optional(row.u_norm) << ','
        << row.loss_eval_count << '\n';
  }
}

void write_trace_file(const std::string& path, const RunTrace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open '" + path + "' for writing");
  write_trace(out, trace);
  if (!out) throw Error(ErrorCode::kIoError, "write to '" + path + "' failed");
}

RunTrace read_trace(std::istream& in) {
  RunTrace trace;
  std::string line;
  long line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string_view meta(line);
      meta.remove_prefix(1);
      while (!meta.empty() && meta.front() == ' ') meta.remove_prefix(1);
      const std::size_t eq = meta.find('=');
      if (eq == std::string_view::npos) continue;
      const std::string key(meta.substr(0, eq));
      const std::string value(meta.substr(eq + 1));
      if (key == "label") trace.label = value;
      else if (key == "solver") trace.solver = value;
      else if (key == "seed") trace.seed = std::stoull(value);
      else if (key == "config_hash") trace.config_hash = value;
      else if (key == "prng") trace.prng = value;
      else if (key == "diverged") trace.diverged = value == "true";
      else if (key == "status") trace.status = parse_run_status(value);
      else if (key.rfind("param.", 0) == 0) trace.params.emplace_back(key.substr(6), value);
      continue;
    }
    if (!header_seen) {
      if (line != kTraceColumns) {
        throw Error(ErrorCode::kParseError, "trace line " + std::to_string(line_no) +
                                                ": unexpected column header '" + line + "'");
      }
      header_seen = true;
      continue;
    }
    const auto f = split_fields(line);
    if (f.size() != 10) {
      throw Error(ErrorCode::kParseError,
                  "trace line " + std::to_string(line_no) + ": expected 10 fields");
    }
    TraceRow row;
    row.iter = parse_long(f[0], line_no);
    row.n_grad = parse_long(f[1], line_no);
    row.lambda = parse_double(f[2], line_no);
    row.train_loss = parse_double(f[3], line_no);
    row.val_loss = parse_double(f[4], line_no);
    row.test_loss = parse_optional(f[5], line_no);
    row.r_norm = parse_optional(f[6], line_no);
    row.s_norm = parse_optional(f[7], line_no);
    row.u_norm = parse_optional(f[8], line_no);
    row.loss_eval_count = parse_long(f[9], line_no);
    trace.rows.push_back(row);
  }
  if (!header_seen) throw Error(ErrorCode::kParseError, "trace has no column header");
  if (!trace.rows.empty()) trace.lambda = trace.rows.back().lambda;
  return trace;
}

RunTrace read_trace_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open '" + path + "'");
  return read_trace(in);
}

}  // namespace myhpo
