#include "myhpo/config.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "myhpo/error.hpp"
#include "myhpo/trace.hpp"

namespace myhpo {

namespace {

[[noreturn]] void schema(const std::string& key, const std::string& why) {
  throw Error(ErrorCode::kSchemaError, "'" + key + "': " + why);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Pops keys as they are read so leftovers can be reported.
class Entries {
 public:
  explicit Entries(std::map<std::string, std::string> kv) : kv_(std::move(kv)) {}

  std::optional<std::string> take(const std::string& key) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return std::nullopt;
    std::string v = it->second;
    kv_.erase(it);
    return v;
  }

  template <class T>
  std::optional<T> number(const std::string& key) {
    const auto text = take(key);
    if (!text) return std::nullopt;
    T value{};
    const char* first = text->data();
    const char* last = first + text->size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) schema(key, "not a number: '" + *text + "'");
    if constexpr (std::is_floating_point_v<T>) {
      if (!std::isfinite(value)) schema(key, "must be finite");
    }
    return value;
  }

  std::optional<bool> boolean(const std::string& key) {
    const auto text = take(key);
    if (!text) return std::nullopt;
    if (*text == "true" || *text == "1") return true;
    if (*text == "false" || *text == "0") return false;
    schema(key, "expected true or false");
  }

  const std::map<std::string, std::string>& rest() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

template <class T>
void set_if(std::optional<T> v, T& dst) {
  if (v) dst = *v;
}

std::string resolve(const std::string& base, const std::string& path) {
  if (path.empty() || base.empty() || std::filesystem::path(path).is_absolute()) return path;
  return (std::filesystem::path(base) / path).lexically_normal().string();
}

SolverBlock parse_solver(Entries& e, long index, std::set<std::string>& labels) {
  const std::string p = "solver[" + std::to_string(index) + "].";
  SolverBlock b;
  const auto name = e.take(p + "name");
  if (!name) schema(p + "name", "missing");
  b.name = *name;
  if (std::find(std::begin(kSolverNames), std::end(kSolverNames), b.name) ==
      std::end(kSolverNames)) {
    throw Error(ErrorCode::kUnknownSolver, "'" + p + "name': unknown solver '" + b.name +
                                               "' (known: sho, myhpo_c, myhpo_bt, myhpo_full, "
                                               "random, grid)");
  }
  b.label = e.take(p + "label").value_or(b.name);
  if (b.label.empty() || b.label.find_first_of("/\\ ,") != std::string::npos) {
    schema(p + "label", "must be non-empty without spaces, commas or slashes");
  }
  if (!labels.insert(b.label).second) schema(p + "label", "duplicate label '" + b.label + "'");
  b.budget_n_g = e.number<long>(p + "budget_n_g");
  if (b.budget_n_g && *b.budget_n_g < 2) schema(p + "budget_n_g", "must be >= 2");
  b.max_iters = e.number<long>(p + "max_iters");
  if (b.max_iters && *b.max_iters < 1) schema(p + "max_iters", "must be >= 1");

  if (b.name == "sho") {
    b.alpha = 0.01;
    b.beta = 0.01;
    set_if(e.number<double>(p + "alpha"), b.alpha);
    set_if(e.number<double>(p + "beta"), b.beta);
    set_if(e.number<double>(p + "sigma"), b.sigma);
    set_if(e.number<double>(p + "lambda0"), b.lambda0);
    if (!(b.alpha >= 0) || !(b.beta >= 0) || !(b.sigma >= 0)) {
      schema(p + "alpha", "alpha, beta and sigma must be >= 0");
    }
  } else if (b.is_myhpo()) {
    b.alpha = 0.1;
    b.beta = 0.1;
    set_if(e.number<double>(p + "alpha"), b.alpha);
    set_if(e.number<double>(p + "beta"), b.beta);
    set_if(e.number<double>(p + "delta"), b.delta);
    set_if(e.number<double>(p + "rho"), b.rho);
    set_if(e.number<double>(p + "lambda0"), b.lambda0);
    set_if(e.number<double>(p + "eps_tol"), b.eps_tol);
    set_if(e.number<int>(p + "max_halvings"), b.max_halvings);
    set_if(e.number<double>(p + "inner_tol"), b.inner_tol);
    set_if(e.number<long>(p + "inner_max_iters"), b.inner_max_iters);
    set_if(e.boolean(p + "fresh_w_gradient"), b.fresh_w_gradient);
    if (!(b.alpha > 0) || !(b.beta > 0) || !(b.delta > 0)) {
      schema(p + "alpha", "alpha, beta and delta must be > 0");
    }
    if (!(b.rho >= 0)) schema(p + "rho", "must be >= 0");
    if (!(b.eps_tol >= 0)) schema(p + "eps_tol", "must be >= 0");
    if (b.max_halvings < 0) schema(p + "max_halvings", "must be >= 0");
  } else {
    set_if(e.number<double>(p + "lo"), b.lo);
    set_if(e.number<double>(p + "hi"), b.hi);
    set_if(e.number<long>(p + "n_s"), b.n_s);
    b.n_t = e.number<long>(p + "n_t");
    set_if(e.number<double>(p + "alpha_train"), b.alpha_train);
    if (!(b.lo < b.hi)) schema(p + "lo", "lo must be < hi");
    if (b.n_s < 1) schema(p + "n_s", "must be >= 1");
    if (b.n_t && *b.n_t < 1) schema(p + "n_t", "must be >= 1");
    if (!(b.alpha_train >= 0)) schema(p + "alpha_train", "must be >= 0");
  }
  return b;
}

}  // namespace

KeyValues SolverBlock::echo() const {
  KeyValues out = {{"name", name}, {"label", label}};
  if (budget_n_g) out.emplace_back("budget_n_g", std::to_string(*budget_n_g));
  if (max_iters) out.emplace_back("max_iters", std::to_string(*max_iters));
  if (name == "sho") {
    out.emplace_back("alpha", format_double(alpha));
    out.emplace_back("beta", format_double(beta));
    out.emplace_back("sigma", format_double(sigma));
    out.emplace_back("lambda0", format_double(lambda0));
  } else if (is_myhpo()) {
    out.emplace_back("alpha", format_double(alpha));
    out.emplace_back("beta", format_double(beta));
    out.emplace_back("delta", format_double(delta));
    out.emplace_back("rho", format_double(rho));
    out.emplace_back("lambda0", format_double(lambda0));
    out.emplace_back("eps_tol", format_double(eps_tol));
    out.emplace_back("max_halvings", std::to_string(max_halvings));
    out.emplace_back("inner_tol", format_double(inner_tol));
    out.emplace_back("inner_max_iters", std::to_string(inner_max_iters));
    out.emplace_back("fresh_w_gradient", fresh_w_gradient ? "true" : "false");
  } else {
    out.emplace_back("lo", format_double(lo));
    out.emplace_back("hi", format_double(hi));
    out.emplace_back("n_s", std::to_string(n_s));
    if (n_t) out.emplace_back("n_t", std::to_string(*n_t));
    out.emplace_back("alpha_train", format_double(alpha_train));
  }
  return out;
}

KeyValues ExperimentConfig::problem_echo() const {
  const ProblemConfig& p = problem;
  KeyValues out;
  const char* kinds[] = {"synthetic", "idx", "csv"};
  out.emplace_back("problem.kind", kinds[static_cast<int>(p.kind)]);
  out.emplace_back("problem.loss", std::string(to_string(p.loss)));
  if (p.kind == ProblemKind::kSynthetic) {
    out.emplace_back("problem.synthetic.n", std::to_string(p.synthetic.n));
    out.emplace_back("problem.synthetic.d", std::to_string(p.synthetic.d));
    out.emplace_back("problem.synthetic.kappa", format_double(p.synthetic.kappa));
    out.emplace_back("problem.synthetic.noise_std", format_double(p.synthetic.noise_std));
    out.emplace_back("problem.synthetic.scale", format_double(p.synthetic.scale));
  } else if (p.kind == ProblemKind::kIdx) {
    out.emplace_back("problem.idx.images", p.idx_images);
    out.emplace_back("problem.idx.labels", p.idx_labels);
  } else {
    out.emplace_back("problem.csv.path", p.csv_path);
    out.emplace_back("problem.csv.target", p.csv_target);
  }
  if (p.class_a) out.emplace_back("problem.class_a", format_double(*p.class_a));
  if (p.class_b) out.emplace_back("problem.class_b", format_double(*p.class_b));
  if (p.split.use_counts) {
    out.emplace_back("problem.split.train_count", std::to_string(p.split.train_count));
    out.emplace_back("problem.split.val_count", std::to_string(p.split.val_count));
    out.emplace_back("problem.split.test_count", std::to_string(p.split.test_count));
  } else {
    out.emplace_back("problem.split.train_fraction", format_double(p.split.train_fraction));
    out.emplace_back("problem.split.val_fraction", format_double(p.split.val_fraction));
  }
  out.emplace_back("problem.split.stratified", p.split.stratified ? "true" : "false");
  out.emplace_back("problem.append_ones", p.append_ones ? "true" : "false");
  if (p.data_seed) out.emplace_back("problem.data_seed", std::to_string(*p.data_seed));
  return out;
}

std::string ExperimentConfig::canonical() const {
  std::vector<std::string> lines;
  for (const auto& [k, v] : problem_echo()) lines.push_back(k + "=" + v);
  lines.push_back("budget_n_g=" + std::to_string(budget_n_g));
  lines.push_back("repetitions=" + std::to_string(repetitions));
  lines.push_back("seed=" + std::to_string(seed));
  for (std::size_t i = 0; i < solvers.size(); ++i) {
    for (const auto& [k, v] : solvers[i].echo()) {
      lines.push_back("solver[" + std::to_string(i) + "]." + k + "=" + v);
    }
  }
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& base_dir) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string raw;
  long line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      schema("line " + std::to_string(line_no), "expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) schema("line " + std::to_string(line_no), "empty key");
    if (!kv.emplace(key, value).second) schema(key, "given twice");
  }

  Entries e(std::move(kv));
  ExperimentConfig cfg;
  ProblemConfig& p = cfg.problem;

  const std::string kind = e.take("problem.kind").value_or("synthetic");
  if (kind == "synthetic") p.kind = ProblemKind::kSynthetic;
  else if (kind == "idx") p.kind = ProblemKind::kIdx;
  else if (kind == "csv") p.kind = ProblemKind::kCsv;
  else schema("problem.kind", "expected synthetic, idx or csv");

  if (const auto loss = e.take("problem.loss")) {
    try {
      p.loss = parse_loss_kind(*loss);
    } catch (const Error&) {
      schema("problem.loss", "expected least_squares or logistic");
    }
  } else {
    p.loss = p.kind == ProblemKind::kIdx ? LossKind::kLogistic : LossKind::kLeastSquares;
  }

  if (p.kind == ProblemKind::kSynthetic) {
    set_if(e.number<long>("problem.synthetic.n"), p.synthetic.n);
    set_if(e.number<long>("problem.synthetic.d"), p.synthetic.d);
    set_if(e.number<double>("problem.synthetic.kappa"), p.synthetic.kappa);
    set_if(e.number<double>("problem.synthetic.noise_std"), p.synthetic.noise_std);
    set_if(e.number<double>("problem.synthetic.scale"), p.synthetic.scale);
    if (p.synthetic.n < 3) schema("problem.synthetic.n", "must be >= 3");
    if (p.synthetic.d < 1) schema("problem.synthetic.d", "must be >= 1");
    if (!(p.synthetic.kappa >= 1)) schema("problem.synthetic.kappa", "must be >= 1");
    if (!(p.synthetic.noise_std >= 0)) schema("problem.synthetic.noise_std", "must be >= 0");
    if (!(p.synthetic.scale > 0)) schema("problem.synthetic.scale", "must be > 0");
  } else if (p.kind == ProblemKind::kIdx) {
    const auto images = e.take("problem.idx.images");
    const auto labels = e.take("problem.idx.labels");
    if (!images) schema("problem.idx.images", "missing");
    if (!labels) schema("problem.idx.labels", "missing");
    p.idx_images = resolve(base_dir, *images);
    p.idx_labels = resolve(base_dir, *labels);
  } else {
    const auto path = e.take("problem.csv.path");
    if (!path) schema("problem.csv.path", "missing");
    p.csv_path = resolve(base_dir, *path);
    p.csv_target = e.take("problem.csv.target").value_or("y");
  }
  p.class_a = e.number<double>("problem.class_a");
  p.class_b = e.number<double>("problem.class_b");
  if (p.class_a.has_value() != p.class_b.has_value()) {
    schema("problem.class_b", "class_a and class_b go together");
  }
  if (p.loss == LossKind::kLogistic && p.kind != ProblemKind::kSynthetic && !p.class_a) {
    p.class_a = 0.0;
    p.class_b = 1.0;
  }

  const auto train_count = e.number<long>("problem.split.train_count");
  const auto val_count = e.number<long>("problem.split.val_count");
  const auto test_count = e.number<long>("problem.split.test_count");
  const auto train_fraction = e.number<double>("problem.split.train_fraction");
  const auto val_fraction = e.number<double>("problem.split.val_fraction");
  if (train_count || val_count || test_count) {
    if (train_fraction || val_fraction) {
      schema("problem.split.train_count", "use either counts or fractions");
    }
    if (!train_count || !val_count) schema("problem.split.train_count", "needs val_count too");
    p.split.use_counts = true;
    p.split.train_count = *train_count;
    p.split.val_count = *val_count;
    p.split.test_count = test_count.value_or(0);
  } else {
    set_if(train_fraction, p.split.train_fraction);
    set_if(val_fraction, p.split.val_fraction);
  }
  set_if(e.boolean("problem.split.stratified"), p.split.stratified);
  set_if(e.boolean("problem.append_ones"), p.append_ones);
  p.data_seed = e.number<std::uint64_t>("problem.data_seed");

  const auto budget = e.number<long>("budget_n_g");
  if (!budget) schema("budget_n_g", "missing");
  if (*budget < 2) schema("budget_n_g", "must be >= 2, got " + std::to_string(*budget));
  cfg.budget_n_g = *budget;
  set_if(e.number<long>("repetitions"), cfg.repetitions);
  if (cfg.repetitions < 1) schema("repetitions", "must be >= 1");
  set_if(e.number<std::uint64_t>("seed"), cfg.seed);
  if (const auto out = e.take("output_dir")) cfg.output_dir = resolve(base_dir, *out);
  else cfg.output_dir = resolve(base_dir, cfg.output_dir);

  // Solver indices must run 0, 1, 2, ... without gaps.
  std::set<long> indices;
  static const std::regex solver_key(R"(solver\[(\d+)\]\..+)");
  for (const auto& [k, v] : e.rest()) {
    std::smatch m;
    if (std::regex_match(k, m, solver_key)) indices.insert(std::stol(m[1].str()));
  }
  std::set<std::string> labels;
  long expected = 0;
  for (const long i : indices) {
    if (i != expected) schema("solver[" + std::to_string(expected) + "].name", "missing");
    cfg.solvers.push_back(parse_solver(e, i, labels));
    ++expected;
  }
  if (cfg.solvers.empty()) schema("solver[0].name", "at least one solver block is required");

  if (!e.rest().empty()) schema(e.rest().begin()->first, "unknown key");
  return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string base = std::filesystem::path(path).parent_path().string();
  return parse_config_text(buf.str(), base.empty() ? "." : base);
}

}  // namespace myhpo
