#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "myhpo/config.hpp"
#include "myhpo/datasets.hpp"
#include "myhpo/error.hpp"
#include "myhpo/experiment.hpp"
#include "myhpo/gradcheck.hpp"
#include "myhpo/model.hpp"
#include "myhpo/myhpo.hpp"
#include "myhpo/report.hpp"
#include "myhpo/search.hpp"
#include "myhpo/sho.hpp"

namespace py = pybind11;
using namespace myhpo;

namespace {

LossKind loss_of(const std::string& name) { return parse_loss_kind(name); }

Dataset make_dataset(const Matrix& x, const Vector& y, const std::string& role) {
  Role r = Role::kTrain;
  if (role == "val" || role == "validation") r = Role::kValidation;
  else if (role == "test") r = Role::kTest;
  else if (role != "train") throw Error(ErrorCode::kInvalidArgument, "role must be train, val or test");
  return Dataset(x, y, r);
}

MyhpoVariant variant_of(const std::string& name) {
  if (name == "myhpo_c") return MyhpoVariant::kSimplifiedConstant;
  if (name == "myhpo_bt") return MyhpoVariant::kSimplifiedBacktracking;
  if (name == "myhpo_full") return MyhpoVariant::kFull;
  throw Error(ErrorCode::kUnknownSolver, "unknown MY-HPO variant '" + name + "'");
}

py::dict trace_dict(const RunTrace& t) {
  py::dict d;
  d["label"] = t.label;
  d["solver"] = t.solver;
  d["seed"] = t.seed;
  d["diverged"] = t.diverged;
  d["status"] = std::string(to_string(t.status));
  d["prng"] = t.prng;
  d["config_hash"] = t.config_hash;
  d["params"] = t.params;
  d["lambda"] = t.lambda;
  d["weights"] = t.weights;
  py::dict cols;
  std::vector<long> iter, n_grad;
  std::vector<double> lambda, train, val;
  std::vector<std::optional<double>> test, r, s;
  for (const TraceRow& row : t.rows) {
    iter.push_back(row.iter);
    n_grad.push_back(row.n_grad);
    lambda.push_back(row.lambda);
    train.push_back(row.train_loss);
    val.push_back(row.val_loss);
    test.push_back(row.test_loss);
    r.push_back(row.r_norm);
    s.push_back(row.s_norm);
  }
  cols["iter"] = iter;
  cols["n_grad"] = n_grad;
  cols["lambda"] = lambda;
  cols["train_loss"] = train;
  cols["val_loss"] = val;
  cols["test_loss"] = test;
  cols["r_norm"] = r;
  cols["s_norm"] = s;
  d["rows"] = cols;
  return d;
}

Problem make_problem(const std::string& loss, const Matrix& xt, const Vector& yt,
                     const Matrix& xv, const Vector& yv) {
  return Problem(loss_of(loss), Dataset(xt, yt, Role::kTrain), Dataset(xv, yv, Role::kValidation));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bi-level hyperparameter optimization solvers and benchmark harness.";

  // Messages start with the error code name, e.g. "SplitDegenerate: ...".
  py::register_exception<Error>(m, "Error", PyExc_ValueError);

  m.def("best_response",
        [](const Vector& phi1, const Vector& phi0, double lambda) {
          return best_response(BestResponse{phi1, phi0}, lambda);
        },
        py::arg("phi1"), py::arg("phi0"), py::arg("lambda_"));
  m.def("split_best_response",
        [](const Vector& v, double lambda) {
          const BestResponse br = split_best_response(v, lambda);
          return py::make_tuple(br.phi1, br.phi0);
        },
        py::arg("v"), py::arg("lambda_"), "Returns (phi1, phi0).");

  m.def("train_loss",
        [](const std::string& loss, const Vector& w, double lambda, const Matrix& x,
           const Vector& y) { return train_loss(loss_of(loss), w, lambda, make_dataset(x, y, "train")); },
        py::arg("loss"), py::arg("w"), py::arg("lambda_"), py::arg("X"), py::arg("y"));
  m.def("val_loss",
        [](const std::string& loss, const Vector& w, const Matrix& x, const Vector& y) {
          return val_loss(loss_of(loss), w, make_dataset(x, y, "val"));
        },
        py::arg("loss"), py::arg("w"), py::arg("X"), py::arg("y"));
  m.def("grad_w_train",
        [](const std::string& loss, const Vector& w, double lambda, const Matrix& x,
           const Vector& y) {
          return grad_w_train(loss_of(loss), w, lambda, make_dataset(x, y, "train"));
        },
        py::arg("loss"), py::arg("w"), py::arg("lambda_"), py::arg("X"), py::arg("y"));
  m.def("grad_w_val",
        [](const std::string& loss, const Vector& w, const Matrix& x, const Vector& y) {
          return grad_w_val(loss_of(loss), w, make_dataset(x, y, "val"));
        },
        py::arg("loss"), py::arg("w"), py::arg("X"), py::arg("y"));

  m.def("synthesize",
        [](long n, long d, double kappa, double noise_std, double scale, std::uint64_t seed) {
          SyntheticSpec s;
          s.n = n;
          s.d = d;
          s.kappa = kappa;
          s.noise_std = noise_std;
          s.scale = scale;
          s.seed = seed;
          const RawTable t = synthesize(s);
          return py::make_tuple(t.features, t.targets);
        },
        py::arg("n") = 60, py::arg("d") = 50, py::arg("kappa") = 1e4, py::arg("noise_std") = 0.1,
        py::arg("scale") = 1.0, py::arg("seed") = 0, "Returns (X, y).");
  m.def("load_idx",
        [](const std::string& images, const std::string& labels) {
          const RawTable t = load_idx(images, labels);
          return py::make_tuple(t.features, t.targets);
        },
        py::arg("images"), py::arg("labels"));
  m.def("load_csv",
        [](const std::string& path, const std::string& target) {
          const RawTable t = load_csv(path, target);
          return py::make_tuple(t.features, t.targets);
        },
        py::arg("path"), py::arg("target") = "y");

  m.def("sho_run",
        [](const std::string& loss, const Matrix& xt, const Vector& yt, const Matrix& xv,
           const Vector& yv, long budget, double alpha, double beta, double sigma,
           std::uint64_t seed, double lambda0) {
          ShoConfig cfg;
          cfg.alpha = alpha;
          cfg.beta = beta;
          cfg.sigma = sigma;
          cfg.seed = seed;
          const Problem p = make_problem(loss, xt, yt, xv, yv);
          return trace_dict(sho_run(ShoState::initial(p.dim(), lambda0), p, cfg, budget));
        },
        py::arg("loss"), py::arg("X_train"), py::arg("y_train"), py::arg("X_val"),
        py::arg("y_val"), py::arg("budget"), py::arg("alpha") = 0.01, py::arg("beta") = 0.01,
        py::arg("sigma") = 1e-4, py::arg("seed") = 0, py::arg("lambda0") = -1.0);
  m.def("myhpo_run",
        [](const std::string& loss, const Matrix& xt, const Vector& yt, const Matrix& xv,
           const Vector& yv, long budget, const std::string& variant, double rho, double alpha,
           double beta, double delta, double eps_tol, double lambda0) {
          MyhpoConfig cfg;
          cfg.variant = variant_of(variant);
          cfg.rho = rho;
          cfg.alpha = alpha;
          cfg.beta = beta;
          cfg.delta = delta;
          cfg.eps_tol = eps_tol;
          const Problem p = make_problem(loss, xt, yt, xv, yv);
          return trace_dict(myhpo_run(MyhpoState::initial(p.dim(), lambda0), p, cfg, budget));
        },
        py::arg("loss"), py::arg("X_train"), py::arg("y_train"), py::arg("X_val"),
        py::arg("y_val"), py::arg("budget"), py::arg("variant") = "myhpo_bt",
        py::arg("rho") = 1.0, py::arg("alpha") = 0.1, py::arg("beta") = 0.1,
        py::arg("delta") = 0.5, py::arg("eps_tol") = 1e-6, py::arg("lambda0") = -1.0);
  m.def("search_run",
        [](const std::string& loss, const Matrix& xt, const Vector& yt, const Matrix& xv,
           const Vector& yv, const std::string& kind, long n_s, long n_t, double lo, double hi,
           double alpha_train, std::uint64_t seed) {
          SearchConfig cfg;
          cfg.n_s = n_s;
          cfg.n_t = n_t;
          cfg.lo = lo;
          cfg.hi = hi;
          cfg.alpha_train = alpha_train;
          cfg.seed = seed;
          std::vector<double> cands;
          if (kind == "grid") cands = grid_candidates(cfg);
          else if (kind == "random") cands = random_candidates(cfg);
          else throw Error(ErrorCode::kUnknownSolver, "search kind must be grid or random");
          return trace_dict(search_run(cands, make_problem(loss, xt, yt, xv, yv), cfg, kind));
        },
        py::arg("loss"), py::arg("X_train"), py::arg("y_train"), py::arg("X_val"),
        py::arg("y_val"), py::arg("kind") = "grid", py::arg("n_s") = 2, py::arg("n_t") = 1,
        py::arg("lo") = -10.0, py::arg("hi") = 5.0, py::arg("alpha_train") = 0.1,
        py::arg("seed") = 0);
  m.def("grid_candidates",
        [](double lo, double hi, long n_s) {
          SearchConfig cfg;
          cfg.lo = lo;
          cfg.hi = hi;
          cfg.n_s = n_s;
          return grid_candidates(cfg);
        },
        py::arg("lo") = -10.0, py::arg("hi") = 5.0, py::arg("n_s") = 2);

  m.def("validate_config",
        [](const std::string& path) {
          const ExperimentConfig c = parse_config(path);
          return py::make_tuple(c.canonical(), c.hash());
        },
        py::arg("path"), "Returns (canonical text, hash).");
  m.def("run_experiment",
        [](const std::string& path, int jobs, bool write_files) {
          const ExperimentConfig c = parse_config(path);
          ExperimentResult r;
          {
            py::gil_scoped_release release;
            r = run_experiment(c, jobs, write_files);
          }
          py::list out;
          for (const auto& rep : r.traces)
            for (const RunTrace& t : rep) out.append(trace_dict(t));
          return out;
        },
        py::arg("path"), py::arg("jobs") = 1, py::arg("write_files") = false);
  m.def("format_cell", [](double mean, double std) { return format_cell({mean, std}); },
        py::arg("mean"), py::arg("std"));
  m.def("gradcheck",
        [](long instances, std::uint64_t seed) {
          const GradcheckReport r = gradcheck(instances, seed);
          py::dict d;
          d["instances"] = r.instances;
          d["checks"] = r.checks;
          d["max_rel_error"] = r.max_rel_error;
          d["worst"] = r.worst;
          d["ok"] = r.ok;
          return d;
        },
        py::arg("instances") = 100, py::arg("seed") = 0);
}
