#include "myhpo/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "myhpo/model.hpp"
#include "myhpo/rng.hpp"

namespace myhpo {

namespace {

Vector central(const std::function<double(const Vector&)>& f, const Vector& x) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
    Vector p = x;
    Vector m = x;
    p[i] += h;
    m[i] -= h;
    g[i] = (f(p) - f(m)) / (2 * h);
  }
  return g;
}

double central(const std::function<double(double)>& f, double x) {
  const double h = 1e-6 * std::max(1.0, std::abs(x));
  return (f(x + h) - f(x - h)) / (2 * h);
}

double rel(const Vector& a, const Vector& b) {
  return (a - b).norm() / std::max({a.norm(), b.norm(), 1e-8});
}

double rel(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

Dataset random_data(Rng& rng, long n, long d, LossKind kind, Role role) {
  Matrix x(n, d);
  Vector y(n);
  for (long i = 0; i < n; ++i) {
    for (long j = 0; j < d; ++j) x(i, j) = rng.normal();
    y[i] = kind == LossKind::kLogistic ? (rng.uniform() < 0.5 ? -1.0 : 1.0) : rng.normal();
  }
  return Dataset(std::move(x), std::move(y), role);
}

Vector random_vector(Rng& rng, long d, double scale) {
  Vector v(d);
  for (long j = 0; j < d; ++j) v[j] = scale * rng.normal();
  return v;
}

}  // namespace

GradcheckReport gradcheck(long instances, std::uint64_t seed, double tol) {
  Rng rng(seed);
  GradcheckReport out;
  auto record = [&](double err, const char* what) {
    ++out.checks;
    if (err > out.max_rel_error || std::isnan(err)) {
      out.max_rel_error = err;
      out.worst = what;
    }
  };
  for (long k = 0; k < instances; ++k) {
    const LossKind kind = k % 2 == 0 ? LossKind::kLeastSquares : LossKind::kLogistic;
    const long d = 1 + static_cast<long>(rng.below(20));
    const long n = 1 + static_cast<long>(rng.below(50));
    const Dataset train = random_data(rng, n, d, kind, Role::kTrain);
    const Dataset val = random_data(rng, n, d, kind, Role::kValidation);
    const double lambda = rng.uniform(-3.0, 2.0);
    const Vector w = random_vector(rng, d, 0.5);
    const BestResponse br{random_vector(rng, d, 0.3), random_vector(rng, d, 0.3)};

    record(rel(grad_w_train(kind, w, lambda, train),
               central([&](const Vector& x) { return train_loss(kind, x, lambda, train); }, w)),
           "grad_w_train");
    record(rel(grad_w_val(kind, w, val),
               central([&](const Vector& x) { return val_loss(kind, x, val); }, w)),
           "grad_w_val");
    record(rel(grad_lambda_train(w, lambda),
               central([&](double l) { return train_loss(kind, w, l, train) -
                                              data_fit(kind, w, train); },
                       lambda)),
           "grad_lambda_train");
    record(rel(grad_lambda_val(kind, br, lambda, val),
               central([&](double l) { return val_loss(kind, best_response(br, l), val); },
                       lambda)),
           "grad_lambda_val");

    // Chain rule through the hypernetwork: d/dphi = [lambda g; g].
    const Vector g = grad_w_train(kind, best_response(br, lambda), lambda, train);
    Vector analytic(2 * d);
    analytic << lambda * g, g;
    Vector phi(2 * d);
    phi << br.phi1, br.phi0;
    const Vector numeric = central(
        [&](const Vector& p) {
          return train_loss(kind, best_response({p.head(d), p.tail(d)}, lambda), lambda, train);
        },
        phi);
    record(rel(analytic, numeric), "grad_phi_train");
    ++out.instances;
  }
  out.ok = out.max_rel_error <= tol;
  return out;
}

}  // namespace myhpo
