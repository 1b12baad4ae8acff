#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "../support/oracles.hpp"
#include "myhpo/error.hpp"
#include "myhpo/model.hpp"

using namespace myhpo;

namespace {

Dataset make(std::initializer_list<std::initializer_list<double>> rows,
             std::initializer_list<double> y, Role role = Role::kTrain) {
  Matrix x(static_cast<Eigen::Index>(rows.size()),
           static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) x(i, j++) = v;
    ++i;
  }
  Vector t(static_cast<Eigen::Index>(y.size()));
  i = 0;
  for (double v : y) t(i++) = v;
  return Dataset(x, t, role);
}

oracle::Vec to_vec(const Vector& v) { return {v.data(), v.data() + v.size()}; }

oracle::Mat to_mat(const Matrix& m) {
  oracle::Mat out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i].push_back(m(i, j));
  return out;
}

Vector from_vec(const oracle::Vec& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Dataset random_dataset(std::mt19937_64& gen, int n, int d, bool labels,
                       Role role = Role::kTrain) {
  std::normal_distribution<double> nd;
  Matrix x(n, d);
  Vector y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) x(i, j) = nd(gen);
    y(i) = labels ? (nd(gen) > 0 ? 1.0 : -1.0) : nd(gen);
  }
  return Dataset(x, y, role);
}

}  // namespace

TEST_CASE("best_response is the affine map") {
  BestResponse br{Vector::Map(std::vector<double>{1, 2}.data(), 2),
                  Vector::Map(std::vector<double>{3, 4}.data(), 2)};
  CHECK(best_response(br, 2.0) == Vector::Map(std::vector<double>{5, 8}.data(), 2));
  CHECK(best_response(br, 0.0) == br.phi0);
  BestResponse b2{Vector::Constant(2, 2.0), Vector::Constant(2, 1.0)};
  CHECK(best_response(b2, -1.0) == Vector::Constant(2, -1.0));
}

TEST_CASE("split_best_response uses the mean") {
  Vector v(2);
  v << 0, 2;
  const BestResponse br = split_best_response(v, 2.0);
  CHECK(br.phi0 == Vector::Constant(2, 1.0));
  CHECK(br.phi1(0) == -0.5);
  CHECK(br.phi1(1) == 0.5);

  const BestResponse flat = split_best_response(Vector::Constant(3, 1.7), -4.0);
  CHECK(flat.phi1 == Vector::Zero(3));
  CHECK(flat.phi0 == Vector::Constant(3, 1.7));

  Vector w(2);
  w << 1, 3;
  try {
    split_best_response(w, 0.0);
    FAIL("expected SplitDegenerate");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSplitDegenerate);
  }
  CHECK_THROWS_AS(split_best_response(w, 1e-13), Error);
}

TEST_CASE("split then best_response recovers v up to operand rounding") {
  // Exact 4-ulp recovery is not possible for components far smaller than the
  // mean; the bound below is relative to |mean| + |v_j|.
  std::mt19937_64 gen(11);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(-6.0, 2.0);
  for (int t = 0; t < 2000; ++t) {
    const int d = 1 + static_cast<int>(gen() % 20);
    Vector v(d);
    for (int j = 0; j < d; ++j) v(j) = nd(gen);
    const double lambda = ((gen() & 1) ? 1.0 : -1.0) * std::pow(10.0, ud(gen));
    const Vector back = best_response(split_best_response(v, lambda), lambda);
    const double mean = v.mean();
    for (int j = 0; j < d; ++j) {
      const double scale = std::abs(mean) + std::abs(v(j));
      REQUIRE(std::abs(back(j) - v(j)) <= 2.0 * std::numeric_limits<double>::epsilon() * scale);
    }
  }
}

TEST_CASE("loss examples") {
  const Dataset d = make({{1, 0}, {0, 1}}, {1, -1});
  Vector w = Vector::Zero(2);
  CHECK(train_loss(LossKind::kLeastSquares, w, 0.0, d) == doctest::Approx(0.5).epsilon(1e-15));
  w << 1, -1;
  CHECK(train_loss(LossKind::kLeastSquares, w, 0.0, d) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(train_loss(LossKind::kLogistic, Vector::Zero(2), 3.7, d) == std::log(2.0));
  const Dataset dv = make({{1, 0}, {0, 1}}, {1, -1}, Role::kValidation);
  CHECK(val_loss(LossKind::kLogistic, Vector::Zero(2), dv) == std::log(2.0));
  CHECK_THROWS_AS(val_loss(LossKind::kLogistic, Vector::Zero(2), d), Error);

  const Dataset one = make({{1, 0}}, {1}, Role::kValidation);
  Vector fit(2);
  fit << 1, 0;
  CHECK(val_loss(LossKind::kLeastSquares, fit, one) == 0.0);
  CHECK(val_loss(LossKind::kLeastSquares, Vector::Zero(2), dv) == doctest::Approx(0.5));
}

TEST_CASE("gradient examples") {
  const Dataset t = make({{1, 0}, {0, 1}}, {1, -1});
  const Dataset d = make({{1, 0}, {0, 1}}, {1, -1}, Role::kValidation);
  const Vector g = grad_w_train(LossKind::kLeastSquares, Vector::Zero(2), 0.0, t);
  CHECK(g(0) == doctest::Approx(-0.5));
  CHECK(g(1) == doctest::Approx(0.5));

  const Dataset s = make({{1}}, {1}, Role::kValidation);
  CHECK(grad_w_val(LossKind::kLogistic, Vector::Zero(1), s)(0) == doctest::Approx(-0.5));

  Vector interp(2);
  interp << 1, -1;
  CHECK(grad_w_val(LossKind::kLeastSquares, interp, d).norm() == 0.0);

  CHECK(grad_lambda_train(Vector::Zero(3), 1.5) == 0.0);
  CHECK(grad_lambda_train(Vector::Ones(2), 0.0) == doctest::Approx(2.0));

  BestResponse flat{Vector::Zero(2), Vector::Ones(2)};
  CHECK(grad_lambda_val(LossKind::kLeastSquares, flat, 0.3, d) == 0.0);
  BestResponse exact{Vector::Zero(2), interp};
  exact.phi1 << 0.5, -0.25;
  // G(0) = phi0 interpolates the data.
  CHECK(grad_lambda_val(LossKind::kLeastSquares, exact, 0.0, d) == 0.0);
}

TEST_CASE("gradient vanishes at the ridge minimizer") {
  std::mt19937_64 gen(5);
  for (int t = 0; t < 20; ++t) {
    const Dataset d = random_dataset(gen, 30, 8, false);
    const double lambda = -2.0 + 0.1 * t;
    const oracle::Vec zero(8, 0.0);
    const Vector w = from_vec(
        oracle::ridge(to_mat(d.X), to_vec(d.y), std::exp(lambda), zero, 0.0, zero));
    CHECK(grad_w_train(LossKind::kLeastSquares, w, lambda, d).norm() <= 1e-8);
  }
}

TEST_CASE("analytic gradients agree with central differences") {
  std::mt19937_64 gen(17);
  std::normal_distribution<double> nd;
  double worst = 0.0;
  for (int t = 0; t < 120; ++t) {
    const bool logistic = t % 2 == 1;
    const LossKind kind = logistic ? LossKind::kLogistic : LossKind::kLeastSquares;
    const int n = 2 + static_cast<int>(gen() % 49);
    const int dim = 1 + static_cast<int>(gen() % 20);
    const Dataset data = random_dataset(gen, n, dim, logistic);
    const Dataset vdata(data.X, data.y, Role::kValidation);
    const oracle::Mat x = to_mat(data.X);
    const oracle::Vec y = to_vec(data.y);
    Vector w(dim), phi1(dim), phi0(dim);
    for (int j = 0; j < dim; ++j) {
      w(j) = 0.5 * nd(gen);
      phi1(j) = 0.5 * nd(gen);
      phi0(j) = 0.5 * nd(gen);
    }
    const double lambda = -3.0 + 3.0 * std::uniform_real_distribution<double>()(gen);

    const oracle::Vec fd_train = oracle::central_grad(
        [&](const oracle::Vec& p) { return oracle::train_loss(logistic, p, lambda, x, y); },
        to_vec(w));
    worst = std::max(worst, oracle::rel_err(to_vec(grad_w_train(kind, w, lambda, data)), fd_train));

    const oracle::Vec fd_val = oracle::central_grad(
        [&](const oracle::Vec& p) { return oracle::data_fit(logistic, p, x, y); }, to_vec(w));
    worst = std::max(worst, oracle::rel_err(to_vec(grad_w_val(kind, w, vdata)), fd_val));

    const BestResponse br{phi1, phi0};
    const double fd_lam = oracle::central_deriv(
        [&](double l) {
          oracle::Vec g(dim);
          for (int j = 0; j < dim; ++j) g[j] = l * phi1(j) + phi0(j);
          return oracle::data_fit(logistic, g, x, y);
        },
        lambda);
    worst = std::max(worst, oracle::rel_err(grad_lambda_val(kind, br, lambda, vdata), fd_lam));

    const double fd_reg = oracle::central_deriv(
        [&](double l) { return std::exp(l) * oracle::dot(to_vec(w), to_vec(w)); }, lambda);
    worst = std::max(worst, oracle::rel_err(grad_lambda_train(w, lambda), fd_reg));

    CHECK(train_loss(kind, w, lambda, data) ==
          doctest::Approx(oracle::train_loss(logistic, to_vec(w), lambda, x, y)).epsilon(1e-12));
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("least-squares training loss is minimal at the ridge solution") {
  std::mt19937_64 gen(23);
  std::normal_distribution<double> nd;
  const Dataset d = random_dataset(gen, 40, 6, false);
  const double lambda = -1.0;
  const oracle::Vec zero(6, 0.0);
  const Vector w =
      from_vec(oracle::ridge(to_mat(d.X), to_vec(d.y), std::exp(lambda), zero, 0.0, zero));
  const double best = train_loss(LossKind::kLeastSquares, w, lambda, d);
  for (int t = 0; t < 100; ++t) {
    Vector p = w;
    for (int j = 0; j < 6; ++j) p(j) += 0.1 * nd(gen);
    CHECK(best <= train_loss(LossKind::kLeastSquares, p, lambda, d));
  }
}

TEST_CASE("losses are nonnegative and the logistic form does not overflow") {
  std::mt19937_64 gen(29);
  const Dataset d = random_dataset(gen, 20, 4, true, Role::kValidation);
  const Vector big = Vector::Constant(4, 1e6);
  for (LossKind k : {LossKind::kLeastSquares, LossKind::kLogistic}) {
    const double l = val_loss(k, big, d);
    CHECK(std::isfinite(l));
    CHECK(l >= 0.0);
    CHECK(grad_w_val(k, big, d).allFinite());
  }
  CHECK(log1p_exp_neg(1000.0) >= 0.0);
  CHECK(log1p_exp_neg(-1000.0) == doctest::Approx(1000.0));
  CHECK(sigmoid_neg(1000.0) == doctest::Approx(0.0));
  CHECK(sigmoid_neg(-1000.0) == 1.0);
}

TEST_CASE("dataset invariants") {
  CHECK_THROWS_AS(Dataset(Matrix::Zero(3, 2), Vector::Zero(2), Role::kTrain), Error);
  CHECK_THROWS_AS(Dataset(Matrix::Zero(0, 2), Vector::Zero(0), Role::kTrain), Error);
  const Dataset d = make({{1}, {2}}, {0.5, 1});
  CHECK_THROWS_AS(d.require_labels(), Error);
  CHECK(parse_loss_kind("logistic") == LossKind::kLogistic);
  CHECK_THROWS_AS(parse_loss_kind("hinge"), Error);
}
