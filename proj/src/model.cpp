#include "myhpo/model.hpp"

#include <cmath>
#include <string>

#include "myhpo/error.hpp"

namespace myhpo {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::kTrain:
      return "train";
    case Role::kValidation:
      return "validation";
    case Role::kTest:
      return "test";
  }
  return "unknown";
}

std::string_view to_string(LossKind kind) {
  return kind == LossKind::kLeastSquares ? "least_squares" : "logistic";
}

LossKind parse_loss_kind(std::string_view name) {
  if (name == "least_squares") return LossKind::kLeastSquares;
  if (name == "logistic") return LossKind::kLogistic;
  throw Error(ErrorCode::kInvalidArgument, "unknown loss kind '" + std::string(name) + "'");
}

Dataset::Dataset(Matrix features, Vector targets, Role r)
    : X(std::move(features)), y(std::move(targets)), role(r) {
  if (X.rows() != y.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "X has " + std::to_string(X.rows()) + " rows but y has " +
                    std::to_string(y.size()) + " entries");
  }
  if (X.rows() == 0 || X.cols() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "dataset must have N > 0 and d > 0");
  }
}

void Dataset::require_labels() const {
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] != 1.0 && y[i] != -1.0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "classification target at row " + std::to_string(i) + " is not +/-1");
    }
  }
}

namespace {

void check_dims(const Vector& w, const Dataset& data) {
  if (w.size() != data.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "weight length " + std::to_string(w.size()) + " vs feature dimension " +
                    std::to_string(data.dim()));
  }
}

void check_role_train(const Dataset& data) {
  if (data.role != Role::kTrain) {
    throw Error(ErrorCode::kRoleMismatch,
                "training loss evaluated on a " + std::string(to_string(data.role)) + " split");
  }
}

void check_role_heldout(const Dataset& data) {
  if (data.role == Role::kTrain) {
    throw Error(ErrorCode::kRoleMismatch, "validation loss evaluated on the training split");
  }
}

}  // namespace

double log1p_exp_neg(double z) {
  // log(1 + e^{-z}) = max(0, -z) + log1p(e^{-|z|})
  return std::log1p(std::exp(-std::abs(z))) + std::max(0.0, -z);
}

double sigmoid_neg(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

Vector best_response(const BestResponse& br, double lambda) {
  Vector w(br.phi1.size());
  for (Eigen::Index j = 0; j < w.size(); ++j) w[j] = std::fma(lambda, br.phi1[j], br.phi0[j]);
  return w;
}

BestResponse split_best_response(const Vector& v, double lambda) {
  if (!(std::abs(lambda) > kSplitFloor)) {
    throw Error(ErrorCode::kSplitDegenerate,
                "cannot split with |lambda| = " + std::to_string(std::abs(lambda)));
  }
  const double mean = v.size() > 0 ? v.mean() : 0.0;
  BestResponse br{(v.array() - mean) / lambda, Vector::Constant(v.size(), mean)};
  // Two rounds of residual correction pull lambda*phi1 + phi0 back onto v
  // where the deviation carries fewer significant bits than v itself.
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index j = 0; j < v.size(); ++j) {
      const double residual = v[j] - std::fma(lambda, br.phi1[j], mean);
      if (residual != 0.0) br.phi1[j] += residual / lambda;
    }
  }
  return br;
}

double data_fit(LossKind kind, const Vector& w, const Dataset& data) {
  check_dims(w, data);
  const double n = static_cast<double>(data.samples());
  const Vector z = data.X * w;
  if (kind == LossKind::kLeastSquares) return (data.y - z).squaredNorm() / (2.0 * n);
  double total = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) total += log1p_exp_neg(data.y[i] * z[i]);
  return total / n;
}

Vector grad_data_fit(LossKind kind, const Vector& w, const Dataset& data) {
  check_dims(w, data);
  const double n = static_cast<double>(data.samples());
  const Vector z = data.X * w;
  if (kind == LossKind::kLeastSquares) return data.X.transpose() * (z - data.y) / n;
  Vector coef(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    coef[i] = -data.y[i] * sigmoid_neg(data.y[i] * z[i]);
  }
  return data.X.transpose() * coef / n;
}

double curvature_data_fit(LossKind kind, const Vector& w, const Vector& direction,
                          const Dataset& data) {
  check_dims(w, data);
  check_dims(direction, data);
  const double n = static_cast<double>(data.samples());
  const Vector xd = data.X * direction;
  if (kind == LossKind::kLeastSquares) return xd.squaredNorm() / n;
  const Vector z = data.X * w;
  double total = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double m = data.y[i] * z[i];
    total += sigmoid_neg(m) * sigmoid_neg(-m) * xd[i] * xd[i];
  }
  return total / n;
}

double train_loss(LossKind kind, const Vector& w, double lambda, const Dataset& data) {
  check_role_train(data);
  return data_fit(kind, w, data) + std::exp(lambda) * w.squaredNorm();
}

double val_loss(LossKind kind, const Vector& w, const Dataset& data) {
  check_role_heldout(data);
  return data_fit(kind, w, data);
}

Vector grad_w_train(LossKind kind, const Vector& w, double lambda, const Dataset& data) {
  check_role_train(data);
  return grad_data_fit(kind, w, data) + 2.0 * std::exp(lambda) * w;
}

Vector grad_w_val(LossKind kind, const Vector& w, const Dataset& data) {
  check_role_heldout(data);
  return grad_data_fit(kind, w, data);
}

double grad_lambda_val(LossKind kind, const BestResponse& br, double lambda,
                       const Dataset& data) {
  if (data.role != Role::kValidation) {
    throw Error(ErrorCode::kRoleMismatch, "hypergradient requires the validation split");
  }
  return br.phi1.dot(grad_w_val(kind, best_response(br, lambda), data));
}

double grad_lambda_train(const Vector& w, double lambda) {
  return std::exp(lambda) * w.squaredNorm();
}

}  // namespace myhpo
