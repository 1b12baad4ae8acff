#pragma once

#include <Eigen/Dense>
#include <string_view>

namespace myhpo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Role { kTrain, kValidation, kTest };
enum class LossKind { kLeastSquares, kLogistic };

std::string_view to_string(Role role);
std::string_view to_string(LossKind kind);
LossKind parse_loss_kind(std::string_view name);

// Below this magnitude the hypernetwork split divides by (almost) zero.
inline constexpr double kSplitFloor = 1e-12;

// A feature matrix with its targets and the partition it belongs to.
struct Dataset {
  Matrix X;
  Vector y;
  Role role = Role::kTrain;

  Dataset() = default;
  // Throws DimensionMismatch / InvalidArgument when the invariants fail.
  Dataset(Matrix features, Vector targets, Role r);

  Eigen::Index samples() const { return X.rows(); }
  Eigen::Index dim() const { return X.cols(); }

  // Classification targets must be exactly -1 or +1.
  void require_labels() const;
};

// Affine hypernetwork: w(lambda) = lambda * phi1 + phi0.
struct BestResponse {
  Vector phi1;
  Vector phi0;

  static BestResponse zeros(Eigen::Index d) {
    return {Vector::Zero(d), Vector::Zero(d)};
  }
  Eigen::Index dim() const { return phi1.size(); }
};

Vector best_response(const BestResponse& br, double lambda);

// Splits v into the mean (phi0, constant across components) and the
// deviation scaled by 1/lambda (phi1). Throws SplitDegenerate when
// |lambda| <= kSplitFloor.
BestResponse split_best_response(const Vector& v, double lambda);

// Empirical loss without regularizer: mean squared residual / 2 or mean
// logistic loss. Role is not checked; use it for reporting on any split.
double data_fit(LossKind kind, const Vector& w, const Dataset& data);
Vector grad_data_fit(LossKind kind, const Vector& w, const Dataset& data);

// Directional curvature d^T H d of data_fit at w.
double curvature_data_fit(LossKind kind, const Vector& w, const Vector& direction,
                          const Dataset& data);

double train_loss(LossKind kind, const Vector& w, double lambda, const Dataset& data);
double val_loss(LossKind kind, const Vector& w, const Dataset& data);

Vector grad_w_train(LossKind kind, const Vector& w, double lambda, const Dataset& data);
Vector grad_w_val(LossKind kind, const Vector& w, const Dataset& data);

// phi1^T grad_w L_V evaluated at w = best_response(br, lambda).
double grad_lambda_val(LossKind kind, const BestResponse& br, double lambda,
                       const Dataset& data);

// d/dlambda of the regularizer e^lambda ||w||^2.
double grad_lambda_train(const Vector& w, double lambda);

// log(1 + exp(-z)) without overflow.
double log1p_exp_neg(double z);
// 1 / (1 + exp(z)), i.e. sigmoid(-z), without overflow.
double sigmoid_neg(double z);

}  // namespace myhpo
