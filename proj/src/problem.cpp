#include "myhpo/problem.hpp"

#include <string>

#include "myhpo/error.hpp"

namespace myhpo {

namespace {

void check_split(const Dataset& data, Role expected, Eigen::Index d, LossKind kind) {
  if (data.role != expected) {
    throw Error(ErrorCode::kRoleMismatch, "expected a " + std::string(to_string(expected)) +
                                              " split, got " + std::string(to_string(data.role)));
  }
  if (data.dim() != d) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(to_string(expected)) + " split has " + std::to_string(data.dim()) +
                    " features, expected " + std::to_string(d));
  }
  if (kind == LossKind::kLogistic) data.require_labels();
}

}  // namespace

Problem::Problem(LossKind kind, Dataset train_split, Dataset val_split,
                 std::optional<Dataset> test_split)
    : loss(kind), train(std::move(train_split)), val(std::move(val_split)),
      test(std::move(test_split)) {
  const Eigen::Index d = train.dim();
  check_split(train, Role::kTrain, d, loss);
  check_split(val, Role::kValidation, d, loss);
  if (test) check_split(*test, Role::kTest, d, loss);
}

}  // namespace myhpo
