#pragma once

#include <optional>

#include "myhpo/model.hpp"

namespace myhpo {

// Loss kind plus the three partitions a solver run sees. The test split is
// optional; when absent the trace leaves its column empty.
struct Problem {
  LossKind loss = LossKind::kLeastSquares;
  Dataset train;
  Dataset val;
  std::optional<Dataset> test;

  Problem() = default;
  Problem(LossKind kind, Dataset train_split, Dataset val_split,
          std::optional<Dataset> test_split = std::nullopt);

  Eigen::Index dim() const { return train.dim(); }
};

}  // namespace myhpo
