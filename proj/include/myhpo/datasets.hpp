#pragma once

#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include "myhpo/model.hpp"

namespace myhpo {

struct RawTable {
  Matrix features;
  Vector targets;
  std::string source;

  Eigen::Index rows() const { return features.rows(); }
};

// Either fractions (test gets the remainder) or explicit counts. A zero
// test_count with counts means "all remaining rows".
struct SplitSpec {
  double train_fraction = 0.5;
  double val_fraction = 0.25;
  bool use_counts = false;
  long train_count = 0;
  long val_count = 0;
  long test_count = 0;
  std::uint64_t seed = 0;
  bool stratified = false;
};

struct SyntheticSpec {
  long n = 60;
  long d = 50;
  double kappa = 1e4;
  double noise_std = 0.1;
  // Multiplies every singular value; 1 keeps the largest at exactly 1.
  double scale = 1.0;
  std::uint64_t seed = 0;
};

struct Splits {
  Dataset train;
  Dataset val;
  Dataset test;
  // Row indices into the source table, in split order.
  std::vector<long> train_rows;
  std::vector<long> val_rows;
  std::vector<long> test_rows;
};

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

// Big-endian IDX pair. Pixels are flattened row-major and divided by 255.
RawTable load_idx(const std::string& images_path, const std::string& labels_path);

// Writes unsigned-byte IDX files; `pixels` holds count*rows*cols bytes.
void write_idx(const std::string& images_path, const std::string& labels_path,
               const std::vector<std::uint8_t>& pixels, const std::vector<std::uint8_t>& labels,
               std::uint32_t rows, std::uint32_t cols);

// Numeric CSV with a mandatory header row.
RawTable load_csv(const std::string& path, const std::string& target_column);

// Keeps rows labelled class_a (-> +1) or class_b (-> -1), order preserved.
RawTable make_classification(const RawTable& table, double class_a, double class_b);

Splits split(const RawTable& table, const SplitSpec& spec);

// X = scale * U diag(sigma) V^T with sigma_j = kappa^(-(j-1)/(d-1)); y = X w* + noise.
RawTable synthesize(const SyntheticSpec& spec);

// Appends a constant-one feature column.
RawTable append_ones(const RawTable& table);

double population_variance(const Vector& y);

// loss / population-variance(y); throws ZeroVariance for constant y.
double normalize_regression_report(double loss, const Vector& y);

}  // namespace myhpo
