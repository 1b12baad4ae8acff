#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "myhpo/datasets.hpp"
#include "myhpo/error.hpp"

using namespace myhpo;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "myhpo_test_datasets";
  fs::create_directories(dir);
  return dir / name;
}

void write_bytes(const fs::path& p, const std::vector<unsigned char>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::kIoError;
}

RawTable labelled(int n_pos, int n_neg) {
  RawTable t;
  t.features = Matrix(n_pos + n_neg, 2);
  t.targets = Vector(n_pos + n_neg);
  for (int i = 0; i < n_pos + n_neg; ++i) {
    t.features(i, 0) = i;
    t.features(i, 1) = -i;
    t.targets(i) = i < n_pos ? 1.0 : -1.0;
  }
  return t;
}

double cond(const Matrix& x) {
  const Vector s = Eigen::JacobiSVD<Matrix>(x).singularValues();
  return s(0) / s(s.size() - 1);
}

}  // namespace

TEST_CASE("idx fixture") {
  const fs::path img = scratch("one.idx3"), lab = scratch("one.idx1");
  write_bytes(img, {0, 0, 8, 3, 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0, 2, 0, 128, 255, 64});
  write_bytes(lab, {0, 0, 8, 1, 0, 0, 0, 1, 7});
  const RawTable t = load_idx(img.string(), lab.string());
  REQUIRE(t.rows() == 1);
  REQUIRE(t.features.cols() == 4);
  CHECK(t.features(0, 0) == 0.0);
  CHECK(t.features(0, 1) == 128.0 / 255.0);
  CHECK(t.features(0, 2) == 1.0);
  CHECK(t.features(0, 3) == 64.0 / 255.0);
  CHECK(t.targets(0) == 7.0);

  CHECK(code_of([&] { load_idx(img.string(), img.string()); }) == ErrorCode::kBadMagic);
  const fs::path trunc = scratch("trunc.idx3");
  write_bytes(trunc, {0, 0, 8, 3, 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0, 2, 0, 128});
  CHECK(code_of([&] { load_idx(trunc.string(), lab.string()); }) == ErrorCode::kTruncatedFile);
}

TEST_CASE("idx count mismatch and round trip") {
  const fs::path img = scratch("two.idx3"), lab = scratch("three.idx1");
  const std::vector<std::uint8_t> pixels = {1, 2, 3, 4, 250, 251, 252, 253};
  write_idx(img.string(), lab.string(), pixels, {0, 1}, 2, 2);
  const RawTable t = load_idx(img.string(), lab.string());
  REQUIRE(t.rows() == 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 4; ++j) CHECK(std::lround(t.features(i, j) * 255.0) == pixels[4 * i + j]);

  write_bytes(lab, {0, 0, 8, 1, 0, 0, 0, 3, 0, 1, 0});
  CHECK(code_of([&] { load_idx(img.string(), lab.string()); }) == ErrorCode::kCountMismatch);
}

TEST_CASE("csv parsing") {
  const fs::path p = scratch("three.csv");
  write_text(p, "a,b,y\n1,2,3\n4,5,6\n7,8,9\n");
  const RawTable t = load_csv(p.string(), "y");
  Matrix x(3, 2);
  x << 1, 2, 4, 5, 7, 8;
  CHECK(t.features == x);
  CHECK(t.targets == Eigen::Vector3d(3, 6, 9));
  CHECK(code_of([&] { load_csv(p.string(), "z"); }) == ErrorCode::kParseError);

  const fs::path bad = scratch("bad.csv");
  write_text(bad, "a,y\n1,2\nabc,3\n");
  try {
    load_csv(bad.string(), "y");
    FAIL("expected NonNumericCell");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNonNumericCell);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  const fs::path ragged = scratch("ragged.csv");
  write_text(ragged, "a,y\n1,2\n3\n");
  CHECK(code_of([&] { load_csv(ragged.string(), "y"); }) == ErrorCode::kParseError);
}

TEST_CASE("class selection") {
  RawTable t;
  t.features = Matrix(4, 1);
  t.features << 10, 20, 30, 40;
  t.targets = Vector(4);
  t.targets << 0, 1, 2, 0;
  const RawTable c = make_classification(t, 0, 1);
  REQUIRE(c.rows() == 3);
  CHECK(c.features == Eigen::Vector3d(10, 20, 40));
  CHECK(c.targets == Eigen::Vector3d(1, -1, 1));
  CHECK(code_of([&] { make_classification(t, 5, 6); }) == ErrorCode::kEmptySelection);
  CHECK(code_of([&] { make_classification(t, 1, 1); }) == ErrorCode::kInvalidClassPair);
}

TEST_CASE("split sizes and partition") {
  RawTable t;
  t.features = Matrix::Zero(68, 1);
  t.targets = Vector::Zero(68);
  for (int i = 0; i < 68; ++i) t.features(i, 0) = i;
  SplitSpec s;
  s.train_fraction = 0.5;
  s.val_fraction = 0.25;
  s.seed = 3;
  const Splits a = split(t, s);
  CHECK(a.train.samples() == 34);
  CHECK(a.val.samples() == 17);
  CHECK(a.test.samples() == 17);
  std::set<long> seen;
  for (const auto* rows : {&a.train_rows, &a.val_rows, &a.test_rows})
    for (long r : *rows) CHECK(seen.insert(r).second);
  CHECK(seen.size() == 68);
  for (std::size_t i = 0; i < a.train_rows.size(); ++i)
    CHECK(a.train.X(long(i), 0) == double(a.train_rows[i]));

  const Splits b = split(t, s);
  CHECK(a.train_rows == b.train_rows);
  CHECK(a.test_rows == b.test_rows);
  s.seed = 4;
  CHECK(split(t, s).train_rows != a.train_rows);

  SplitSpec c;
  c.use_counts = true;
  c.train_count = 60;
  c.val_count = 10;
  c.test_count = 1;
  CHECK(code_of([&] { split(t, c); }) == ErrorCode::kInfeasibleSplit);
}

TEST_CASE("stratified splits are balanced") {
  const RawTable t = labelled(40, 40);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SplitSpec s;
    s.use_counts = true;
    s.train_count = 20;
    s.val_count = 20;
    s.test_count = 40;
    s.stratified = true;
    s.seed = seed;
    const Splits sp = split(t, s);
    for (const Dataset* d : {&sp.train, &sp.val, &sp.test}) {
      CHECK(d->y.sum() == 0.0);
      CHECK(d->samples() % 2 == 0);
    }
  }
}

TEST_CASE("synthetic spectrum") {
  SyntheticSpec s;
  s.kappa = 1.0;
  s.noise_std = 0.0;
  RawTable t = synthesize(s);
  CHECK(std::abs(cond(t.features) - 1.0) <= 1e-10);

  s.kappa = 1e4;
  s.seed = 8;
  t = synthesize(s);
  CHECK(std::abs(cond(t.features) / 1e4 - 1.0) <= 0.01);
  const Vector sv = Eigen::JacobiSVD<Matrix>(t.features).singularValues();
  for (long j = 0; j < s.d; ++j)
    CHECK(std::abs(sv(j) - std::pow(s.kappa, -double(j) / double(s.d - 1))) <= 1e-10);

  const RawTable again = synthesize(s);
  CHECK(again.features == t.features);
  CHECK(again.targets == t.targets);

  // Noise-free targets lie in the column space.
  s.noise_std = 0.0;
  t = synthesize(s);
  const Vector w = t.features.colPivHouseholderQr().solve(t.targets);
  CHECK((t.features * w - t.targets).norm() <= 1e-8 * t.targets.norm());
}

TEST_CASE("regression normalization") {
  CHECK(normalize_regression_report(0.5, Eigen::Vector2d(0, 2)) == 0.5);
  CHECK(population_variance(Eigen::Vector2d(0, 2)) == 1.0);
  CHECK(code_of([] { normalize_regression_report(1.0, Eigen::Vector3d(4, 4, 4)); }) ==
        ErrorCode::kZeroVariance);
}

TEST_CASE("append ones") {
  const RawTable t = append_ones(labelled(2, 1));
  CHECK(t.features.cols() == 3);
  CHECK(t.features.col(2) == Vector::Ones(3));
}
