#include "myhpo/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>

#include "myhpo/error.hpp"
#include "myhpo/rng.hpp"

namespace myhpo {

namespace {

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset,
                        const std::string& path) {
  if (bytes.size() < offset + 4) {
    throw Error(ErrorCode::kTruncatedFile, "'" + path + "' ends inside the IDX header");
  }
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void write_be32(std::ostream& out, std::uint32_t value) {
  const char bytes[4] = {static_cast<char>(value >> 24), static_cast<char>(value >> 16),
                         static_cast<char>(value >> 8), static_cast<char>(value)};
  out.write(bytes, 4);
}

std::string hex(std::uint32_t value) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "0x%08x", value);
  return buf;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                          : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

Dataset gather(const RawTable& table, const std::vector<long>& rows, Role role) {
  Matrix x(static_cast<Eigen::Index>(rows.size()), table.features.cols());
  Vector y(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = table.features.row(rows[i]);
    y[static_cast<Eigen::Index>(i)] = table.targets[rows[i]];
  }
  return Dataset(std::move(x), std::move(y), role);
}

void shuffle(std::vector<long>& idx, Rng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(idx[i - 1], idx[j]);
  }
}

[[noreturn]] void infeasible(const std::string& why) {
  throw Error(ErrorCode::kInfeasibleSplit, why);
}

}  // namespace

RawTable load_idx(const std::string& images_path, const std::string& labels_path) {
  const std::vector<std::uint8_t> images = read_bytes(images_path);
  const std::vector<std::uint8_t> labels = read_bytes(labels_path);

  const std::uint32_t image_magic = read_be32(images, 0, images_path);
  if (image_magic != kIdxImagesMagic) {
    throw Error(ErrorCode::kBadMagic, "'" + images_path + "' has magic " + hex(image_magic) +
                                          ", expected " + hex(kIdxImagesMagic));
  }
  const std::uint32_t label_magic = read_be32(labels, 0, labels_path);
  if (label_magic != kIdxLabelsMagic) {
    throw Error(ErrorCode::kBadMagic, "'" + labels_path + "' has magic " + hex(label_magic) +
                                          ", expected " + hex(kIdxLabelsMagic));
  }

  const std::uint32_t count = read_be32(images, 4, images_path);
  const std::uint32_t rows = read_be32(images, 8, images_path);
  const std::uint32_t cols = read_be32(images, 12, images_path);
  const std::uint32_t label_count = read_be32(labels, 4, labels_path);
  if (count != label_count) {
    throw Error(ErrorCode::kCountMismatch, std::to_string(count) + " images but " +
                                               std::to_string(label_count) + " labels");
  }

  const std::size_t d = std::size_t{rows} * cols;
  const std::size_t image_bytes = 16 + std::size_t{count} * d;
  if (images.size() < image_bytes) {
    throw Error(ErrorCode::kTruncatedFile, "'" + images_path + "' holds " +
                                               std::to_string(images.size()) + " bytes, expected " +
                                               std::to_string(image_bytes));
  }
  if (labels.size() < 8 + std::size_t{count}) {
    throw Error(ErrorCode::kTruncatedFile, "'" + labels_path + "' is shorter than its count");
  }

  RawTable table;
  table.features.resize(count, static_cast<Eigen::Index>(d));
  table.targets.resize(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint8_t* px = images.data() + 16 + std::size_t{i} * d;
    for (std::size_t j = 0; j < d; ++j) {
      table.features(i, static_cast<Eigen::Index>(j)) = px[j] / 255.0;
    }
    table.targets[i] = labels[8 + i];
  }
  table.source = "idx:" + images_path;
  return table;
}

void write_idx(const std::string& images_path, const std::string& labels_path,
               const std::vector<std::uint8_t>& pixels, const std::vector<std::uint8_t>& labels,
               std::uint32_t rows, std::uint32_t cols) {
  const std::size_t d = std::size_t{rows} * cols;
  if (d == 0 || pixels.size() != labels.size() * d) {
    throw Error(ErrorCode::kCountMismatch, "pixel buffer does not match labels x rows x cols");
  }
  std::ofstream img(images_path, std::ios::binary);
  std::ofstream lab(labels_path, std::ios::binary);
  if (!img || !lab) throw Error(ErrorCode::kIoError, "cannot create IDX output files");
  write_be32(img, kIdxImagesMagic);
  write_be32(img, static_cast<std::uint32_t>(labels.size()));
  write_be32(img, rows);
  write_be32(img, cols);
  img.write(reinterpret_cast<const char*>(pixels.data()),
            static_cast<std::streamsize>(pixels.size()));
  write_be32(lab, kIdxLabelsMagic);
  write_be32(lab, static_cast<std::uint32_t>(labels.size()));
  lab.write(reinterpret_cast<const char*>(labels.data()),
            static_cast<std::streamsize>(labels.size()));
}

RawTable load_csv(const std::string& path, const std::string& target_column) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kParseError, "'" + path + "' is empty");
  const std::vector<std::string_view> header_views = split_commas(line);
  const std::vector<std::string> header(header_views.begin(), header_views.end());
  const auto target_it = std::find(header.begin(), header.end(), target_column);
  if (target_it == header.end()) {
    throw Error(ErrorCode::kParseError,
                "'" + path + "' line 1: no column named '" + target_column + "'");
  }
  const auto target = static_cast<std::size_t>(target_it - header.begin());

  std::vector<std::vector<double>> rows;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string_view> cells = split_commas(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::kParseError, "'" + path + "' line " + std::to_string(line_no) +
                                              ": expected " + std::to_string(header.size()) +
                                              " fields, found " + std::to_string(cells.size()));
    }
    std::vector<double> values(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string_view cell = cells[c];
      const char* first = cell.data();
      // from_chars rejects a leading '+', which is valid in numeric CSV.
      if (!cell.empty() && cell.front() == '+') ++first;
      auto [ptr, ec] = std::from_chars(first, cell.data() + cell.size(), values[c]);
      if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() ||
          !std::isfinite(values[c])) {
        throw Error(ErrorCode::kNonNumericCell, "'" + path + "' line " +
                                                    std::to_string(line_no) + ", column '" +
                                                    header[c] + "': '" + std::string(cell) + "'");
      }
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw Error(ErrorCode::kParseError, "'" + path + "' has no data rows");

  RawTable table;
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(header.size() - 1);
  table.features.resize(n, d);
  table.targets.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index col = 0;
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c == target) {
        table.targets[i] = rows[static_cast<std::size_t>(i)][c];
      } else {
        table.features(i, col++) = rows[static_cast<std::size_t>(i)][c];
      }
    }
  }
  table.source = "csv:" + path;
  return table;
}

RawTable make_classification(const RawTable& table, double class_a, double class_b) {
  if (class_a == class_b) {
    throw Error(ErrorCode::kInvalidClassPair, "class_a and class_b must differ");
  }
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < table.targets.size(); ++i) {
    if (table.targets[i] == class_a || table.targets[i] == class_b) keep.push_back(i);
  }
  if (keep.empty()) throw Error(ErrorCode::kEmptySelection, "no rows match either class");
  RawTable out;
  out.features.resize(static_cast<Eigen::Index>(keep.size()), table.features.cols());
  out.targets.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const auto r = static_cast<Eigen::Index>(k);
    out.features.row(r) = table.features.row(keep[k]);
    out.targets[r] = table.targets[keep[k]] == class_a ? 1.0 : -1.0;
  }
  std::ostringstream src;
  src << table.source << " [" << class_a << " vs " << class_b << "]";
  out.source = src.str();
  return out;
}

Splits split(const RawTable& table, const SplitSpec& spec) {
  const long n = static_cast<long>(table.rows());
  if (n < 3) infeasible("need at least 3 rows, have " + std::to_string(n));

  long n_train = 0;
  long n_val = 0;
  long n_test = 0;
  if (spec.use_counts) {
    n_train = spec.train_count;
    n_val = spec.val_count;
    n_test = spec.test_count > 0 ? spec.test_count : n - n_train - n_val;
    if (spec.test_count < 0) infeasible("test_count must be >= 0");
  } else {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) ||
        !(spec.val_fraction > 0.0 && spec.val_fraction < 1.0) ||
        !(spec.train_fraction + spec.val_fraction < 1.0)) {
      infeasible("fractions must lie in (0,1) with train + val < 1");
    }
    n_train = std::lround(static_cast<double>(n) * spec.train_fraction);
    n_val = std::lround(static_cast<double>(n) * spec.val_fraction);
    n_test = n - n_train - n_val;
  }
  if (n_train < 1 || n_val < 1 || n_test < 1 || n_train + n_val + n_test > n) {
    infeasible("sizes " + std::to_string(n_train) + "/" + std::to_string(n_val) + "/" +
               std::to_string(n_test) + " do not fit " + std::to_string(n) + " rows");
  }

  Rng rng(spec.seed);
  Splits out;
  if (!spec.stratified) {
    std::vector<long> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0L);
    shuffle(idx, rng);
    auto it = idx.begin();
    out.train_rows.assign(it, it + n_train);
    it += n_train;
    out.val_rows.assign(it, it + n_val);
    it += n_val;
    out.test_rows.assign(it, it + n_test);
  } else {
    std::vector<long> pos;
    std::vector<long> neg;
    for (long i = 0; i < n; ++i) {
      const double t = table.targets[i];
      if (t == 1.0) pos.push_back(i);
      else if (t == -1.0) neg.push_back(i);
      else infeasible("stratified split needs +/-1 targets");
    }
    shuffle(pos, rng);
    shuffle(neg, rng);
    std::size_t p = 0;
    std::size_t q = 0;
    // Each split takes ceil(k/2) positives and floor(k/2) negatives; a
    // remainder test split takes whatever is left.
    auto take = [&](long k, std::vector<long>& dst) {
      const auto want_pos = static_cast<std::size_t>((k + 1) / 2);
      const auto want_neg = static_cast<std::size_t>(k / 2);
      if (p + want_pos > pos.size() || q + want_neg > neg.size()) {
        infeasible("not enough rows per class for a balanced split of " + std::to_string(k));
      }
      dst.insert(dst.end(), pos.begin() + static_cast<long>(p),
                 pos.begin() + static_cast<long>(p + want_pos));
      dst.insert(dst.end(), neg.begin() + static_cast<long>(q),
                 neg.begin() + static_cast<long>(q + want_neg));
      p += want_pos;
      q += want_neg;
      std::sort(dst.begin(), dst.end());
    };
    take(n_train, out.train_rows);
    take(n_val, out.val_rows);
    const bool remainder = !spec.use_counts || spec.test_count == 0;
    if (remainder) {
      out.test_rows.insert(out.test_rows.end(), pos.begin() + static_cast<long>(p), pos.end());
      out.test_rows.insert(out.test_rows.end(), neg.begin() + static_cast<long>(q), neg.end());
      std::sort(out.test_rows.begin(), out.test_rows.end());
    } else {
      take(n_test, out.test_rows);
    }
  }
  out.train = gather(table, out.train_rows, Role::kTrain);
  out.val = gather(table, out.val_rows, Role::kValidation);
  out.test = gather(table, out.test_rows, Role::kTest);
  return out;
}

RawTable synthesize(const SyntheticSpec& spec) {
  if (spec.n < 1 || spec.d < 1 || !(spec.kappa >= 1.0) || !(spec.noise_std >= 0.0) ||
      !(spec.scale > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic spec needs n, d >= 1, kappa >= 1, "
                                             "noise_std >= 0, scale > 0");
  }
  Rng rng(spec.seed);
  const Eigen::Index n = spec.n;
  const Eigen::Index d = spec.d;
  const Eigen::Index r = std::min(n, d);  // rank; r < d is rank deficient

  auto gaussian = [&](Eigen::Index rows, Eigen::Index cols) {
    Matrix g(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) g(i, j) = rng.normal();
    return g;
  };
  const Matrix gu = gaussian(n, r);
  const Matrix gv = gaussian(d, r);
  const Matrix u = Eigen::HouseholderQR<Matrix>(gu).householderQ() * Matrix::Identity(n, r);
  const Matrix v = Eigen::HouseholderQR<Matrix>(gv).householderQ() * Matrix::Identity(d, r);

  Vector sigma(r);
  for (Eigen::Index j = 0; j < r; ++j) {
    const double exponent = r > 1 ? -static_cast<double>(j) / static_cast<double>(r - 1) : 0.0;
    sigma[j] = spec.scale * std::pow(spec.kappa, exponent);
  }

  RawTable table;
  table.features = u * sigma.asDiagonal() * v.transpose();
  Vector w_star(d);
  for (Eigen::Index j = 0; j < d; ++j) w_star[j] = rng.normal();
  Vector noise(n);
  for (Eigen::Index i = 0; i < n; ++i) noise[i] = rng.normal();
  table.targets = table.features * w_star + spec.noise_std * noise;
  std::ostringstream src;
  src << "synthetic:n=" << spec.n << ",d=" << spec.d << ",kappa=" << spec.kappa
      << ",noise_std=" << spec.noise_std << ",scale=" << spec.scale << ",seed=" << spec.seed;
  table.source = src.str();
  return table;
}

RawTable append_ones(const RawTable& table) {
  RawTable out = table;
  out.features.conservativeResize(Eigen::NoChange, table.features.cols() + 1);
  out.features.col(table.features.cols()).setOnes();
  out.source = table.source + " +ones";
  return out;
}

double population_variance(const Vector& y) {
  if (y.size() == 0) return 0.0;
  return (y.array() - y.mean()).square().mean();
}

double normalize_regression_report(double loss, const Vector& y) {
  const double var = population_variance(y);
  if (!(var > 0.0)) throw Error(ErrorCode::kZeroVariance, "targets are constant");
  return loss / var;
}

}  // namespace myhpo
