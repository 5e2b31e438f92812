#include "elmpi/datakit.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>

#include "elmpi/random.hpp"

namespace elmpi {

double mean_value(MeanFunction f, double x) {
  switch (f) {
    case MeanFunction::xsinx: return x * std::sin(x);
  }
  return 0.0;
}

double noise_sigma(const GeneratorSpec& spec, double x) {
  switch (spec.noise) {
    case NoiseModel::constant: return spec.noise_level;
    case NoiseModel::quadratic_ramp: return 0.5 + 0.02 * x * x;
  }
  return 0.0;
}

std::pair<Dataset, SynthTruth> synth_with_truth(const GeneratorSpec& spec) {
  if (!(spec.x_lo < spec.x_hi))
    throw ConfigError("synth: x_lo must be below x_hi");
  if (spec.n < 1) throw ConfigError("synth: n must be >= 1");
  if (spec.noise == NoiseModel::constant && spec.noise_level < 0.0)
    throw ConfigError("synth: constant noise level must be >= 0");

  Dataset data;
  data.x.resize(spec.n, 1);
  data.y.resize(spec.n);
  SynthTruth truth{Vector(spec.n), Vector(spec.n)};
  SeededRng rng(spec.seed);
  for (Index i = 0; i < spec.n; ++i) {
    double x = rng.uniform(spec.x_lo, spec.x_hi);
    double f = mean_value(spec.f, x);
    double sigma = noise_sigma(spec, x);
    data.x(i, 0) = x;
    data.y(i) = f + sigma * rng.normal();
    truth.f_true(i) = f;
    truth.sigma_true(i) = sigma;
  }
  return {std::move(data), std::move(truth)};
}

Dataset synth(const GeneratorSpec& spec) { return synth_with_truth(spec).first; }

namespace {

constexpr double kSkinSignal = 1.5;
constexpr double kSkinMargin0 = 0.2;
constexpr double kSkinMarginSlope = 2.8;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}
// Antiderivative of Φ: G'(u) = Φ(u).
double phi_antiderivative(double u) { return u * normal_cdf(u) + normal_pdf(u); }

}  // namespace

Dataset synth_skinlike(Index n, Index d_features, std::uint64_t seed,
                       double overlap) {
  if (n < 2 || n % 2 != 0) throw ConfigError("synth_skinlike: n must be even");
  if (d_features < 2) throw ConfigError("synth_skinlike: d_features must be >= 2");
  if (overlap < 0.0) throw ConfigError("synth_skinlike: overlap must be >= 0");

  Dataset data;
  data.task = Task::binary;
  data.x.resize(n, d_features);
  data.y.resize(n);
  SeededRng rng(seed);
  std::vector<Index> order = seeded_permutation(n, mix_seed(seed, 1));
  for (Index i = 0; i < n; ++i) {
    Index row = order[static_cast<std::size_t>(i)];
    double label = i < n / 2 ? 1.0 : -1.0;
    double t = rng.uniform01();
    double sigma1 = kSkinSignal / (kSkinMargin0 + kSkinMarginSlope * t);
    data.x(row, 0) = label * kSkinSignal + overlap * sigma1 * rng.normal();
    data.x(row, 1) = t;
    for (Index j = 2; j < d_features; ++j) data.x(row, j) = rng.normal();
    data.y(row) = label;
  }
  return data;
}

double skinlike_bayes_accuracy(double overlap) {
  if (overlap <= 0.0) return 1.0;
  // Error = ∫₀¹ Φ(−m(t)/overlap) dt with margin m(t) = 0.2 + 2.8t.
  const double a = kSkinMargin0 / overlap;
  const double b = (kSkinMargin0 + kSkinMarginSlope) / overlap;
  double err = (overlap / kSkinMarginSlope) *
               (phi_antiderivative(-a) - phi_antiderivative(-b));
  return 1.0 - err;
}

std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction,
                                  std::uint64_t seed) {
  const Index n = data.x.rows();
  Index n_train =
      static_cast<Index>(std::floor(static_cast<double>(n) * train_fraction));
  if (n_train < 1 || n_train >= n)
    throw ConfigError("split: degenerate train fraction");
  std::vector<Index> perm = seeded_permutation(n, seed);

  auto take = [&](Index offset, Index count) {
    Dataset part;
    part.task = data.task;
    part.feature_names = data.feature_names;
    part.x.resize(count, data.x.cols());
    part.y.resize(count);
    for (Index i = 0; i < count; ++i) {
      Index row = perm[static_cast<std::size_t>(offset + i)];
      part.x.row(i) = data.x.row(row);
      part.y(i) = data.y(row);
    }
    return part;
  };
  return {take(0, n_train), take(n_train, n - n_train)};
}

StandardizationParams fit_standardizer(const Eigen::Ref<const Matrix>& x) {
  if (x.rows() < 1) throw DataError("fit_standardizer: empty data");
  StandardizationParams params;
  params.mean = x.colwise().mean();
  Vector var = (x.rowwise() - params.mean.transpose())
                   .array()
                   .square()
                   .colwise()
                   .mean();
  params.stddev = var.array().sqrt();
  params.constant_flag.assign(static_cast<std::size_t>(x.cols()), 0);
  for (Index j = 0; j < x.cols(); ++j) {
    if (!(params.stddev(j) > 0.0)) {
      params.stddev(j) = 1.0;
      params.constant_flag[static_cast<std::size_t>(j)] = 1;
    }
  }
  return params;
}

Matrix apply_standardizer(const StandardizationParams& params,
                          const Eigen::Ref<const Matrix>& x) {
  if (x.cols() != params.mean.size())
    throw ShapeError("apply_standardizer: column count mismatch");
  return ((x.rowwise() - params.mean.transpose()).array().rowwise() /
          params.stddev.transpose().array())
      .matrix();
}

Matrix unapply_standardizer(const StandardizationParams& params,
                            const Eigen::Ref<const Matrix>& x) {
  if (x.cols() != params.mean.size())
    throw ShapeError("unapply_standardizer: column count mismatch");
  return ((x.array().rowwise() * params.stddev.transpose().array()).matrix()
              .rowwise() +
          params.mean.transpose());
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    std::string field = line.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    while (!field.empty() && (field.back() == '\r' || field.back() == ' '))
      field.pop_back();
    std::size_t head = field.find_first_not_of(' ');
    fields.push_back(head == std::string::npos ? std::string() : field.substr(head));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

double parse_cell(const std::string& cell, Index row, Index col) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc{} || ptr != cell.data() + cell.size())
    throw ParseError("load_csv: non-numeric cell at row " + std::to_string(row) +
                     ", column " + std::to_string(col) + ": '" + cell + "'");
  return value;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& target_column,
                 bool has_header) {
  std::ifstream in(path);
  if (!in) throw IoError("load_csv: cannot open '" + path + "'");

  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    lines.push_back(line);
  }
  if (lines.empty()) throw DataError("load_csv: '" + path + "' has no rows");

  std::vector<std::string> header;
  std::size_t first_data = 0;
  if (has_header) {
    header = split_fields(lines[0]);
    first_data = 1;
    if (lines.size() == first_data)
      throw DataError("load_csv: '" + path + "' has a header but no data rows");
  }
  const Index n_cols = static_cast<Index>(split_fields(lines[first_data]).size());

  Index target = n_cols - 1;
  if (!target_column.empty()) {
    auto named = std::find(header.begin(), header.end(), target_column);
    if (named != header.end()) {
      target = static_cast<Index>(named - header.begin());
    } else {
      Index idx = 0;
      auto [ptr, ec] = std::from_chars(
          target_column.data(), target_column.data() + target_column.size(), idx);
      if (ec != std::errc{} || ptr != target_column.data() + target_column.size() ||
          idx < 0 || idx >= n_cols)
        throw ConfigError("load_csv: target column '" + target_column +
                          "' not found in '" + path + "'");
      target = idx;
    }
  }

  const Index n_rows = static_cast<Index>(lines.size() - first_data);
  Dataset data;
  data.x.resize(n_rows, n_cols - 1);
  data.y.resize(n_rows);
  for (Index col = 0; col < n_cols; ++col) {
    if (col == target) continue;
    if (!header.empty())
      data.feature_names.push_back(header[static_cast<std::size_t>(col)]);
  }
  for (Index i = 0; i < n_rows; ++i) {
    std::vector<std::string> cells = lines[first_data + static_cast<std::size_t>(i)].empty()
                                         ? std::vector<std::string>{}
                                         : split_fields(lines[first_data + static_cast<std::size_t>(i)]);
    if (static_cast<Index>(cells.size()) != n_cols)
      throw ParseError("load_csv: row " + std::to_string(i + 1) + " has " +
                       std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(n_cols));
    Index feature = 0;
    for (Index col = 0; col < n_cols; ++col) {
      double value = parse_cell(cells[static_cast<std::size_t>(col)], i + 1, col + 1);
      if (col == target)
        data.y(i) = value;
      else
        data.x(i, feature++) = value;
    }
  }
  return data;
}

}  // namespace elmpi
