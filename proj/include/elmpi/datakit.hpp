#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "elmpi/core_linalg.hpp"

namespace elmpi {

enum class Task { regression, binary };

struct Dataset {
  Matrix x;
  Vector y;
  std::vector<std::string> feature_names;  // optional; empty when unnamed
  Task task = Task::regression;
};

enum class MeanFunction { xsinx };  // f(x) = x·sin(x)

enum class NoiseModel {
  constant,        // σ(x) = noise_level
  quadratic_ramp,  // σ(x) = 0.5 + 0.02·x²  (≈5× variation over [0,10])
};

struct GeneratorSpec {
  MeanFunction f = MeanFunction::xsinx;
  NoiseModel noise = NoiseModel::quadratic_ramp;
  double noise_level = 1.0;  // σ for constant noise; ignored by the ramp
  double x_lo = 0.0;
  double x_hi = 10.0;
  Index n = 1000;
  std::uint64_t seed = 0;
};

double mean_value(MeanFunction f, double x);
double noise_sigma(const GeneratorSpec& spec, double x);

/// Per-sample ground truth of a synthetic draw. Kept out of Dataset so
/// training paths cannot reach it.
struct SynthTruth {
  Vector f_true;
  Vector sigma_true;
};

/// y_i = f(x_i) + σ(x_i)·z_i with x_i ~ U(x_lo, x_hi), z_i standard normal.
Dataset synth(const GeneratorSpec& spec);
std::pair<Dataset, SynthTruth> synth_with_truth(const GeneratorSpec& spec);

/// Binary task with input-dependent class overlap. Feature 0 carries the
/// class signal s·1.5 + overlap·σ₁(t)·z with σ₁(t) = 1.5/(0.2 + 2.8t) and
/// t = feature 1 ~ U(0,1); remaining features are N(0,1) noise. Labels ±1,
/// exactly n/2 each. overlap = 0 makes the classes linearly separable.
Dataset synth_skinlike(Index n, Index d_features, std::uint64_t seed,
                       double overlap = 1.0);

/// Closed-form accuracy of the Bayes rule sign(x₁) for synth_skinlike.
double skinlike_bayes_accuracy(double overlap = 1.0);

/// Seeded exhaustive split; the training side gets floor(N·train_fraction)
/// rows (first entries of the permutation after the test block).
std::pair<Dataset, Dataset> split(const Dataset& data, double train_fraction,
                                  std::uint64_t seed);

struct StandardizationParams {
  Vector mean;
  Vector stddev;                           // constant features get 1
  std::vector<std::uint8_t> constant_flag;  // 1 where stddev was degenerate
};

StandardizationParams fit_standardizer(const Eigen::Ref<const Matrix>& x);
Matrix apply_standardizer(const StandardizationParams& params,
                          const Eigen::Ref<const Matrix>& x);
Matrix unapply_standardizer(const StandardizationParams& params,
                            const Eigen::Ref<const Matrix>& x);

/// Comma-separated numeric file, optional single header row, no quoting.
/// target_column names a header column, or is a 0-based index; "" selects
/// the last column.
Dataset load_csv(const std::string& path, const std::string& target_column = "",
                 bool has_header = true);

}  // namespace elmpi
