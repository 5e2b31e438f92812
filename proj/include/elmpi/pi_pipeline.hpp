#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "elmpi/datakit.hpp"
#include "elmpi/elm.hpp"
#include "elmpi/jackknife.hpp"

namespace elmpi {

struct PiConfig {
  std::vector<NeuronSpec> specs_data{{Activation::linear, 1}, {Activation::tanh, 10}};
  std::vector<NeuronSpec> specs_var{{Activation::linear, 1}, {Activation::tanh, 10}};
  std::vector<double> gamma_grid{1e-6, 1e-4, 1e-2, 1.0, 1e2};
  double val_fraction = 0.2;
  Index batch_rows = kDefaultBatchRows;
  std::uint64_t seed = 0;
};

struct PiMetadata {
  std::int64_t n_train = 0;
  std::uint64_t seed = 0;             // base seed from PiConfig
  std::uint64_t seed_layer_data = 0;  // derived sub-seeds
  std::uint64_t seed_layer_var = 0;
  std::uint64_t seed_split = 0;
  double gamma_data = 0.0;
  double gamma_var = 0.0;
  StandardizationParams standardizer;
};

/// Data model + variance model with their output-weight covariances.
/// Training data is not retained.
struct PiModel {
  ElmModel m_data;
  WeightCovariance sigma_data;
  ElmModel m_var;
  WeightCovariance sigma_var;
  PiMetadata meta;
};

struct IntervalPrediction {
  double y_hat = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double s = 0.0;         // √(max(r̂²,0) + σ²_r + σ²_y)
  double r2_raw = 0.0;    // predicted squared residual before clamping
  double sigma2_r = 0.0;
  double sigma2_y = 0.0;
};

/// Wall-clock seconds per training stage, for runtime reporting.
struct FitReport {
  double secs_gamma_data = 0.0;
  double secs_train_data = 0.0;
  double secs_jackknife_data = 0.0;
  double secs_gamma_var = 0.0;
  double secs_train_var = 0.0;
  double secs_jackknife_var = 0.0;
};

/// Two-stage training: fit the data model, jackknife its weight covariance,
/// fit the variance model on squared residuals, jackknife again. Inputs are
/// standardized internally; targets stay in original units. Singleton γ
/// grids skip the validation split.
PiModel fit_pi(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y,
               const PiConfig& config, FitReport* report = nullptr);

/// Intervals ŷ ± z(α)·√(max(r̂²,0) + σ²_r + σ²_y) per sample.
std::vector<IntervalPrediction> predict_pi(const PiModel& model,
                                           const Eigen::Ref<const Matrix>& x,
                                           double alpha,
                                           Index batch_rows = kDefaultBatchRows);

struct DecayPoint {
  Index n_train = 0;
  double mean_sigma2_y = 0.0;
  double mean_sigma2_r = 0.0;
  double mean_r2 = 0.0;  // clamped r̂² component
};

/// For each N, fits PiModels on fresh generator draws and averages the
/// variance components over a fixed test grid across trials.
std::vector<DecayPoint> uncertainty_decay_curve(const GeneratorSpec& generator,
                                                std::span<const Index> n_values,
                                                double alpha, int trials,
                                                const PiConfig& config,
                                                Index test_grid_size = 512);

}  // namespace elmpi
