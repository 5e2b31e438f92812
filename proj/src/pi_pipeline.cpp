#include "elmpi/pi_pipeline.hpp"

#include <chrono>
#include <cmath>

#include "elmpi/parallel.hpp"
#include "elmpi/random.hpp"

namespace elmpi {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double choose_gamma(const Eigen::Ref<const Matrix>& x,
                    const Eigen::Ref<const Vector>& y, const HiddenLayer& layer,
                    const PiConfig& config, std::uint64_t split_seed) {
  if (config.gamma_grid.empty()) throw ConfigError("fit_pi: empty gamma grid");
  if (config.gamma_grid.size() == 1) return config.gamma_grid.front();
  return select_gamma(x, y, layer, config.gamma_grid, config.val_fraction,
                      split_seed, config.batch_rows)
      .gamma;
}

// One pass: predictions on the training data and the Jackknife accumulation,
// with residuals formed per batch against the given targets.
WeightCovariance jackknife_on_training(const ElmModel& model,
                                       const Eigen::Ref<const Matrix>& x,
                                       const Eigen::Ref<const Vector>& targets,
                                       Index batch_rows, Vector* residuals_out) {
  Vector residuals(x.rows());
  JackknifeAccumulator acc = batched_reduce<JackknifeAccumulator>(
      x.rows(), batch_rows, [&] { return JackknifeAccumulator(model.p); },
      [&](JackknifeAccumulator& a, Index start, Index rows) {
        Matrix h = hidden_transform(model.layer, x.middleRows(start, rows));
        residuals.segment(start, rows) =
            targets.segment(start, rows) - h * model.beta;
        a.add(h, residuals.segment(start, rows));
      },
      [](JackknifeAccumulator& into, const JackknifeAccumulator& other) {
        into.merge(other);
      });
  if (residuals_out) *residuals_out = std::move(residuals);
  return acc.finish();
}

}  // namespace

PiModel fit_pi(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y,
               const PiConfig& config, FitReport* report) {
  if (x.rows() < 2) throw DataError("fit_pi: need at least 2 training samples");
  if (x.rows() != y.size())
    throw ShapeError("fit_pi: rows vs targets mismatch");
  if (config.specs_data.empty() || config.specs_var.empty())
    throw ConfigError("fit_pi: neuron specs must be nonempty");

  FitReport timings;
  PiModel model;
  model.meta.n_train = x.rows();
  model.meta.seed = config.seed;
  model.meta.seed_layer_data = mix_seed(config.seed, 0);
  model.meta.seed_layer_var = mix_seed(config.seed, 1);
  model.meta.seed_split = mix_seed(config.seed, 2);

  model.meta.standardizer = fit_standardizer(x);
  Matrix xs = apply_standardizer(model.meta.standardizer, x);

  HiddenLayer layer_data =
      init_hidden_layer(x.cols(), config.specs_data, model.meta.seed_layer_data);
  auto t0 = Clock::now();
  model.meta.gamma_data =
      choose_gamma(xs, y, layer_data, config, model.meta.seed_split);
  timings.secs_gamma_data = seconds_since(t0);

  t0 = Clock::now();
  model.m_data =
      train(xs, y, layer_data, model.meta.gamma_data, config.batch_rows);
  timings.secs_train_data = seconds_since(t0);

  t0 = Clock::now();
  Vector residuals;
  model.sigma_data = jackknife_on_training(model.m_data, xs, y,
                                           config.batch_rows, &residuals);
  timings.secs_jackknife_data = seconds_since(t0);

  Vector sq_residuals = residuals.array().square();
  HiddenLayer layer_var =
      init_hidden_layer(x.cols(), config.specs_var, model.meta.seed_layer_var);
  t0 = Clock::now();
  model.meta.gamma_var = choose_gamma(xs, sq_residuals, layer_var, config,
                                      mix_seed(model.meta.seed_split, 1));
  timings.secs_gamma_var = seconds_since(t0);

  t0 = Clock::now();
  model.m_var =
      train(xs, sq_residuals, layer_var, model.meta.gamma_var, config.batch_rows);
  timings.secs_train_var = seconds_since(t0);

  t0 = Clock::now();
  model.sigma_var = jackknife_on_training(model.m_var, xs, sq_residuals,
                                          config.batch_rows, nullptr);
  timings.secs_jackknife_var = seconds_since(t0);

  if (report) *report = timings;
  return model;
}

std::vector<IntervalPrediction> predict_pi(const PiModel& model,
                                           const Eigen::Ref<const Matrix>& x,
                                           double alpha, Index batch_rows) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::domain_error("predict_pi: alpha must be in (0,1)");
  if (x.cols() != model.m_data.layer.input_dim)
    throw ShapeError("predict_pi: input dimension mismatch");

  const double z = std_normal_quantile(alpha);
  Matrix xs = apply_standardizer(model.meta.standardizer, x);
  std::vector<IntervalPrediction> out(static_cast<std::size_t>(x.rows()));

  batched_for(x.rows(), batch_rows, [&](Index start, Index rows) {
    Matrix h_data = hidden_transform(model.m_data.layer, xs.middleRows(start, rows));
    Vector y_hat = h_data * model.m_data.beta;
    Vector s2_y = prediction_variance(h_data, model.sigma_data.sigma, rows);

    Matrix h_var = hidden_transform(model.m_var.layer, xs.middleRows(start, rows));
    Vector r2_raw = h_var * model.m_var.beta;
    Vector s2_r = prediction_variance(h_var, model.sigma_var.sigma, rows);

    for (Index i = 0; i < rows; ++i) {
      IntervalPrediction& pred = out[static_cast<std::size_t>(start + i)];
      pred.y_hat = y_hat(i);
      pred.r2_raw = r2_raw(i);
      pred.sigma2_r = s2_r(i);
      pred.sigma2_y = s2_y(i);
      pred.s = std::sqrt(std::max(r2_raw(i), 0.0) + s2_r(i) + s2_y(i));
      pred.lower = pred.y_hat - z * pred.s;
      pred.upper = pred.y_hat + z * pred.s;
    }
  });
  return out;
}

std::vector<DecayPoint> uncertainty_decay_curve(const GeneratorSpec& generator,
                                                std::span<const Index> n_values,
                                                double alpha, int trials,
                                                const PiConfig& config,
                                                Index test_grid_size) {
  if (trials < 1) throw ConfigError("uncertainty_decay_curve: trials must be >= 1");
  for (std::size_t i = 1; i < n_values.size(); ++i)
    if (n_values[i] <= n_values[i - 1])
      throw ConfigError("uncertainty_decay_curve: n_values must be increasing");

  Matrix grid(test_grid_size, 1);
  for (Index i = 0; i < test_grid_size; ++i)
    grid(i, 0) = generator.x_lo + (generator.x_hi - generator.x_lo) *
                                      static_cast<double>(i) /
                                      static_cast<double>(test_grid_size - 1);

  std::vector<DecayPoint> curve;
  curve.reserve(n_values.size());
  for (std::size_t ni = 0; ni < n_values.size(); ++ni) {
    DecayPoint point;
    point.n_train = n_values[ni];
    for (int trial = 0; trial < trials; ++trial) {
      GeneratorSpec draw = generator;
      draw.n = n_values[ni];
      draw.seed = mix_seed(generator.seed, (ni << 20) + static_cast<std::uint64_t>(trial));
      Dataset data = synth(draw);
      PiConfig trial_config = config;
      trial_config.seed = mix_seed(draw.seed, 7);
      PiModel model = fit_pi(data.x, data.y, trial_config);
      std::vector<IntervalPrediction> preds =
          predict_pi(model, grid, alpha, config.batch_rows);
      double m_y = 0.0, m_r = 0.0, m_r2 = 0.0;
      for (const IntervalPrediction& pred : preds) {
        m_y += pred.sigma2_y;
        m_r += pred.sigma2_r;
        m_r2 += std::max(pred.r2_raw, 0.0);
      }
      const double denom = static_cast<double>(preds.size());
      point.mean_sigma2_y += m_y / denom;
      point.mean_sigma2_r += m_r / denom;
      point.mean_r2 += m_r2 / denom;
    }
    point.mean_sigma2_y /= trials;
    point.mean_sigma2_r /= trials;
    point.mean_r2 /= trials;
    curve.push_back(point);
  }
  return curve;
}

}  // namespace elmpi
