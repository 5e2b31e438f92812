#pragma once

#include <span>
#include <vector>

#include "elmpi/core_linalg.hpp"
#include "elmpi/pi_pipeline.hpp"

namespace elmpi {

struct IntervalReport {
  double picp = 0.0;
  double nmpiw = 0.0;
  double alpha = 0.0;
  Index n = 0;
};

/// Fraction of targets inside their intervals, boundaries inclusive.
double picp(const Eigen::Ref<const Vector>& lower,
            const Eigen::Ref<const Vector>& upper,
            const Eigen::Ref<const Vector>& y);
double picp(std::span<const IntervalPrediction> intervals,
            const Eigen::Ref<const Vector>& y);

/// Mean interval width divided by the target range.
double nmpiw(const Eigen::Ref<const Vector>& lower,
             const Eigen::Ref<const Vector>& upper,
             const Eigen::Ref<const Vector>& y);
double nmpiw(std::span<const IntervalPrediction> intervals,
             const Eigen::Ref<const Vector>& y);

IntervalReport interval_report(std::span<const IntervalPrediction> intervals,
                               const Eigen::Ref<const Vector>& y, double alpha);

struct UniformPiPoint {
  double half_width = 0.0;
  double nmpiw = 0.0;
  double picp = 0.0;
};

/// Tradeoff curve of uniform intervals ŷ ± w, w swept from 0 through the
/// sorted absolute residuals (the exact breakpoints) up to full coverage.
std::vector<UniformPiPoint> uniform_pi_curve(const Eigen::Ref<const Vector>& y_hat,
                                             const Eigen::Ref<const Vector>& y,
                                             Index n_points);

/// Smallest θ whose retained fraction {score ≥ θ} is at least `coverage`.
/// Ties at θ are all retained, so the realized fraction may exceed it.
double coverage_threshold(const Eigen::Ref<const Vector>& scores, double coverage);

enum class ThresholdMode { mse, per_sample };

/// tp_rate/fp_rate are NaN when no samples of that class survive the filter.
struct CoveragePoint {
  double coverage = 0.0;
  double theta = 0.0;
  double tp_rate = 0.0;
  double fp_rate = 0.0;
};

/// Filters by |ŷ| (mse mode) or |ŷ|/s (per_sample mode, s = interval scale),
/// classifies retained samples by sign(ŷ), and reports the rates among the
/// retained positives/negatives. half_widths may be empty in mse mode.
std::vector<CoveragePoint> confusion_at_coverage(
    const Eigen::Ref<const Vector>& y_hat,
    const Eigen::Ref<const Vector>& half_widths,
    const Eigen::Ref<const Vector>& labels, std::span<const double> coverages,
    ThresholdMode mode);

}  // namespace elmpi
