#include "elmpi/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace elmpi {

namespace {

void check_lengths(Index a, Index b, const char* where) {
  if (a != b) throw ShapeError(std::string(where) + ": length mismatch");
  if (a < 1) throw std::domain_error(std::string(where) + ": empty input");
}

Vector lowers(std::span<const IntervalPrediction> intervals) {
  Vector v(static_cast<Index>(intervals.size()));
  for (Index i = 0; i < v.size(); ++i) v(i) = intervals[static_cast<std::size_t>(i)].lower;
  return v;
}

Vector uppers(std::span<const IntervalPrediction> intervals) {
  Vector v(static_cast<Index>(intervals.size()));
  for (Index i = 0; i < v.size(); ++i) v(i) = intervals[static_cast<std::size_t>(i)].upper;
  return v;
}

}  // namespace

double picp(const Eigen::Ref<const Vector>& lower,
            const Eigen::Ref<const Vector>& upper,
            const Eigen::Ref<const Vector>& y) {
  check_lengths(lower.size(), y.size(), "picp");
  check_lengths(upper.size(), y.size(), "picp");
  Index covered = 0;
  for (Index i = 0; i < y.size(); ++i)
    if (lower(i) <= y(i) && y(i) <= upper(i)) ++covered;
  return static_cast<double>(covered) / static_cast<double>(y.size());
}

double picp(std::span<const IntervalPrediction> intervals,
            const Eigen::Ref<const Vector>& y) {
  return picp(lowers(intervals), uppers(intervals), y);
}

double nmpiw(const Eigen::Ref<const Vector>& lower,
             const Eigen::Ref<const Vector>& upper,
             const Eigen::Ref<const Vector>& y) {
  check_lengths(lower.size(), y.size(), "nmpiw");
  check_lengths(upper.size(), y.size(), "nmpiw");
  double range = y.maxCoeff() - y.minCoeff();
  if (!(range > 0.0)) throw std::domain_error("nmpiw: zero target range");
  return (upper - lower).mean() / range;
}

double nmpiw(std::span<const IntervalPrediction> intervals,
             const Eigen::Ref<const Vector>& y) {
  return nmpiw(lowers(intervals), uppers(intervals), y);
}

IntervalReport interval_report(std::span<const IntervalPrediction> intervals,
                               const Eigen::Ref<const Vector>& y, double alpha) {
  return IntervalReport{picp(intervals, y), nmpiw(intervals, y), alpha, y.size()};
}

std::vector<UniformPiPoint> uniform_pi_curve(const Eigen::Ref<const Vector>& y_hat,
                                             const Eigen::Ref<const Vector>& y,
                                             Index n_points) {
  check_lengths(y_hat.size(), y.size(), "uniform_pi_curve");
  if (n_points < 2)
    throw ConfigError("uniform_pi_curve: n_points must be >= 2");
  double range = y.maxCoeff() - y.minCoeff();
  if (!(range > 0.0)) throw std::domain_error("uniform_pi_curve: zero target range");

  const Index n = y.size();
  std::vector<double> abs_resid(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    abs_resid[static_cast<std::size_t>(i)] = std::abs(y(i) - y_hat(i));
  std::sort(abs_resid.begin(), abs_resid.end());

  auto point_at = [&](double w) {
    // Coverage counts |residual| ≤ w, matching picp's inclusive boundaries.
    auto beyond = std::upper_bound(abs_resid.begin(), abs_resid.end(), w);
    double covered = static_cast<double>(beyond - abs_resid.begin());
    return UniformPiPoint{w, 2.0 * w / range, covered / static_cast<double>(n)};
  };

  std::vector<UniformPiPoint> curve;
  curve.reserve(static_cast<std::size_t>(n_points));
  curve.push_back(point_at(0.0));
  for (Index j = 1; j < n_points; ++j) {
    // Quantile ranks over the sorted residuals; the last point is the max.
    Index idx = (j * n) / n_points;
    if (j == n_points - 1) idx = n - 1;
    idx = std::min(idx, n - 1);
    curve.push_back(point_at(abs_resid[static_cast<std::size_t>(idx)]));
  }
  return curve;
}

double coverage_threshold(const Eigen::Ref<const Vector>& scores, double coverage) {
  if (scores.size() < 1) throw std::domain_error("coverage_threshold: empty scores");
  if (!(coverage > 0.0 && coverage <= 1.0))
    throw std::domain_error("coverage_threshold: coverage must be in (0,1]");
  const Index n = scores.size();
  std::vector<double> sorted(scores.data(), scores.data() + n);
  std::sort(sorted.begin(), sorted.end());
  Index keep = static_cast<Index>(
      std::ceil(coverage * static_cast<double>(n) - 1e-12));
  keep = std::clamp<Index>(keep, 1, n);
  return sorted[static_cast<std::size_t>(n - keep)];
}

std::vector<CoveragePoint> confusion_at_coverage(
    const Eigen::Ref<const Vector>& y_hat,
    const Eigen::Ref<const Vector>& half_widths,
    const Eigen::Ref<const Vector>& labels, std::span<const double> coverages,
    ThresholdMode mode) {
  check_lengths(y_hat.size(), labels.size(), "confusion_at_coverage");
  for (Index i = 0; i < labels.size(); ++i)
    if (labels(i) != 1.0 && labels(i) != -1.0)
      throw std::domain_error("confusion_at_coverage: labels must be +-1");

  const Index n = y_hat.size();
  Vector scores(n);
  if (mode == ThresholdMode::mse) {
    scores = y_hat.cwiseAbs();
  } else {
    if (half_widths.size() != n)
      throw ShapeError("confusion_at_coverage: per_sample mode needs one width per sample");
    for (Index i = 0; i < n; ++i) {
      double w = half_widths(i);
      double a = std::abs(y_hat(i));
      scores(i) = w > 0.0 ? a / w
                          : (a > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    }
  }

  std::vector<CoveragePoint> points;
  points.reserve(coverages.size());
  for (double coverage : coverages) {
    double theta = coverage_threshold(scores, coverage);
    Index tp = 0, fp = 0, pos = 0, neg = 0;
    for (Index i = 0; i < n; ++i) {
      if (scores(i) < theta) continue;
      bool predicted_positive = y_hat(i) >= 0.0;
      if (labels(i) > 0.0) {
        ++pos;
        if (predicted_positive) ++tp;
      } else {
        ++neg;
        if (predicted_positive) ++fp;
      }
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    points.push_back(CoveragePoint{
        coverage, theta,
        pos > 0 ? static_cast<double>(tp) / static_cast<double>(pos) : nan,
        neg > 0 ? static_cast<double>(fp) / static_cast<double>(neg) : nan});
  }
  return points;
}

}  // namespace elmpi
