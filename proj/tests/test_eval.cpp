#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "elmpi/eval.hpp"
#include "elmpi/random.hpp"

using namespace elmpi;

namespace {

std::vector<IntervalPrediction> make_intervals(const Vector& y_hat, double half) {
  std::vector<IntervalPrediction> out(static_cast<std::size_t>(y_hat.size()));
  for (Index i = 0; i < y_hat.size(); ++i) {
    auto& p = out[static_cast<std::size_t>(i)];
    p.y_hat = y_hat(i);
    p.lower = y_hat(i) - half;
    p.upper = y_hat(i) + half;
    p.s = half;
  }
  return out;
}

}  // namespace

TEST_CASE("picp: saturated, degenerate, and permutation-invariant") {
  SeededRng rng(1);
  Vector y(50);
  for (Index i = 0; i < 50; ++i) y(i) = rng.normal();
  Vector y_hat = y.array() + 0.01;

  CHECK(picp(make_intervals(y_hat, 1e6), y) == 1.0);
  CHECK(picp(make_intervals(y_hat, 0.0), y) == 0.0);

  auto some = make_intervals(y_hat, 0.5);
  double base = picp(some, y);
  std::vector<IntervalPrediction> reversed(some.rbegin(), some.rend());
  Vector y_rev = y.reverse();
  CHECK(picp(reversed, y_rev) == base);

  CHECK_THROWS_AS(picp(Vector(), Vector(), Vector()), std::domain_error);
}

TEST_CASE("nmpiw: extreme widths") {
  Vector y(4);
  y << 0, 1, 2, 10;
  Vector y_hat = y;
  auto full = make_intervals(y_hat, 5.0);  // width 10 == range
  CHECK(nmpiw(full, y) == doctest::Approx(1.0));
  CHECK(nmpiw(make_intervals(y_hat, 0.0), y) == 0.0);
  Vector flat = Vector::Ones(4);
  CHECK_THROWS_AS(nmpiw(make_intervals(y_hat, 1.0), flat), std::domain_error);
}

TEST_CASE("widening intervals never lowers picp and raises nmpiw") {
  SeededRng rng(2);
  Vector y(200), y_hat(200);
  for (Index i = 0; i < 200; ++i) {
    y(i) = rng.normal();
    y_hat(i) = y(i) + 0.3 * rng.normal();
  }
  double prev_picp = -1.0, prev_nmpiw = -1.0;
  for (double half : {0.0, 0.1, 0.3, 0.6, 1.2}) {
    auto intervals = make_intervals(y_hat, half);
    double p = picp(intervals, y);
    double w = nmpiw(intervals, y);
    CHECK(p >= prev_picp);
    if (prev_nmpiw >= 0.0) CHECK(w > prev_nmpiw);
    prev_picp = p;
    prev_nmpiw = w;
  }
}

TEST_CASE("uniform_pi_curve: endpoints and monotonicity") {
  SeededRng rng(3);
  Vector y(101), y_hat(101);
  for (Index i = 0; i < 101; ++i) {
    y(i) = rng.normal();
    y_hat(i) = y(i) + 0.5 * rng.normal();
  }
  auto curve = uniform_pi_curve(y_hat, y, 12);
  REQUIRE(curve.size() == 12);
  CHECK(curve.front().nmpiw == 0.0);
  CHECK(curve.front().picp == 0.0);  // continuous targets
  CHECK(curve.back().picp == 1.0);

  double max_resid = (y - y_hat).cwiseAbs().maxCoeff();
  CHECK(curve.back().half_width == doctest::Approx(max_resid));
  for (std::size_t i = 1; i < curve.size(); ++i) {
    CHECK(curve[i].picp >= curve[i - 1].picp);
    CHECK(curve[i].nmpiw >= curve[i - 1].nmpiw);
  }
  CHECK_THROWS_AS(uniform_pi_curve(y_hat, y, 1), ConfigError);
}

TEST_CASE("uniform_pi_curve: breakpoints are the sorted absolute residuals") {
  Vector y(5), y_hat(5);
  y << 1, 2, 3, 4, 5;
  y_hat << 1.1, 1.8, 3.4, 3.5, 5.25;
  // |r| sorted: 0.1, 0.2, 0.25, 0.4, 0.5
  auto curve = uniform_pi_curve(y_hat, y, 6);
  std::array<double, 6> widths{0.0, 0.1, 0.2, 0.25, 0.4, 0.5};
  std::array<double, 6> cover{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  for (std::size_t i = 0; i < curve.size(); ++i) {
    CHECK(curve[i].half_width == doctest::Approx(widths[i]));
    CHECK(curve[i].picp == doctest::Approx(cover[i]));
  }
}

TEST_CASE("coverage_threshold: order statistics") {
  Vector scores(4);
  scores << 1, 2, 3, 4;
  CHECK(coverage_threshold(scores, 1.0) == 1.0);    // min retains everything
  CHECK(coverage_threshold(scores, 0.5) == 3.0);    // retains {3,4}
  CHECK(coverage_threshold(scores, 0.25) == 4.0);
  CHECK(coverage_threshold(scores, 0.75) == 2.0);

  Vector ties(4);
  ties << 1, 2, 2, 3;
  double theta = coverage_threshold(ties, 0.5);
  CHECK(theta == 2.0);
  Index retained = 0;
  for (Index i = 0; i < 4; ++i)
    if (ties(i) >= theta) ++retained;
  CHECK(retained == 3);  // ties at the threshold are all retained

  CHECK_THROWS_AS(coverage_threshold(scores, 0.0), std::domain_error);
  CHECK_THROWS_AS(coverage_threshold(scores, 1.5), std::domain_error);
  CHECK_THROWS_AS(coverage_threshold(Vector(), 0.5), std::domain_error);
}

TEST_CASE("confusion_at_coverage: full coverage equals unfiltered rates") {
  SeededRng rng(4);
  const Index n = 400;
  Vector y_hat(n), labels(n), widths(n);
  for (Index i = 0; i < n; ++i) {
    labels(i) = i % 2 == 0 ? 1.0 : -1.0;
    y_hat(i) = labels(i) * 0.5 + rng.normal();
    widths(i) = 0.5 + rng.uniform01();
  }
  std::array<double, 1> full{1.0};
  auto mse_points = confusion_at_coverage(y_hat, Vector(), labels, full,
                                          ThresholdMode::mse);
  auto pi_points = confusion_at_coverage(y_hat, widths, labels, full,
                                         ThresholdMode::per_sample);
  Index tp = 0, fp = 0, pos = 0, neg = 0;
  for (Index i = 0; i < n; ++i) {
    bool predicted = y_hat(i) >= 0.0;
    if (labels(i) > 0) {
      ++pos;
      tp += predicted;
    } else {
      ++neg;
      fp += predicted;
    }
  }
  CHECK(mse_points[0].tp_rate ==
        doctest::Approx(static_cast<double>(tp) / static_cast<double>(pos)));
  CHECK(mse_points[0].fp_rate ==
        doctest::Approx(static_cast<double>(fp) / static_cast<double>(neg)));
  CHECK(pi_points[0].tp_rate == doctest::Approx(mse_points[0].tp_rate));
  CHECK(pi_points[0].fp_rate == doctest::Approx(mse_points[0].fp_rate));
}

TEST_CASE("confusion_at_coverage: separable data has zero fp everywhere") {
  const Index n = 100;
  Vector labels(n), y_hat(n);
  for (Index i = 0; i < n; ++i) {
    labels(i) = i % 2 == 0 ? 1.0 : -1.0;
    y_hat(i) = labels(i) * (0.2 + 0.01 * static_cast<double>(i));
  }
  std::array<double, 5> coverages{1.0, 0.7, 0.5, 0.2, 0.05};
  auto points = confusion_at_coverage(y_hat, Vector(), labels, coverages,
                                      ThresholdMode::mse);
  for (const auto& point : points) {
    if (!std::isnan(point.fp_rate)) CHECK(point.fp_rate == 0.0);
    if (!std::isnan(point.tp_rate)) CHECK(point.tp_rate == 1.0);
  }
}

TEST_CASE("confusion_at_coverage: retained count shrinks as coverage drops") {
  SeededRng rng(5);
  const Index n = 500;
  Vector y_hat(n), labels(n);
  for (Index i = 0; i < n; ++i) {
    labels(i) = rng.uniform01() < 0.5 ? 1.0 : -1.0;
    y_hat(i) = rng.normal();
  }
  std::array<double, 4> coverages{1.0, 0.6, 0.3, 0.1};
  auto points = confusion_at_coverage(y_hat, Vector(), labels, coverages,
                                      ThresholdMode::mse);
  double prev_theta = -1e300;
  for (const auto& point : points) {
    CHECK(point.theta >= prev_theta);  // higher threshold = fewer retained
    prev_theta = point.theta;
  }
  std::array<double, 1> c{0.5};
  CHECK_THROWS_AS(confusion_at_coverage(y_hat, Vector(), Vector::Zero(n), c,
                                        ThresholdMode::mse),
                  std::domain_error);
  CHECK_THROWS_AS(confusion_at_coverage(y_hat, Vector(), labels, c,
                                        ThresholdMode::per_sample),
                  ShapeError);
}

TEST_CASE("confusion_at_coverage: undefined rates become NaN, not zero") {
  Vector y_hat(4), labels(4);
  y_hat << 3.0, 2.0, 0.5, 0.4;
  labels << 1.0, 1.0, -1.0, -1.0;
  std::array<double, 1> half{0.5};  // retains the two largest |y_hat|: both +1
  auto points = confusion_at_coverage(y_hat, Vector(), labels, half,
                                      ThresholdMode::mse);
  CHECK(points[0].tp_rate == 1.0);
  CHECK(std::isnan(points[0].fp_rate));
}
