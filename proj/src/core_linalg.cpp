#include "elmpi/core_linalg.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <string>

namespace elmpi {

void gram_accumulate(GramState& state, const Eigen::Ref<const Matrix>& batch,
                     const Eigen::Ref<const Vector>& targets) {
  if (batch.cols() != state.width())
    throw ShapeError("gram_accumulate: batch has " +
                     std::to_string(batch.cols()) + " columns, state width is " +
                     std::to_string(state.width()));
  if (targets.size() != batch.rows())
    throw ShapeError("gram_accumulate: " + std::to_string(targets.size()) +
                     " targets for " + std::to_string(batch.rows()) + " rows");
  state.gram.selfadjointView<Eigen::Lower>().rankUpdate(batch.adjoint(), 1.0);
  state.gram.triangularView<Eigen::StrictlyUpper>() = state.gram.transpose();
  state.moment.noalias() += batch.adjoint() * targets;
  state.count += batch.rows();
}

void gram_merge(GramState& into, const GramState& other) {
  if (into.width() != other.width())
    throw ShapeError("gram_merge: widths " + std::to_string(into.width()) +
                     " vs " + std::to_string(other.width()));
  into.gram += other.gram;
  into.moment += other.moment;
  into.count += other.count;
}

namespace {

// Locates the first nonpositive pivot of a failed Cholesky factorization.
int find_failing_pivot(const Matrix& a) {
  const Index n = a.rows();
  Matrix l = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    double d = a(j, j) - l.row(j).head(j).squaredNorm();
    if (!(d > 0.0)) return static_cast<int>(j);
    l(j, j) = std::sqrt(d);
    for (Index i = j + 1; i < n; ++i)
      l(i, j) = (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
  }
  return static_cast<int>(n - 1);
}

}  // namespace

SpdFactor spd_factor(const Eigen::Ref<const Matrix>& gram, double gamma) {
  if (gram.rows() != gram.cols())
    throw ShapeError("spd_factor: gram is not square");
  if (gamma < 0.0) throw std::domain_error("spd_factor: gamma must be >= 0");
  Matrix shifted = gram;
  shifted.diagonal().array() += gamma;
  Eigen::LLT<Matrix> llt(shifted);
  if (llt.info() != Eigen::Success) {
    int pivot = find_failing_pivot(shifted);
    throw SingularError(pivot, "spd_factor: matrix not positive definite at pivot " +
                                   std::to_string(pivot) +
                                   " (gamma=" + std::to_string(gamma) + ")");
  }
  return SpdFactor{llt.matrixL(), gamma};
}

Vector SpdFactor::solve(const Eigen::Ref<const Vector>& rhs) const {
  Vector x = lower.triangularView<Eigen::Lower>().solve(rhs);
  lower.triangularView<Eigen::Lower>().adjoint().solveInPlace(x);
  return x;
}

Matrix SpdFactor::solve_matrix(const Eigen::Ref<const Matrix>& rhs) const {
  Matrix x = lower.triangularView<Eigen::Lower>().solve(rhs);
  lower.triangularView<Eigen::Lower>().adjoint().solveInPlace(x);
  return x;
}

Matrix SpdFactor::inverse() const {
  Matrix inv = solve_matrix(Matrix::Identity(lower.rows(), lower.rows()));
  inv = ((inv + inv.transpose()) * 0.5).eval();
  return inv;
}

SpdSolution spd_solve(const GramState& state, double gamma) {
  SpdFactor factor = spd_factor(state.gram, gamma);
  return SpdSolution{factor.solve(state.moment), factor.inverse()};
}

namespace detail {

// Acklam's rational minimax approximation to the normal quantile.
double probit(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  static constexpr double low = 0.02425;

  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("probit: p must be in (0,1)");
  if (p < low) {
    double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - low) {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double q = p - 0.5;
  double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace detail

double std_normal_quantile(double coverage) {
  if (!(coverage > 0.0 && coverage < 1.0))
    throw std::domain_error("std_normal_quantile: coverage must be in (0,1)");
  return detail::probit(0.5 * (1.0 + coverage));
}

}  // namespace elmpi
