#include "elmpi/jackknife.hpp"

#include <string>

#include "elmpi/parallel.hpp"

namespace elmpi {

JackknifeAccumulator::JackknifeAccumulator(const Eigen::Ref<const Matrix>& p)
    : p_(p), a_(Matrix::Zero(p.rows(), p.cols())) {
  if (p.rows() != p.cols())
    throw ShapeError("JackknifeAccumulator: P must be square");
}

void JackknifeAccumulator::add(const Eigen::Ref<const Matrix>& h_batch,
                               const Eigen::Ref<const Vector>& residual_batch) {
  if (h_batch.cols() != p_.rows())
    throw ShapeError("jackknife: H batch has " + std::to_string(h_batch.cols()) +
                     " columns, P is " + std::to_string(p_.rows()) + "-wide");
  if (h_batch.rows() != residual_batch.size())
    throw ShapeError("jackknife: batch rows vs residuals mismatch");

  s_.resize(h_batch.rows(), p_.cols());
  s_.noalias() = h_batch * p_;
  Vector leverage = (s_.array() * h_batch.array()).rowwise().sum();
  Vector weight(h_batch.rows());
  for (Index i = 0; i < h_batch.rows(); ++i) {
    double denom = 1.0 - leverage(i);
    if (denom < kLeverageEps) {
      denom = kLeverageEps;
      ++clamp_count_;
    }
    weight(i) = residual_batch(i) * residual_batch(i) / denom;
  }
  // A += (H′)ᵀS with H′ the row-weighted copy of H.
  weighted_.resize(h_batch.rows(), h_batch.cols());
  weighted_ = h_batch;
  weighted_.array().colwise() *= weight.array();
  a_.noalias() += weighted_.adjoint() * s_;
  rows_seen_ += h_batch.rows();
}

void JackknifeAccumulator::merge(const JackknifeAccumulator& other) {
  a_ += other.a_;
  clamp_count_ += other.clamp_count_;
  rows_seen_ += other.rows_seen_;
}

WeightCovariance JackknifeAccumulator::finish() const {
  Matrix sigma(p_.rows(), p_.cols());
  sigma.noalias() = p_ * a_;
  sigma = ((sigma + sigma.transpose()) * 0.5).eval();
  return WeightCovariance{std::move(sigma), clamp_count_};
}

WeightCovariance jackknife_covariance(
    const std::function<Matrix(Index, Index)>& h_source,
    const Eigen::Ref<const Vector>& residuals, const Eigen::Ref<const Matrix>& p,
    Index batch_rows) {
  JackknifeAccumulator acc = batched_reduce<JackknifeAccumulator>(
      residuals.size(), batch_rows, [&] { return JackknifeAccumulator(p); },
      [&](JackknifeAccumulator& a, Index start, Index rows) {
        Matrix h = h_source(start, rows);
        if (h.rows() != rows)
          throw ShapeError("jackknife: batch source returned " +
                           std::to_string(h.rows()) + " rows, expected " +
                           std::to_string(rows));
        a.add(h, residuals.segment(start, rows));
      },
      [](JackknifeAccumulator& into, const JackknifeAccumulator& other) {
        into.merge(other);
      });
  return acc.finish();
}

WeightCovariance jackknife_covariance(const Eigen::Ref<const Matrix>& h,
                                      const Eigen::Ref<const Vector>& residuals,
                                      const Eigen::Ref<const Matrix>& p,
                                      Index batch_rows) {
  if (h.rows() != residuals.size())
    throw ShapeError("jackknife: H rows vs residuals mismatch");
  return jackknife_covariance(
      [&](Index start, Index rows) -> Matrix { return h.middleRows(start, rows); },
      residuals, p, batch_rows);
}

Vector prediction_variance(const Eigen::Ref<const Matrix>& h,
                           const Eigen::Ref<const Matrix>& sigma,
                           Index batch_rows) {
  if (sigma.rows() != sigma.cols())
    throw ShapeError("prediction_variance: Sigma must be square");
  if (h.cols() != sigma.rows())
    throw ShapeError("prediction_variance: H columns vs Sigma size mismatch");
  Vector out(h.rows());
  batched_for(h.rows(), batch_rows, [&](Index start, Index rows) {
    Matrix u(rows, sigma.cols());
    u.noalias() = h.middleRows(start, rows) * sigma;
    out.segment(start, rows) =
        (u.array() * h.middleRows(start, rows).array()).rowwise().sum().max(0.0);
  });
  return out;
}

}  // namespace elmpi
