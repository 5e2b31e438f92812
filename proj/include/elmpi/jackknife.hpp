#pragma once

#include <cstdint>
#include <functional>

#include "elmpi/core_linalg.hpp"
#include "elmpi/elm.hpp"

namespace elmpi {

/// Weighted-Jackknife covariance of the output weights, symmetrized on
/// output. leverage_clamp_count reports rows whose leverage denominator
/// 1 − h·P·hᵀ fell below the clamp floor.
struct WeightCovariance {
  Matrix sigma;
  std::int64_t leverage_clamp_count = 0;
};

inline constexpr double kLeverageEps = 1e-8;

/// Streaming accumulator for Σ = P·A with A = Σ_j (H′ʲ)ᵀSʲ, Sʲ = HʲP and
/// H′_i = (r_i² / (1 − S_i·H_i))·H_i. Batches may arrive in any order; merge
/// combines accumulators built over disjoint row sets.
class JackknifeAccumulator {
 public:
  explicit JackknifeAccumulator(const Eigen::Ref<const Matrix>& p);

  void add(const Eigen::Ref<const Matrix>& h_batch,
           const Eigen::Ref<const Vector>& residual_batch);
  void merge(const JackknifeAccumulator& other);
  Index rows_seen() const { return rows_seen_; }

  WeightCovariance finish() const;

 private:
  Matrix p_;
  Matrix a_;
  Matrix s_;         // per-batch scratch, reused across add() calls
  Matrix weighted_;  // per-batch scratch for H′
  std::int64_t clamp_count_ = 0;
  Index rows_seen_ = 0;
};

/// Batched weighted Jackknife over a row-batch source. The source is called
/// as source(first_row, n_rows) and must return the n_rows×L block of H.
WeightCovariance jackknife_covariance(
    const std::function<Matrix(Index, Index)>& h_source,
    const Eigen::Ref<const Vector>& residuals, const Eigen::Ref<const Matrix>& p,
    Index batch_rows = kDefaultBatchRows);

/// Dense-H convenience overload.
WeightCovariance jackknife_covariance(const Eigen::Ref<const Matrix>& h,
                                      const Eigen::Ref<const Vector>& residuals,
                                      const Eigen::Ref<const Matrix>& p,
                                      Index batch_rows = kDefaultBatchRows);

/// σ²[i] = H_i·Σ·H_iᵀ per row, computed in batches without forming the n×n
/// product; roundoff negatives clamp to 0.
Vector prediction_variance(const Eigen::Ref<const Matrix>& h,
                           const Eigen::Ref<const Matrix>& sigma,
                           Index batch_rows = kDefaultBatchRows);

}  // namespace elmpi
