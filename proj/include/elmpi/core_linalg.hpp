#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "elmpi/errors.hpp"

namespace elmpi {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Streaming accumulator for the normal-equations pair (HᵀH, Hᵀy).
/// gram stays exactly symmetric: every update adds a rank-k term and
/// mirrors the lower triangle.
struct GramState {
  Matrix gram;           // L×L
  Vector moment;         // L
  std::int64_t count{};  // rows accumulated so far

  explicit GramState(Index width)
      : gram(Matrix::Zero(width, width)), moment(Vector::Zero(width)) {}

  Index width() const { return gram.rows(); }
};

/// state.gram += batchᵀ·batch, state.moment += batchᵀ·targets, count += rows.
void gram_accumulate(GramState& state, const Eigen::Ref<const Matrix>& batch,
                     const Eigen::Ref<const Vector>& targets);

/// Elementwise merge of two accumulators built over disjoint row sets.
void gram_merge(GramState& into, const GramState& other);

/// Lower Cholesky factor of (gram + γI).
struct SpdFactor {
  Matrix lower;
  double gamma = 0.0;

  Vector solve(const Eigen::Ref<const Vector>& rhs) const;
  Matrix solve_matrix(const Eigen::Ref<const Matrix>& rhs) const;
  Matrix inverse() const;  // symmetrized (gram + γI)⁻¹
};

/// Factor gram + γI. Throws SingularError naming the failing pivot when the
/// shifted matrix is not positive definite.
SpdFactor spd_factor(const Eigen::Ref<const Matrix>& gram, double gamma);

struct SpdSolution {
  Vector beta;  // solves (gram + γI)β = moment
  Matrix p;     // (gram + γI)⁻¹, symmetric
};

SpdSolution spd_solve(const GramState& state, double gamma);

/// Two-sided standard-normal quantile: the z with
/// P(|Z| ≤ z) = coverage, i.e. Φ⁻¹((1+coverage)/2). z(0.95) ≈ 1.959964.
double std_normal_quantile(double coverage);

namespace detail {
/// One-sided standard-normal quantile Φ⁻¹(p) on (0,1), rational minimax
/// approximation (Acklam), |relative error| < 1.2e-9.
double probit(double p);
}  // namespace detail

}  // namespace elmpi
