#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "elmpi/core_linalg.hpp"

namespace elmpi {

inline constexpr Index kDefaultBatchRows = 4096;

enum class Activation { linear, tanh, sigmoid };

const char* to_string(Activation kind);
Activation activation_from_string(const std::string& name);

struct NeuronSpec {
  Activation kind = Activation::tanh;
  Index count = 0;
};

/// Frozen random projection d → L. weights has d+1 rows: the last row is the
/// bias row, fed the constant +1. Immutable after construction; identical
/// (input_dim, specs, seed) reproduce identical weights bit for bit.
struct HiddenLayer {
  Matrix weights;                 // (input_dim+1) × L
  std::vector<Activation> kinds;  // one per column
  std::uint64_t seed = 0;
  Index input_dim = 0;

  Index width() const { return weights.cols(); }
};

/// Draws weights i.i.d. standard normal scaled by 1/√(d+1) from a seeded
/// deterministic generator, column by column in spec order.
HiddenLayer init_hidden_layer(Index input_dim, std::span<const NeuronSpec> specs,
                              std::uint64_t seed);

namespace detail {
void apply_activations(const std::vector<Activation>& kinds, Matrix& z);
}

/// H[i,j] = φ_j(x̃_i · w_j) with x̃ the input row extended by the constant +1.
template <typename Derived>
Matrix hidden_transform(const HiddenLayer& layer,
                        const Eigen::MatrixBase<Derived>& x) {
  if (x.cols() != layer.input_dim)
    throw ShapeError("hidden_transform: input has " + std::to_string(x.cols()) +
                     " columns, layer expects " + std::to_string(layer.input_dim));
  Matrix h(x.rows(), layer.width());
  h.noalias() = x * layer.weights.topRows(layer.input_dim);
  h.rowwise() += layer.weights.row(layer.input_dim);
  detail::apply_activations(layer.kinds, h);
  return h;
}

struct ElmModel {
  HiddenLayer layer;
  Vector beta;
  double gamma = 0.0;
  Matrix p;  // (HᵀH + γI)⁻¹ retained from training
};

/// Solves (HᵀH + γI)β = Hᵀy, streaming X in row batches of at most
/// batch_rows. The result is invariant to batch_rows up to 1e-10 relative.
ElmModel train(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y,
               const HiddenLayer& layer, double gamma,
               Index batch_rows = kDefaultBatchRows);

Vector predict(const ElmModel& model, const Eigen::Ref<const Matrix>& x,
               Index batch_rows = kDefaultBatchRows);

struct GammaSelection {
  double gamma = 0.0;             // grid argmin of validation MSE
  std::vector<double> val_mse;    // per grid point, grid order
};

/// Seeded validation split; ties in validation MSE break toward larger γ.
GammaSelection select_gamma(const Eigen::Ref<const Matrix>& x,
                            const Eigen::Ref<const Vector>& y,
                            const HiddenLayer& layer, std::span<const double> grid,
                            double val_fraction, std::uint64_t seed,
                            Index batch_rows = kDefaultBatchRows);

}  // namespace elmpi
