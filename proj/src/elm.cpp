#include "elmpi/elm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "elmpi/parallel.hpp"
#include "elmpi/random.hpp"

namespace elmpi {

const char* to_string(Activation kind) {
  switch (kind) {
    case Activation::linear: return "linear";
    case Activation::tanh: return "tanh";
    case Activation::sigmoid: return "sigmoid";
  }
  return "?";
}

Activation activation_from_string(const std::string& name) {
  if (name == "linear") return Activation::linear;
  if (name == "tanh") return Activation::tanh;
  if (name == "sigmoid") return Activation::sigmoid;
  throw ConfigError("unknown activation '" + name + "'");
}

HiddenLayer init_hidden_layer(Index input_dim, std::span<const NeuronSpec> specs,
                              std::uint64_t seed) {
  if (input_dim < 1) throw ConfigError("init_hidden_layer: input_dim must be >= 1");
  if (specs.empty()) throw ConfigError("init_hidden_layer: empty neuron spec list");
  Index width = 0;
  for (const NeuronSpec& spec : specs) {
    if (spec.count < 1)
      throw ConfigError("init_hidden_layer: neuron count must be >= 1");
    width += spec.count;
  }

  HiddenLayer layer;
  layer.seed = seed;
  layer.input_dim = input_dim;
  layer.weights.resize(input_dim + 1, width);
  layer.kinds.reserve(static_cast<std::size_t>(width));
  for (const NeuronSpec& spec : specs)
    layer.kinds.insert(layer.kinds.end(), static_cast<std::size_t>(spec.count),
                       spec.kind);

  // Pre-activations stay O(1) on standardized inputs with this scaling.
  const double scale = 1.0 / std::sqrt(static_cast<double>(input_dim + 1));
  SeededRng rng(seed);
  for (Index j = 0; j < width; ++j)
    for (Index k = 0; k <= input_dim; ++k) layer.weights(k, j) = scale * rng.normal();
  return layer;
}

namespace detail {

void apply_activations(const std::vector<Activation>& kinds, Matrix& z) {
  // Columns with the same kind come in contiguous runs (spec order).
  Index j = 0;
  const Index width = z.cols();
  while (j < width) {
    Activation kind = kinds[static_cast<std::size_t>(j)];
    Index end = j + 1;
    while (end < width && kinds[static_cast<std::size_t>(end)] == kind) ++end;
    auto block = z.middleCols(j, end - j).array();
    switch (kind) {
      case Activation::linear:
        break;
      case Activation::tanh:
        block = block.tanh();
        break;
      case Activation::sigmoid:
        block = 1.0 / (1.0 + (-block).exp());
        break;
    }
    j = end;
  }
}

}  // namespace detail

ElmModel train(const Eigen::Ref<const Matrix>& x, const Eigen::Ref<const Vector>& y,
               const HiddenLayer& layer, double gamma, Index batch_rows) {
  if (x.rows() == 0) throw DataError("train: empty data");
  if (x.rows() != y.size())
    throw ShapeError("train: " + std::to_string(x.rows()) + " rows vs " +
                     std::to_string(y.size()) + " targets");
  if (x.cols() != layer.input_dim)
    throw ShapeError("train: input dimension mismatch");
  if (gamma < 0.0) throw std::domain_error("train: gamma must be >= 0");
  if (gamma == 0.0 && x.rows() < layer.width())
    throw ConfigError("train: gamma > 0 required when N < L");

  GramState state = batched_reduce<GramState>(
      x.rows(), batch_rows, [&] { return GramState(layer.width()); },
      [&](GramState& s, Index start, Index rows) {
        gram_accumulate(s, hidden_transform(layer, x.middleRows(start, rows)),
                        y.segment(start, rows));
      },
      [](GramState& into, const GramState& other) { gram_merge(into, other); });

  SpdSolution solution = spd_solve(state, gamma);
  return ElmModel{layer, std::move(solution.beta), gamma, std::move(solution.p)};
}

Vector predict(const ElmModel& model, const Eigen::Ref<const Matrix>& x,
               Index batch_rows) {
  if (x.cols() != model.layer.input_dim)
    throw ShapeError("predict: input dimension mismatch");
  Vector out(x.rows());
  batched_for(x.rows(), batch_rows, [&](Index start, Index rows) {
    out.segment(start, rows).noalias() =
        hidden_transform(model.layer, x.middleRows(start, rows)) * model.beta;
  });
  return out;
}

GammaSelection select_gamma(const Eigen::Ref<const Matrix>& x,
                            const Eigen::Ref<const Vector>& y,
                            const HiddenLayer& layer, std::span<const double> grid,
                            double val_fraction, std::uint64_t seed,
                            Index batch_rows) {
  if (grid.empty()) throw ConfigError("select_gamma: empty gamma grid");
  for (double g : grid)
    if (!(g > 0.0)) throw ConfigError("select_gamma: grid values must be > 0");
  if (!(val_fraction > 0.0 && val_fraction < 1.0))
    throw ConfigError("select_gamma: val_fraction must be in (0,1)");
  const Index n = x.rows();
  if (n < 2) throw ConfigError("select_gamma: need at least 2 samples to split");
  if (n != y.size()) throw ShapeError("select_gamma: rows vs targets mismatch");

  // Validation rows are the first n_val entries of the seeded permutation.
  Index n_val = static_cast<Index>(std::floor(static_cast<double>(n) * val_fraction));
  n_val = std::clamp<Index>(n_val, 1, n - 1);
  const Index n_tr = n - n_val;
  std::vector<Index> perm = seeded_permutation(n, seed);

  const Index dim = x.cols();
  Matrix x_val(n_val, dim), x_tr(n_tr, dim);
  Vector y_val(n_val), y_tr(n_tr);
  for (Index i = 0; i < n_val; ++i) {
    x_val.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
    y_val(i) = y(perm[static_cast<std::size_t>(i)]);
  }
  for (Index i = 0; i < n_tr; ++i) {
    x_tr.row(i) = x.row(perm[static_cast<std::size_t>(n_val + i)]);
    y_tr(i) = y(perm[static_cast<std::size_t>(n_val + i)]);
  }

  GramState state = batched_reduce<GramState>(
      n_tr, batch_rows, [&] { return GramState(layer.width()); },
      [&](GramState& s, Index start, Index rows) {
        gram_accumulate(s, hidden_transform(layer, x_tr.middleRows(start, rows)),
                        y_tr.segment(start, rows));
      },
      [](GramState& into, const GramState& other) { gram_merge(into, other); });

  // One solve per γ; all validation predictions in a single pass.
  const Index n_grid = static_cast<Index>(grid.size());
  Matrix betas(layer.width(), n_grid);
  for (Index g = 0; g < n_grid; ++g)
    betas.col(g) = spd_factor(state.gram, grid[static_cast<std::size_t>(g)])
                       .solve(state.moment);

  Vector sq_err = batched_reduce<Vector>(
      n_val, batch_rows, [&] { return Vector(Vector::Zero(n_grid)); },
      [&](Vector& acc, Index start, Index rows) {
        Matrix pred = hidden_transform(layer, x_val.middleRows(start, rows)) * betas;
        acc += (pred.colwise() - y_val.segment(start, rows))
                   .array()
                   .square()
                   .colwise()
                   .sum()
                   .matrix()
                   .transpose();
      },
      [](Vector& into, const Vector& other) { into += other; });

  GammaSelection result;
  result.val_mse.resize(static_cast<std::size_t>(n_grid));
  Index best = 0;
  for (Index g = 0; g < n_grid; ++g) {
    double mse = sq_err(g) / static_cast<double>(n_val);
    result.val_mse[static_cast<std::size_t>(g)] = mse;
    const double best_mse = result.val_mse[static_cast<std::size_t>(best)];
    if (mse < best_mse ||
        (mse == best_mse &&
         grid[static_cast<std::size_t>(g)] > grid[static_cast<std::size_t>(best)]))
      best = g;
  }
  result.gamma = grid[static_cast<std::size_t>(best)];
  return result;
}

}  // namespace elmpi
