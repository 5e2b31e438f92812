#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "elmpi/datakit.hpp"
#include "elmpi/elm.hpp"
#include "elmpi/random.hpp"
#include "support/oracles.hpp"

using namespace elmpi;

namespace {

std::vector<NeuronSpec> specs_1lin_10tanh() {
  return {{Activation::linear, 1}, {Activation::tanh, 10}};
}

}  // namespace

TEST_CASE("init_hidden_layer: determinism and width") {
  std::vector<NeuronSpec> specs{{Activation::tanh, 10}, {Activation::linear, 1}};
  HiddenLayer a = init_hidden_layer(3, specs, 7);
  HiddenLayer b = init_hidden_layer(3, specs, 7);
  CHECK(a.weights == b.weights);  // bitwise
  CHECK(a.kinds == b.kinds);
  CHECK(a.width() == 11);
  HiddenLayer c = init_hidden_layer(3, specs, 8);
  CHECK(a.weights != c.weights);

  std::vector<NeuronSpec> skin{{Activation::linear, 147}, {Activation::sigmoid, 200}};
  CHECK(init_hidden_layer(147, skin, 1).width() == 347);

  CHECK_THROWS_AS(init_hidden_layer(3, std::span<const NeuronSpec>{}, 1), ConfigError);
}

TEST_CASE("hidden_transform: linear neurons are an affine map") {
  std::vector<NeuronSpec> specs{{Activation::linear, 2}};
  HiddenLayer layer = init_hidden_layer(2, specs, 42);
  Matrix x(3, 2);
  x << 0.5, -1.0, 2.0, 0.25, -0.75, 1.5;
  Matrix h = hidden_transform(layer, x);
  Matrix affine = x * layer.weights.topRows(2);
  affine.rowwise() += layer.weights.row(2);
  CHECK(h.isApprox(affine, 1e-15));
}

TEST_CASE("hidden_transform: zero weights hit activation fixed points") {
  HiddenLayer layer;
  layer.input_dim = 2;
  layer.weights = Matrix::Zero(3, 4);
  layer.kinds = {Activation::tanh, Activation::tanh, Activation::sigmoid,
                 Activation::sigmoid};
  Matrix x = Matrix::Random(5, 2);
  Matrix h = hidden_transform(layer, x);
  CHECK(h.leftCols(2).cwiseAbs().maxCoeff() == 0.0);
  CHECK((h.rightCols(2).array() == 0.5).all());
}

TEST_CASE("hidden_transform: scalar tanh evaluation") {
  HiddenLayer layer;
  layer.input_dim = 1;
  layer.weights.resize(2, 1);
  layer.weights << 1.0, 0.0;  // weight 1, bias 0
  layer.kinds = {Activation::tanh};
  Matrix x(1, 1);
  x << 2.0;
  Matrix h = hidden_transform(layer, x);
  CHECK(h(0, 0) == doctest::Approx(0.9640275800758169).epsilon(1e-12));
}

TEST_CASE("hidden_transform: shape error") {
  HiddenLayer layer = init_hidden_layer(3, specs_1lin_10tanh(), 1);
  CHECK_THROWS_AS(hidden_transform(layer, Matrix::Zero(2, 2)), ShapeError);
}

TEST_CASE("train: zero targets give near-zero weights") {
  SeededRng rng(1);
  Matrix x(50, 2);
  for (Index i = 0; i < x.size(); ++i) x(i) = rng.normal();
  HiddenLayer layer = init_hidden_layer(2, specs_1lin_10tanh(), 2);
  ElmModel model = train(x, Vector::Zero(50), layer, 1e-3);
  CHECK(model.beta.norm() < 1e-12);
}

TEST_CASE("train/predict: batch invariance") {
  GeneratorSpec spec;
  spec.n = 333;
  spec.seed = 9;
  Dataset data = synth(spec);
  HiddenLayer layer = init_hidden_layer(1, specs_1lin_10tanh(), 3);
  ElmModel whole = train(data.x, data.y, layer, 1e-2, data.x.rows());
  ElmModel tenth = train(data.x, data.y, layer, 1e-2, (data.x.rows() + 9) / 10);
  CHECK(oracles::relative_error(tenth.beta, whole.beta) < 1e-10);
  Vector p_whole = predict(whole, data.x, data.x.rows());
  Vector p_tenth = predict(whole, data.x, 37);
  CHECK(oracles::relative_error(p_tenth, p_whole) < 1e-10);
}

TEST_CASE("train: beats the best constant predictor on 1-d artificial data") {
  GeneratorSpec spec;
  spec.noise = NoiseModel::constant;
  spec.noise_level = 0.3;
  spec.n = 1200;
  spec.seed = 4;
  Dataset data = synth(spec);
  auto [train_set, test_set] = split(data, 0.7, 21);
  StandardizationParams std_params = fit_standardizer(train_set.x);
  HiddenLayer layer = init_hidden_layer(1, specs_1lin_10tanh(), 5);
  ElmModel model =
      train(apply_standardizer(std_params, train_set.x), train_set.y, layer, 1e-4);
  Vector pred = predict(model, apply_standardizer(std_params, test_set.x));
  double rmse = std::sqrt((pred - test_set.y).squaredNorm() /
                          static_cast<double>(test_set.y.size()));
  double constant_rmse =
      std::sqrt((test_set.y.array() - train_set.y.mean()).square().mean());
  CHECK(rmse < constant_rmse);
}

TEST_CASE("predict: zero beta predicts zero; exact fit on a noiseless line") {
  HiddenLayer layer = init_hidden_layer(1, specs_1lin_10tanh(), 6);
  ElmModel zero{layer, Vector::Zero(layer.width()), 1.0,
                Matrix::Identity(layer.width(), layer.width())};
  CHECK(predict(zero, Matrix::Random(20, 1)).cwiseAbs().maxCoeff() == 0.0);

  // Single linear neuron with the bias weight pinned to zero fits y = 2x
  // exactly (a random bias would make the one-dimensional span miss it).
  HiddenLayer line;
  line.input_dim = 1;
  line.weights.resize(2, 1);
  line.weights << 1.0, 0.0;
  line.kinds = {Activation::linear};
  Matrix x(5, 1);
  x << -2, -1, 0.5, 1, 3;
  Vector y = 2.0 * x.col(0);
  ElmModel model = train(x, y, line, 0.0);
  Vector pred = predict(model, x);
  CHECK((pred - y).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("train: residuals from predict match downstream definition") {
  GeneratorSpec spec;
  spec.n = 128;
  spec.seed = 30;
  Dataset data = synth(spec);
  HiddenLayer layer = init_hidden_layer(1, specs_1lin_10tanh(), 31);
  ElmModel model = train(data.x, data.y, layer, 1e-3);
  Vector residual = data.y - predict(model, data.x);
  Vector by_hand = data.y - hidden_transform(layer, data.x) * model.beta;
  CHECK(oracles::relative_error(residual, by_hand) < 1e-12);
}

TEST_CASE("train: preconditions") {
  HiddenLayer layer = init_hidden_layer(2, specs_1lin_10tanh(), 1);
  CHECK_THROWS_AS(train(Matrix::Zero(0, 2), Vector::Zero(0), layer, 1.0), DataError);
  CHECK_THROWS_AS(train(Matrix::Zero(4, 2), Vector::Zero(4), layer, 0.0),
                  ConfigError);  // N < L needs gamma > 0
  CHECK_THROWS_AS(train(Matrix::Zero(4, 2), Vector::Zero(3), layer, 1.0), ShapeError);
}

TEST_CASE("regularization monotonicity: larger gamma shrinks beta") {
  GeneratorSpec spec;
  spec.n = 200;
  spec.seed = 12;
  Dataset data = synth(spec);
  HiddenLayer layer = init_hidden_layer(1, specs_1lin_10tanh(), 13);
  SeededRng rng(99);
  double prev_gamma = 0.0;
  for (int i = 0; i < 6; ++i) {
    double g1 = std::pow(10.0, rng.uniform(-6.0, 4.0));
    double g2 = g1 * (1.0 + rng.uniform01() * 10.0);
    double n1 = train(data.x, data.y, layer, g1).beta.norm();
    double n2 = train(data.x, data.y, layer, g2).beta.norm();
    CHECK(n1 >= n2);
    prev_gamma = g1;
  }
  (void)prev_gamma;
}

TEST_CASE("select_gamma: singleton grid") {
  GeneratorSpec spec;
  spec.n = 60;
  spec.seed = 2;
  Dataset data = synth(spec);
  HiddenLayer layer = init_hidden_layer(1, specs_1lin_10tanh(), 3);
  std::array<double, 1> grid{0.125};
  GammaSelection sel = select_gamma(data.x, data.y, layer, grid, 0.25, 5);
  CHECK(sel.gamma == 0.125);
  CHECK(sel.val_mse.size() == 1);
}

TEST_CASE("select_gamma: pure noise favors maximal shrinkage") {
  SeededRng rng(70);
  Matrix x(400, 3);
  Vector y(400);
  for (Index i = 0; i < 400; ++i) {
    y(i) = rng.normal();
    for (Index j = 0; j < 3; ++j) x(i, j) = rng.normal();
  }
  HiddenLayer layer = init_hidden_layer(3, specs_1lin_10tanh(), 8);
  std::array<double, 7> grid{1e-6, 1e-4, 1e-2, 1.0, 1e2, 1e4, 1e6};
  GammaSelection sel = select_gamma(x, y, layer, grid, 0.3, 5);
  CHECK(sel.gamma == 1e6);
}

TEST_CASE("select_gamma: low-noise data has an interior or left-edge minimum") {
  GeneratorSpec spec;
  spec.noise = NoiseModel::constant;
  spec.noise_level = 0.05;
  spec.n = 500;
  spec.seed = 14;
  Dataset data = synth(spec);
  StandardizationParams std_params = fit_standardizer(data.x);
  Matrix xs = apply_standardizer(std_params, data.x);
  HiddenLayer layer = init_hidden_layer(1, specs_1lin_10tanh(), 15);
  std::array<double, 7> grid{1e-6, 1e-4, 1e-2, 1.0, 1e2, 1e4, 1e6};
  GammaSelection sel = select_gamma(xs, data.y, layer, grid, 0.25, 6);
  std::size_t argmin = 0;
  for (std::size_t g = 1; g < sel.val_mse.size(); ++g)
    if (sel.val_mse[g] < sel.val_mse[argmin]) argmin = g;
  CHECK(argmin < sel.val_mse.size() - 1);
}

TEST_CASE("select_gamma: preconditions") {
  Matrix x = Matrix::Random(10, 2);
  Vector y = Vector::Random(10);
  HiddenLayer layer = init_hidden_layer(2, specs_1lin_10tanh(), 1);
  CHECK_THROWS_AS(select_gamma(x, y, layer, std::span<const double>{}, 0.2, 1),
                  ConfigError);
  std::array<double, 1> grid{1.0};
  CHECK_THROWS_AS(select_gamma(x, y, layer, grid, 0.0, 1), ConfigError);
  CHECK_THROWS_AS(select_gamma(Matrix::Random(1, 2), Vector::Random(1), layer,
                               grid, 0.5, 1),
                  ConfigError);
}

TEST_CASE("stability proxy: test RMSE varies <10% across seeds at L=500") {
  GeneratorSpec spec;
  spec.n = 1500;
  spec.seed = 50;
  Dataset data = synth(spec);
  auto [train_set, test_set] = split(data, 0.7, 51);
  StandardizationParams std_params = fit_standardizer(train_set.x);
  Matrix xs_train = apply_standardizer(std_params, train_set.x);
  Matrix xs_test = apply_standardizer(std_params, test_set.x);
  std::vector<NeuronSpec> wide{{Activation::linear, 1}, {Activation::tanh, 499}};
  std::array<double, 5> grid{1e-4, 1e-2, 1.0, 1e2, 1e4};

  std::vector<double> rmse;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    HiddenLayer layer = init_hidden_layer(1, wide, 1000 + seed);
    double gamma = select_gamma(xs_train, train_set.y, layer, grid, 0.2, 52).gamma;
    ElmModel model = train(xs_train, train_set.y, layer, gamma);
    Vector pred = predict(model, xs_test);
    rmse.push_back(std::sqrt((pred - test_set.y).squaredNorm() /
                             static_cast<double>(test_set.y.size())));
  }
  double mean = 0.0;
  for (double r : rmse) mean += r;
  mean /= static_cast<double>(rmse.size());
  double var = 0.0;
  for (double r : rmse) var += (r - mean) * (r - mean);
  var /= static_cast<double>(rmse.size());
  CHECK(std::sqrt(var) / mean < 0.10);
}
