#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mccnn/gradients.hpp"
#include "mccnn/reference.hpp"
#include "mccnn/rng.hpp"

using namespace mccnn;

namespace {

Matrix random_sequence(Rng& rng, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (double& value : m.data) value = rng.uniform(-1.0, 1.0);
  return m;
}

ModelConfig check_config() {
  ModelConfig config;
  config.embedding_dim = 3;
  config.filter_sizes = {1, 2, 3};
  config.groups_per_size = {2, 1, 1};
  config.group_size = 2;
  config.hidden_size = 4;
  config.num_classes = 3;
  return config;
}

}  // namespace

TEST_CASE("central_difference is exact for quadratics") {
  const auto square = [](double x) { return x * x; };
  CHECK(std::abs(central_difference(square, 3.0, 1e-5) - 6.0) <= 1e-9);
}

TEST_CASE("zero-parameter model: loss ln C, output bias gradient softmax-onehot") {
  ModelConfig config = check_config();
  MCCNNModel model = init_model(config, 1);
  for (TensorView tensor : param_tensors(model)) {
    std::fill(tensor.values.begin(), tensor.values.end(), 0.0);
  }
  Rng rng(2);
  const Matrix seq = random_sequence(rng, 5, 3);
  const LossAndGrads result = model_gradients(model, seq, 1);
  CHECK(result.loss == doctest::Approx(std::log(3.0)).epsilon(1e-14));

  const auto tensors = result.grads.tensors;
  const std::size_t out_bias = tensors.size() - 1;
  CHECK(tensors[out_bias][0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(tensors[out_bias][1] == doctest::Approx(1.0 / 3.0 - 1.0).epsilon(1e-12));
  CHECK(tensors[out_bias][2] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  // Everything upstream of the zero output weights gets zero gradient.
  for (std::size_t t = 0; t + 1 < tensors.size(); ++t) {
    for (double g : tensors[t]) CHECK(g == 0.0);
  }
}

TEST_CASE("analytic gradients match finite differences") {
  Rng rng(101);
  for (int trial = 0; trial < 3; ++trial) {
    ModelConfig config = check_config();
    config.filter_activation =
        trial == 0 ? Activation::sigmoid : (trial == 1 ? Activation::tanh
                                                       : Activation::relu);
    // Trial 2 exercises the zero-padding path (fewer tokens than the widest
    // filter).
    const std::size_t tokens = trial == 2 ? 1 : 6;
    const MCCNNModel model = init_model(config, 7 + trial);
    const Matrix seq = random_sequence(rng, tokens, config.embedding_dim);
    const std::size_t true_class = trial % config.num_classes;

    const LossAndGrads analytic = model_gradients(model, seq, true_class);
    const GradientSet numeric =
        finite_difference_gradients(model, seq, true_class, 1e-5);
    CHECK(max_relative_error(analytic.grads, numeric) <= 1e-4);
  }
}

TEST_CASE("gradient_check runs seeded trials under the tolerance") {
  const GradientCheckReport report = gradient_check(1, 3);
  CHECK(report.trials == 3);
  CHECK(report.max_rel_error <= 1e-4);
}

TEST_CASE("max-pool-inactive weight has zero gradient from both methods") {
  ModelConfig config;
  config.embedding_dim = 2;
  config.filter_sizes = {1};
  config.groups_per_size = {1};
  config.group_size = 3;
  config.hidden_size = 2;
  config.num_classes = 2;
  MCCNNModel model = init_model(config, 5);
  // Filters prefer position 0: column 0 carries a large value there and the
  // weight on column 1 is tiny. Column 1 is zero at position 0, so its
  // weight is inactive for every filter.
  for (std::size_t f = 0; f < model.banks[0].count; ++f) {
    model.banks[0].weights(f, 0) = 1.0 + 0.1 * static_cast<double>(f);
    model.banks[0].weights(f, 1) = 1e-3;
    model.banks[0].biases[f] = 0.0;
  }
  Matrix seq(2, 2);
  seq(0, 0) = 5.0;
  seq(0, 1) = 0.0;
  seq(1, 0) = 1.0;
  seq(1, 1) = 3.0;

  const LossAndGrads analytic = model_gradients(model, seq, 0);
  const GradientSet numeric = finite_difference_gradients(model, seq, 0, 1e-5);
  for (std::size_t f = 0; f < model.banks[0].count; ++f) {
    const std::size_t column1 = f * 2 + 1;
    CHECK(analytic.grads.tensors[0][column1] == 0.0);
    CHECK(numeric.tensors[0][column1] == 0.0);
  }
}

TEST_CASE("parallel and reference gradients agree bit for bit") {
  Rng rng(71);
  for (int trial = 0; trial < 10; ++trial) {
    ModelConfig config = check_config();
    const MCCNNModel model = init_model(config, rng.next_u64());
    const Matrix seq = random_sequence(rng, rng.below(6), 3);
    const std::size_t true_class = rng.below(config.num_classes);
    const LossAndGrads parallel = model_gradients(model, seq, true_class);
    const LossAndGrads serial = reference::model_gradients(model, seq, true_class);
    CHECK(parallel.loss == serial.loss);
    REQUIRE(parallel.grads.tensors.size() == serial.grads.tensors.size());
    for (std::size_t t = 0; t < parallel.grads.tensors.size(); ++t) {
      CHECK(parallel.grads.tensors[t] == serial.grads.tensors[t]);
    }
  }
}

TEST_CASE("forward matches the serial reference") {
  Rng rng(81);
  const MCCNNModel model = init_model(check_config(), 17);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix seq = random_sequence(rng, 1 + rng.below(8), 3);
    CHECK(forward(model, seq) == reference::forward(model, seq));
  }
}
