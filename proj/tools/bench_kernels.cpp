// Benchmark comparing the OpenMP kernels against the serial reference
// implementations. Also verifies that both paths produce identical results.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mccnn/gradients.hpp"
#include "mccnn/model.hpp"
#include "mccnn/reference.hpp"
#include "mccnn/rng.hpp"

using namespace mccnn;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

Matrix random_sequence(Rng& rng, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (double& value : m.data) value = rng.uniform(-1.0, 1.0);
  return m;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a[i] - b[i]));
  }
  return worst;
}

void print_row(const char* name, double serial_ms, double parallel_ms, double diff) {
  std::printf("%-18s %10.2f ms %10.2f ms %8.2fx   max|diff| %.3g\n", name, serial_ms,
              parallel_ms, serial_ms / parallel_ms, diff);
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t iterations = 200;
  if (argc > 1) iterations = std::strtoull(argv[1], nullptr, 10);

#ifdef _OPENMP
  std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
  std::printf("openmp: not enabled (both paths serial)\n");
#endif

  ModelConfig config;
  config.embedding_dim = 64;
  const MCCNNModel model = init_model(config, 1);

  Rng rng(2);
  std::vector<Matrix> inputs;
  for (std::size_t i = 0; i < iterations; ++i) {
    inputs.push_back(random_sequence(rng, 80, config.embedding_dim));
  }

  std::printf("%-18s %13s %13s %9s\n", "kernel", "serial", "openmp", "speedup");

  // Warm both paths (and the allocator) before timing anything.
  (void)reference::forward(model, inputs.front());
  (void)forward(model, inputs.front());
  (void)reference::model_gradients(model, inputs.front(), 0);
  (void)model_gradients(model, inputs.front(), 0);

  // Forward pass.
  {
    std::vector<double> serial_out;
    auto t0 = Clock::now();
    for (const Matrix& seq : inputs) serial_out = reference::forward(model, seq);
    const double serial_ms = ms_since(t0);

    std::vector<double> parallel_out;
    t0 = Clock::now();
    for (const Matrix& seq : inputs) parallel_out = forward(model, seq);
    const double parallel_ms = ms_since(t0);
    print_row("forward", serial_ms, parallel_ms,
              max_abs_diff(serial_out, parallel_out));
  }

  // Backward pass.
  {
    LossAndGrads serial_out;
    auto t0 = Clock::now();
    for (const Matrix& seq : inputs) {
      serial_out = reference::model_gradients(model, seq, 0);
    }
    const double serial_ms = ms_since(t0);

    LossAndGrads parallel_out;
    t0 = Clock::now();
    for (const Matrix& seq : inputs) parallel_out = model_gradients(model, seq, 0);
    const double parallel_ms = ms_since(t0);

    double diff = std::abs(serial_out.loss - parallel_out.loss);
    for (std::size_t t = 0; t < serial_out.grads.tensors.size(); ++t) {
      diff = std::max(diff, max_abs_diff(serial_out.grads.tensors[t],
                                         parallel_out.grads.tensors[t]));
    }
    print_row("model_gradients", serial_ms, parallel_ms, diff);
  }

  // Finite differences: thread count is the only difference between runs.
  {
    ModelConfig fd_config;
    fd_config.embedding_dim = 32;
    fd_config.filter_sizes = {1, 2, 3};
    fd_config.groups_per_size = {2, 1, 1};
    const MCCNNModel fd_model = init_model(fd_config, 3);
    const Matrix seq = random_sequence(rng, 40, fd_config.embedding_dim);

    (void)reference::finite_difference_gradients(fd_model, seq, 0);  // warmup
    (void)finite_difference_gradients(fd_model, seq, 0);

    auto t0 = Clock::now();
    const GradientSet serial_fd =
        reference::finite_difference_gradients(fd_model, seq, 0);
    const double serial_ms = ms_since(t0);

    t0 = Clock::now();
    const GradientSet parallel_fd = finite_difference_gradients(fd_model, seq, 0);
    const double parallel_ms = ms_since(t0);

    double diff = 0.0;
    for (std::size_t t = 0; t < serial_fd.tensors.size(); ++t) {
      diff = std::max(diff, max_abs_diff(serial_fd.tensors[t], parallel_fd.tensors[t]));
    }
    print_row("finite_diff", serial_ms, parallel_ms, diff);
  }

  // Ensemble prediction.
  {
    ModelConfig ens_config = config;
    ens_config.ensemble_size = 5;
    const Ensemble ensemble = init_ensemble(ens_config);
    (void)reference::ensemble_predict(ensemble, inputs.front());
    (void)ensemble_predict(ensemble, inputs.front());

    std::vector<double> serial_out;
    auto t0 = Clock::now();
    for (const Matrix& seq : inputs) {
      serial_out = reference::ensemble_predict(ensemble, seq);
    }
    const double serial_ms = ms_since(t0);

    std::vector<double> parallel_out;
    t0 = Clock::now();
    for (const Matrix& seq : inputs) parallel_out = ensemble_predict(ensemble, seq);
    const double parallel_ms = ms_since(t0);
    print_row("ensemble_predict", serial_ms, parallel_ms,
              max_abs_diff(serial_out, parallel_out));
  }

  return 0;
}
