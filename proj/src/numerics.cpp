#include "mccnn/numerics.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mccnn {

std::string to_string(Activation activation) {
  switch (activation) {
    case Activation::sigmoid: return "sigmoid";
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::identity: return "identity";
  }
  return "?";
}

Activation activation_from_string(const std::string& name) {
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "relu") return Activation::relu;
  if (name == "tanh") return Activation::tanh;
  if (name == "identity") return Activation::identity;
  throw std::runtime_error("unknown activation '" + name + "'");
}

double apply_activation(Activation activation, double x) {
  switch (activation) {
    case Activation::sigmoid: return 1.0 / (1.0 + std::exp(-x));
    case Activation::relu: return x > 0.0 ? x : 0.0;
    case Activation::tanh: return std::tanh(x);
    case Activation::identity: return x;
  }
  return x;
}

double activation_grad(Activation activation, double output) {
  switch (activation) {
    case Activation::sigmoid: return output * (1.0 - output);
    case Activation::relu: return output > 0.0 ? 1.0 : 0.0;
    case Activation::tanh: return 1.0 - output * output;
    case Activation::identity: return 1.0;
  }
  return 1.0;
}

namespace {

void check_conv_shapes(const Matrix& seq, const FilterBank& bank) {
  if (bank.weights.rows != bank.count || bank.biases.size() != bank.count) {
    throw std::runtime_error("filter bank has inconsistent weight/bias shapes");
  }
  if (bank.weights.cols != bank.width * seq.cols) {
    throw std::runtime_error("filter bank expects rows of dimension " +
                             std::to_string(bank.weights.cols /
                                            std::max<std::size_t>(bank.width, 1)) +
                             ", sequence has " + std::to_string(seq.cols));
  }
}

}  // namespace

std::vector<double> conv_pool(const Matrix& seq, const FilterBank& bank,
                              Activation activation,
                              std::vector<std::size_t>* argmax) {
  check_conv_shapes(seq, bank);
  const std::size_t k = bank.width;
  const std::size_t d = seq.cols;
  const std::size_t positions = std::max(seq.rows, k) - k + 1;
  std::vector<double> pooled(bank.count, 0.0);
  std::vector<std::size_t> winners;
  if (argmax) winners.assign(bank.count, 0);

  // Each filter's slot is computed by exactly one thread with a fixed inner
  // order, so the result does not depend on the thread count.
  auto run_filter = [&](std::size_t f) {
    const double* w = bank.weights.row(f).data();
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_p = 0;
    for (std::size_t p = 0; p < positions; ++p) {
      double pre = bank.biases[f];
      for (std::size_t r = 0; r < k; ++r) {
        const std::size_t row = p + r;
        if (row >= seq.rows) continue;  // zero padding
        const double* x = seq.row(row).data();
        const double* wr = w + r * d;
        for (std::size_t c = 0; c < d; ++c) pre += wr[c] * x[c];
      }
      const double a = apply_activation(activation, pre);
      if (a > best) {
        best = a;
        best_p = p;
      }
    }
    pooled[f] = best;
    if (argmax) winners[f] = best_p;
  };

#ifdef _OPENMP
  if (bank.count * positions * k * d >= kParallelWorkThreshold && !omp_in_parallel()) {
#pragma omp parallel for schedule(static)
    for (std::size_t f = 0; f < bank.count; ++f) run_filter(f);
  } else {
    for (std::size_t f = 0; f < bank.count; ++f) run_filter(f);
  }
#else
  for (std::size_t f = 0; f < bank.count; ++f) run_filter(f);
#endif
  if (argmax) *argmax = std::move(winners);
  return pooled;
}

std::vector<double> grouped_softmax(const std::vector<double>& v,
                                    std::size_t group_size) {
  if (group_size == 0 || v.size() % group_size != 0) {
    throw std::runtime_error("vector length " + std::to_string(v.size()) +
                             " is not divisible by group size " +
                             std::to_string(group_size));
  }
  std::vector<double> out(v.size());
  for (std::size_t start = 0; start < v.size(); start += group_size) {
    double block_max = v[start];
    for (std::size_t i = 1; i < group_size; ++i) {
      block_max = std::max(block_max, v[start + i]);
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < group_size; ++i) {
      out[start + i] = std::exp(v[start + i] - block_max);
      sum += out[start + i];
    }
    for (std::size_t i = 0; i < group_size; ++i) out[start + i] /= sum;
  }
  return out;
}

std::vector<double> dense_forward(const std::vector<double>& x, const DenseLayer& layer) {
  if (layer.weights.cols != x.size() || layer.biases.size() != layer.weights.rows) {
    throw std::runtime_error("dense layer expects input of size " +
                             std::to_string(layer.weights.cols) + ", got " +
                             std::to_string(x.size()));
  }
  std::vector<double> out(layer.weights.rows);
  for (std::size_t r = 0; r < layer.weights.rows; ++r) {
    double acc = layer.biases[r];
    const double* w = layer.weights.row(r).data();
    for (std::size_t c = 0; c < x.size(); ++c) acc += w[c] * x[c];
    out[r] = apply_activation(layer.activation, acc);
  }
  return out;
}

std::vector<double> softmax(const std::vector<double>& v) {
  if (v.empty()) throw std::runtime_error("softmax of an empty vector");
  const double mx = *std::max_element(v.begin(), v.end());
  std::vector<double> out(v.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - mx);
    sum += out[i];
  }
  for (double& value : out) value /= sum;
  return out;
}

CrossEntropyResult softmax_cross_entropy(const std::vector<double>& logits,
                                         std::size_t true_class) {
  if (true_class >= logits.size()) {
    throw std::out_of_range("true class " + std::to_string(true_class) +
                            " out of range for " + std::to_string(logits.size()) +
                            " logits");
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  CrossEntropyResult result;
  result.dlogits.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    result.dlogits[i] = std::exp(logits[i] - mx);
    sum += result.dlogits[i];
  }
  result.loss = -(logits[true_class] - mx - std::log(sum));
  for (std::size_t i = 0; i < logits.size(); ++i) {
    result.dlogits[i] /= sum;
  }
  result.dlogits[true_class] -= 1.0;
  return result;
}

}  // namespace mccnn
