#pragma once

#include <cstdint>
#include <vector>

#include "mccnn/model.hpp"

namespace mccnn {

// Per-tensor gradient arrays, index-aligned with param_tensors(model).
struct GradientSet {
  std::vector<std::vector<double>> tensors;

  static GradientSet zeros_like(const MCCNNModel& model);
  void add(const GradientSet& other);
  void scale(double factor);
};

struct LossAndGrads {
  double loss = 0.0;
  GradientSet grads;
};

// Cross-entropy loss of the forward pass, without retaining gradients.
double model_loss(const MCCNNModel& model, const Matrix& seq, std::size_t true_class);

// Exact reverse-mode gradients of the loss with respect to every model
// parameter. Max-pool routes the gradient to the recorded argmax position
// only (ties already broken to the lowest position by conv_pool).
LossAndGrads model_gradients(const MCCNNModel& model, const Matrix& seq,
                             std::size_t true_class);

// Central differences (L(t+eps) - L(t-eps)) / (2 eps), one scalar parameter
// at a time. Testing oracle for model_gradients.
GradientSet finite_difference_gradients(const MCCNNModel& model, const Matrix& seq,
                                        std::size_t true_class, double eps = 1e-5);

// max over parameters of |a-b| / max(|a|, |b|, floor).
double max_relative_error(const GradientSet& a, const GradientSet& b,
                          double floor = 1e-5);

// Central difference of a scalar function, same scheme the parameter-wise
// oracle uses.
template <typename F>
double central_difference(F&& f, double x, double eps) {
  return (f(x + eps) - f(x - eps)) / (2.0 * eps);
}

struct GradientCheckReport {
  double max_rel_error = 0.0;
  std::size_t trials = 0;
};

// Runs model_gradients against the finite-difference oracle on seeded random
// (config, input, class) triples, including one with fewer tokens than the
// widest filter.
GradientCheckReport gradient_check(std::uint64_t seed, std::size_t trials,
                                   double eps = 1e-5);

}  // namespace mccnn
