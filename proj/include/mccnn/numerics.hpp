#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mccnn/matrix.hpp"

namespace mccnn {

enum class Activation { sigmoid, relu, tanh, identity };

std::string to_string(Activation activation);
Activation activation_from_string(const std::string& name);

double apply_activation(Activation activation, double x);
// Derivative expressed through the activation's output value.
double activation_grad(Activation activation, double output);

// One convolution filter bank: `count` filters of width `width` (token
// n-gram size) over d-dimensional rows. Weight row f is the filter laid out
// as width*d contiguous values.
struct FilterBank {
  std::size_t width = 1;
  std::size_t count = 0;
  Matrix weights;               // count x (width * d)
  std::vector<double> biases;   // count
};

struct DenseLayer {
  Matrix weights;               // out x in
  std::vector<double> biases;   // out
  Activation activation = Activation::identity;
};

// Multiply-add count below which kernels skip the parallel path; forking a
// team costs more than the loop at small sizes.
inline constexpr std::size_t kParallelWorkThreshold = 1u << 16;

// Convolution + elementwise activation + max-over-time pooling. Sequences
// shorter than the filter width are zero-padded to the width, so the kernel
// is total. Ties in the max break to the lowest position; when `argmax` is
// non-null it receives the winning position per filter.
std::vector<double> conv_pool(const Matrix& seq, const FilterBank& bank,
                              Activation activation,
                              std::vector<std::size_t>* argmax = nullptr);

// Softmax over consecutive blocks of `group_size` entries; the input length
// must be divisible by the group size. Each block is max-subtracted.
std::vector<double> grouped_softmax(const std::vector<double>& v,
                                    std::size_t group_size);

std::vector<double> dense_forward(const std::vector<double>& x, const DenseLayer& layer);

// Max-subtracted softmax.
std::vector<double> softmax(const std::vector<double>& v);

struct CrossEntropyResult {
  double loss = 0.0;
  std::vector<double> dlogits;  // softmax(logits) - onehot(true_class)
};

// Fused softmax + categorical cross-entropy; numerically stable.
CrossEntropyResult softmax_cross_entropy(const std::vector<double>& logits,
                                         std::size_t true_class);

}  // namespace mccnn
