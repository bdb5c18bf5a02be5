#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mccnn/numerics.hpp"

namespace mccnn {

// Architecture hyperparameters. Defaults are the tuned configuration:
// filters of width 1-4 with 10/6/4/2 groups of 7 filters each, sigmoid on
// the filters and a tanh hidden layer of size 10.
struct ModelConfig {
  std::size_t embedding_dim = 32;
  std::vector<std::size_t> filter_sizes = {1, 2, 3, 4};
  std::vector<std::size_t> groups_per_size = {10, 6, 4, 2};
  std::size_t group_size = 7;
  Activation filter_activation = Activation::sigmoid;
  std::size_t hidden_size = 10;
  Activation hidden_activation = Activation::tanh;
  std::size_t num_classes = 2;
  std::size_t ensemble_size = 5;
  std::size_t max_tokens = 80;
  std::uint64_t seed = 1;

  // group_size * sum(groups_per_size); length of the concatenated pooled
  // vector (154 for the default configuration).
  std::size_t concat_dim() const;
  void validate() const;  // throws std::runtime_error on inconsistency

  bool operator==(const ModelConfig&) const = default;
};

struct MCCNNModel {
  ModelConfig config;
  std::vector<FilterBank> banks;  // one per filter size
  DenseLayer hidden;              // concat_dim -> hidden_size
  DenseLayer output;              // hidden_size -> num_classes, identity
};

struct Ensemble {
  ModelConfig config;
  std::vector<MCCNNModel> members;
};

// Canonical parameter-tensor listing shared by the optimizer, the
// finite-difference oracle and serialization. Biases are 1 x n tensors.
struct TensorView {
  std::string name;
  std::size_t rows = 0, cols = 0;
  std::span<double> values;
};
struct ConstTensorView {
  std::string name;
  std::size_t rows = 0, cols = 0;
  std::span<const double> values;
};
std::vector<TensorView> param_tensors(MCCNNModel& model);
std::vector<ConstTensorView> param_tensors(const MCCNNModel& model);

// Weights uniform on +-sqrt(6/(fan_in+fan_out)), biases zero; fully
// deterministic given (config, seed).
MCCNNModel init_model(const ModelConfig& config, std::uint64_t seed);

// Members seeded config.seed + i.
Ensemble init_ensemble(const ModelConfig& config);

// Intermediate activations of one forward pass; `group_probs` is the
// inspection hook for the per-group softmax output.
struct ForwardTrace {
  std::vector<std::vector<double>> pooled;            // per bank
  std::vector<std::vector<std::size_t>> pool_argmax;  // per bank
  std::vector<double> concat;       // pooled activations, bank order
  std::vector<double> group_probs;  // after the grouped softmax
  std::vector<double> hidden_out;
  std::vector<double> logits;
  std::vector<double> probs;
};

ForwardTrace forward_trace(const MCCNNModel& model, const Matrix& seq);

// Class probabilities for one input sequence.
std::vector<double> forward(const MCCNNModel& model, const Matrix& seq);

// Arithmetic mean of member probability vectors, in member-index order.
std::vector<double> ensemble_predict(const Ensemble& ensemble, const Matrix& seq);

// Argmax with ties broken to the lowest class index.
std::size_t predicted_class(const std::vector<double>& probs);

std::size_t count_parameters(const ModelConfig& config);

// Versioned text checkpoint; values are written as hexadecimal floats so the
// round trip is bit-exact.
void save_model(const Ensemble& ensemble, const std::string& path);
Ensemble load_model(const std::string& path);

}  // namespace mccnn
