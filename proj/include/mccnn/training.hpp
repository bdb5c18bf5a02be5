#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mccnn/embeddings.hpp"
#include "mccnn/gradients.hpp"
#include "mccnn/model.hpp"
#include "mccnn/text_pipeline.hpp"

namespace mccnn {

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 30;
  std::size_t patience = 5;  // epochs tolerated without dev improvement
  double dev_fraction = 0.1;
  std::uint64_t seed = 1;

  void validate() const;
};

struct TrainHistory {
  std::vector<double> train_loss;
  std::vector<double> dev_macro_f1;
  std::vector<double> dev_accuracy;
  std::size_t best_epoch = 0;
};

// Per class, ceil(count * dev_fraction) examples go to dev, chosen by seeded
// shuffle. Both halves keep the input's relative order.
std::pair<std::vector<Example>, std::vector<Example>> stratified_split(
    const std::vector<Example>& dataset, double dev_fraction, std::uint64_t seed);

// First/second-moment accumulators, index-aligned with param_tensors.
struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;

  static AdamState zeros_like(const MCCNNModel& model);
};

// One adaptive-moment update with bias correction; t is the 1-based step.
void adam_step(MCCNNModel& model, const GradientSet& grads, AdamState& state,
               std::size_t t, const TrainConfig& config);

struct TrainResult {
  MCCNNModel model;
  TrainHistory history;
};

// Mini-batch training with per-batch mean gradients, early stopping on dev
// macro-F1 (accuracy when the dev set has a single class), returning the
// parameters from the best dev epoch.
TrainResult train_single(const ModelConfig& config, const TrainConfig& tconfig,
                         const std::vector<EmbeddedExample>& train,
                         const std::vector<EmbeddedExample>& dev);

// Trains config.ensemble_size members, member i seeded tconfig.seed + i.
// Members are independent; with parallel_members > 1 they train on separate
// threads and are merged in member-index order, so the result does not
// depend on the thread count.
Ensemble train_ensemble(const ModelConfig& config, const TrainConfig& tconfig,
                        const std::vector<EmbeddedExample>& train,
                        const std::vector<EmbeddedExample>& dev,
                        std::size_t parallel_members = 1,
                        std::vector<TrainHistory>* histories = nullptr);

}  // namespace mccnn
