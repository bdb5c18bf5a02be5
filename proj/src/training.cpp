#include "mccnn/training.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>

#include "mccnn/evaluation.hpp"
#include "mccnn/rng.hpp"

namespace mccnn {

void TrainConfig::validate() const {
  if (learning_rate <= 0.0) throw std::runtime_error("learning_rate must be > 0");
  if (beta1 <= 0.0 || beta1 >= 1.0) throw std::runtime_error("beta1 must be in (0,1)");
  if (beta2 <= 0.0 || beta2 >= 1.0) throw std::runtime_error("beta2 must be in (0,1)");
  if (epsilon <= 0.0) throw std::runtime_error("epsilon must be > 0");
  if (batch_size == 0) throw std::runtime_error("batch_size must be >= 1");
  if (max_epochs == 0) throw std::runtime_error("max_epochs must be >= 1");
  if (dev_fraction <= 0.0 || dev_fraction >= 1.0) {
    throw std::runtime_error("dev_fraction must be in (0,1)");
  }
}

std::pair<std::vector<Example>, std::vector<Example>> stratified_split(
    const std::vector<Example>& dataset, double dev_fraction, std::uint64_t seed) {
  if (dev_fraction <= 0.0 || dev_fraction >= 1.0) {
    throw std::runtime_error("dev_fraction must be in (0,1)");
  }
  int max_label = -1;
  for (const Example& example : dataset) {
    if (!example.label.has_value()) {
      throw std::runtime_error("example '" + example.id + "' has no label");
    }
    max_label = std::max(max_label, *example.label);
  }
  if (max_label < 0) throw std::runtime_error("dataset is empty");

  std::vector<std::vector<std::size_t>> by_class(max_label + 1);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    by_class[*dataset[i].label].push_back(i);
  }
  Rng rng(seed);
  std::vector<bool> in_dev(dataset.size(), false);
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& indices = by_class[c];
    if (indices.empty()) {
      throw std::runtime_error("class " + std::to_string(c) + " has no examples");
    }
    rng.shuffle(indices);
    const std::size_t take = static_cast<std::size_t>(
        std::ceil(static_cast<double>(indices.size()) * dev_fraction));
    for (std::size_t i = 0; i < take; ++i) in_dev[indices[i]] = true;
  }

  std::vector<Example> train;
  std::vector<Example> dev;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    (in_dev[i] ? dev : train).push_back(dataset[i]);
  }
  return {std::move(train), std::move(dev)};
}

AdamState AdamState::zeros_like(const MCCNNModel& model) {
  AdamState state;
  for (const ConstTensorView& tensor : param_tensors(model)) {
    state.m.emplace_back(tensor.values.size(), 0.0);
    state.v.emplace_back(tensor.values.size(), 0.0);
  }
  return state;
}

void adam_step(MCCNNModel& model, const GradientSet& grads, AdamState& state,
               std::size_t t, const TrainConfig& config) {
  if (t == 0) throw std::runtime_error("adam step index must be >= 1");
  auto tensors = param_tensors(model);
  if (grads.tensors.size() != tensors.size() || state.m.size() != tensors.size()) {
    throw std::runtime_error("adam update: tensor count mismatch");
  }
  const double bias1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
  const double bias2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));
  for (std::size_t ti = 0; ti < tensors.size(); ++ti) {
    auto values = tensors[ti].values;
    const auto& g = grads.tensors[ti];
    if (g.size() != values.size()) {
      throw std::runtime_error("adam update: shape mismatch in " + tensors[ti].name);
    }
    auto& m = state.m[ti];
    auto& v = state.v[ti];
    for (std::size_t i = 0; i < values.size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
      const double m_hat = m[i] / bias1;
      const double v_hat = v[i] / bias2;
      values[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
    }
  }
}

namespace {

void check_labels(const std::vector<EmbeddedExample>& examples, std::size_t num_classes,
                  const char* which) {
  if (examples.empty()) {
    throw std::runtime_error(std::string(which) + " set is empty");
  }
  for (const EmbeddedExample& example : examples) {
    if (!example.label.has_value()) {
      throw std::runtime_error(std::string(which) + " example '" + example.id +
                               "' has no label");
    }
    if (*example.label < 0 ||
        static_cast<std::size_t>(*example.label) >= num_classes) {
      throw std::runtime_error(std::string(which) + " example '" + example.id +
                               "' has label outside the " +
                               std::to_string(num_classes) + "-class schema");
    }
  }
}

struct DevScore {
  double macro_f1 = 0.0;
  double accuracy = 0.0;
};

DevScore score_dev(const MCCNNModel& model, const std::vector<EmbeddedExample>& dev) {
  std::vector<std::size_t> predictions(dev.size(), 0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (!omp_in_parallel())
#endif
  for (std::size_t i = 0; i < dev.size(); ++i) {
    predictions[i] = predicted_class(forward(model, dev[i].input));
  }
  ConfusionMatrix cm(model.config.num_classes);
  for (std::size_t i = 0; i < dev.size(); ++i) {
    cm.at(static_cast<std::size_t>(*dev[i].label), predictions[i]) += 1;
  }
  const MetricsReport report = metrics_from_confusion(cm);
  return {report.macro_f1, report.accuracy};
}

}  // namespace

TrainResult train_single(const ModelConfig& config, const TrainConfig& tconfig,
                         const std::vector<EmbeddedExample>& train,
                         const std::vector<EmbeddedExample>& dev) {
  config.validate();
  tconfig.validate();
  check_labels(train, config.num_classes, "train");
  check_labels(dev, config.num_classes, "dev");

  bool dev_single_class = true;
  for (const EmbeddedExample& example : dev) {
    if (*example.label != *dev.front().label) {
      dev_single_class = false;
      break;
    }
  }
  if (dev_single_class) {
    std::cerr << "warning: dev set contains a single class; using accuracy for "
                 "early stopping\n";
  }

  MCCNNModel model = init_model(config, tconfig.seed);
  AdamState state = AdamState::zeros_like(model);
  Rng shuffle_rng(tconfig.seed ^ 0x7a0f3b91d4c25e68ull);

  TrainResult result;
  result.model = model;
  double best_metric = -std::numeric_limits<double>::infinity();
  std::size_t epochs_without_improvement = 0;
  std::size_t step = 0;

  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 0; epoch < tconfig.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += tconfig.batch_size) {
      const std::size_t batch = std::min(tconfig.batch_size, order.size() - start);
      GradientSet accumulated = GradientSet::zeros_like(model);
      for (std::size_t b = 0; b < batch; ++b) {
        const EmbeddedExample& example = train[order[start + b]];
        LossAndGrads lg = model_gradients(model, example.input,
                                          static_cast<std::size_t>(*example.label));
        loss_sum += lg.loss;
        accumulated.add(lg.grads);
      }
      accumulated.scale(1.0 / static_cast<double>(batch));
      adam_step(model, accumulated, state, ++step, tconfig);
    }

    const DevScore score = score_dev(model, dev);
    result.history.train_loss.push_back(loss_sum / static_cast<double>(train.size()));
    result.history.dev_macro_f1.push_back(score.macro_f1);
    result.history.dev_accuracy.push_back(score.accuracy);

    const double metric = dev_single_class ? score.accuracy : score.macro_f1;
    if (metric > best_metric) {
      best_metric = metric;
      result.model = model;
      result.history.best_epoch = epoch;
      epochs_without_improvement = 0;
    } else if (++epochs_without_improvement > tconfig.patience) {
      break;
    }
  }
  return result;
}

Ensemble train_ensemble(const ModelConfig& config, const TrainConfig& tconfig,
                        const std::vector<EmbeddedExample>& train,
                        const std::vector<EmbeddedExample>& dev,
                        std::size_t parallel_members,
                        std::vector<TrainHistory>* histories) {
  config.validate();
  tconfig.validate();
  Ensemble ensemble;
  ensemble.config = config;
  ensemble.members.resize(config.ensemble_size);
  std::vector<TrainHistory> member_histories(config.ensemble_size);

  [[maybe_unused]] const int threads = static_cast<int>(
      std::max<std::size_t>(1, std::min(parallel_members, config.ensemble_size)));
  std::exception_ptr failure;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads) if (threads > 1)
#endif
  for (std::size_t i = 0; i < config.ensemble_size; ++i) {
    try {
      TrainConfig member_config = tconfig;
      member_config.seed = tconfig.seed + i;
      TrainResult trained = train_single(config, member_config, train, dev);
      ensemble.members[i] = std::move(trained.model);
      member_histories[i] = std::move(trained.history);
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical(mccnn_train_failure)
#endif
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  if (histories) *histories = std::move(member_histories);
  return ensemble;
}

}  // namespace mccnn
