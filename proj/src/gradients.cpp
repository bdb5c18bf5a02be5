#include "mccnn/gradients.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mccnn/rng.hpp"

namespace mccnn {

GradientSet GradientSet::zeros_like(const MCCNNModel& model) {
  GradientSet set;
  for (const ConstTensorView& tensor : param_tensors(model)) {
    set.tensors.emplace_back(tensor.values.size(), 0.0);
  }
  return set;
}

void GradientSet::add(const GradientSet& other) {
  if (tensors.size() != other.tensors.size()) {
    throw std::runtime_error("gradient sets have different tensor counts");
  }
  for (std::size_t t = 0; t < tensors.size(); ++t) {
    if (tensors[t].size() != other.tensors[t].size()) {
      throw std::runtime_error("gradient tensors have different sizes");
    }
    for (std::size_t i = 0; i < tensors[t].size(); ++i) {
      tensors[t][i] += other.tensors[t][i];
    }
  }
}

void GradientSet::scale(double factor) {
  for (auto& tensor : tensors) {
    for (double& value : tensor) value *= factor;
  }
}

double model_loss(const MCCNNModel& model, const Matrix& seq, std::size_t true_class) {
  // Same arithmetic as forward_trace without materializing the trace; this
  // runs twice per parameter inside the finite-difference loop.
  std::vector<double> concat;
  concat.reserve(model.config.concat_dim());
  for (const FilterBank& bank : model.banks) {
    const std::vector<double> pooled =
        conv_pool(seq, bank, model.config.filter_activation);
    concat.insert(concat.end(), pooled.begin(), pooled.end());
  }
  const std::vector<double> group_probs =
      grouped_softmax(concat, model.config.group_size);
  const std::vector<double> hidden = dense_forward(group_probs, model.hidden);
  const std::vector<double> logits = dense_forward(hidden, model.output);
  return softmax_cross_entropy(logits, true_class).loss;
}

LossAndGrads model_gradients(const MCCNNModel& model, const Matrix& seq,
                             std::size_t true_class) {
  const ForwardTrace trace = forward_trace(model, seq);
  const auto [loss, dlogits] = softmax_cross_entropy(trace.logits, true_class);

  LossAndGrads result;
  result.loss = loss;
  result.grads = GradientSet::zeros_like(model);
  auto& grads = result.grads.tensors;
  const std::size_t num_banks = model.banks.size();
  // Tensor order from param_tensors: per bank (weights, bias), then hidden
  // weights/bias, then output weights/bias.
  auto& d_hidden_w = grads[2 * num_banks];
  auto& d_hidden_b = grads[2 * num_banks + 1];
  auto& d_out_w = grads[2 * num_banks + 2];
  auto& d_out_b = grads[2 * num_banks + 3];

  const std::size_t hidden_size = model.config.hidden_size;
  const std::size_t num_classes = model.config.num_classes;

  // Output layer (identity activation).
  std::vector<double> d_hidden(hidden_size, 0.0);
  for (std::size_t r = 0; r < num_classes; ++r) {
    d_out_b[r] = dlogits[r];
    const double* w = model.output.weights.row(r).data();
    for (std::size_t c = 0; c < hidden_size; ++c) {
      d_out_w[r * hidden_size + c] = dlogits[r] * trace.hidden_out[c];
      d_hidden[c] += w[c] * dlogits[r];
    }
  }

  // Hidden layer.
  const std::size_t concat_dim = trace.group_probs.size();
  std::vector<double> d_group_probs(concat_dim, 0.0);
  for (std::size_t r = 0; r < hidden_size; ++r) {
    const double d_pre =
        d_hidden[r] * activation_grad(model.hidden.activation, trace.hidden_out[r]);
    d_hidden_b[r] = d_pre;
    const double* w = model.hidden.weights.row(r).data();
    for (std::size_t c = 0; c < concat_dim; ++c) {
      d_hidden_w[r * concat_dim + c] = d_pre * trace.group_probs[c];
      d_group_probs[c] += w[c] * d_pre;
    }
  }

  // Grouped softmax: within each block, dz_i = s_i * (ds_i - sum_j s_j ds_j).
  const std::size_t group_size = model.config.group_size;
  std::vector<double> d_concat(concat_dim, 0.0);
  for (std::size_t start = 0; start < concat_dim; start += group_size) {
    double dot = 0.0;
    for (std::size_t i = 0; i < group_size; ++i) {
      dot += trace.group_probs[start + i] * d_group_probs[start + i];
    }
    for (std::size_t i = 0; i < group_size; ++i) {
      d_concat[start + i] =
          trace.group_probs[start + i] * (d_group_probs[start + i] - dot);
    }
  }

  // Filter banks: gradient flows only through each filter's argmax position.
  const std::size_t d = model.config.embedding_dim;
  std::size_t offset = 0;
  for (std::size_t b = 0; b < num_banks; ++b) {
    const FilterBank& bank = model.banks[b];
    auto& d_w = grads[2 * b];
    auto& d_b = grads[2 * b + 1];
    const std::size_t k = bank.width;
    auto run_filter = [&](std::size_t f) {
      const double pooled = trace.pooled[b][f];
      const double d_pre = d_concat[offset + f] *
                           activation_grad(model.config.filter_activation, pooled);
      d_b[f] = d_pre;
      const std::size_t p = trace.pool_argmax[b][f];
      for (std::size_t r = 0; r < k; ++r) {
        const std::size_t row = p + r;
        if (row >= seq.rows) continue;  // zero padding contributes nothing
        const double* x = seq.row(row).data();
        for (std::size_t c = 0; c < d; ++c) {
          d_w[f * (k * d) + r * d + c] = d_pre * x[c];
        }
      }
    };
#ifdef _OPENMP
    if (bank.count * k * d >= kParallelWorkThreshold && !omp_in_parallel()) {
#pragma omp parallel for schedule(static)
      for (std::size_t f = 0; f < bank.count; ++f) run_filter(f);
    } else {
      for (std::size_t f = 0; f < bank.count; ++f) run_filter(f);
    }
#else
    for (std::size_t f = 0; f < bank.count; ++f) run_filter(f);
#endif
    offset += bank.count;
  }
  return result;
}

GradientSet finite_difference_gradients(const MCCNNModel& model, const Matrix& seq,
                                        std::size_t true_class, double eps) {
  if (eps <= 0.0) throw std::runtime_error("finite-difference eps must be > 0");
  if (true_class >= model.config.num_classes) {
    throw std::out_of_range("true class " + std::to_string(true_class) +
                            " out of range for " +
                            std::to_string(model.config.num_classes) + " classes");
  }
  GradientSet grads = GradientSet::zeros_like(model);

  // Flat indexing over all scalar parameters so the loop parallelizes evenly.
  std::vector<std::size_t> tensor_offsets;
  std::size_t total = 0;
  for (const auto& tensor : grads.tensors) {
    tensor_offsets.push_back(total);
    total += tensor.size();
  }

#ifdef _OPENMP
#pragma omp parallel
#endif
  {
    MCCNNModel local = model;  // thread-private copy to perturb
    auto tensors = param_tensors(local);
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
    for (std::size_t flat = 0; flat < total; ++flat) {
      std::size_t t = tensor_offsets.size() - 1;
      while (tensor_offsets[t] > flat) --t;
      const std::size_t i = flat - tensor_offsets[t];
      double& parameter = tensors[t].values[i];
      const double original = parameter;
      parameter = original + eps;
      const double loss_plus = model_loss(local, seq, true_class);
      parameter = original - eps;
      const double loss_minus = model_loss(local, seq, true_class);
      parameter = original;
      grads.tensors[t][i] = (loss_plus - loss_minus) / (2.0 * eps);
    }
  }
  return grads;
}

double max_relative_error(const GradientSet& a, const GradientSet& b, double floor) {
  if (a.tensors.size() != b.tensors.size()) {
    throw std::runtime_error("gradient sets have different tensor counts");
  }
  double worst = 0.0;
  for (std::size_t t = 0; t < a.tensors.size(); ++t) {
    if (a.tensors[t].size() != b.tensors[t].size()) {
      throw std::runtime_error("gradient tensors have different sizes");
    }
    for (std::size_t i = 0; i < a.tensors[t].size(); ++i) {
      const double x = a.tensors[t][i];
      const double y = b.tensors[t][i];
      const double denom = std::max({std::abs(x), std::abs(y), floor});
      worst = std::max(worst, std::abs(x - y) / denom);
    }
  }
  return worst;
}

namespace {

Matrix random_sequence(Rng& rng, std::size_t rows, std::size_t cols) {
  Matrix seq(rows, cols);
  for (double& value : seq.data) value = rng.uniform(-1.0, 1.0);
  return seq;
}

}  // namespace

GradientCheckReport gradient_check(std::uint64_t seed, std::size_t trials, double eps) {
  if (trials == 0) throw std::runtime_error("gradient check needs at least one trial");
  GradientCheckReport report;
  Rng rng(seed);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    ModelConfig config;
    config.embedding_dim = 3 + trial % 4;
    config.group_size = 2 + trial % 3;
    config.hidden_size = 3 + trial % 3;
    config.num_classes = 2 + trial % 2;
    switch (trial % 3) {
      case 0:
        config.filter_sizes = {1, 2, 3, 4};
        config.groups_per_size = {2, 1, 1, 1};
        config.filter_activation = Activation::sigmoid;
        break;
      case 1:
        config.filter_sizes = {1, 3, 4};
        config.groups_per_size = {1, 1, 2};
        config.filter_activation = Activation::tanh;
        break;
      default:
        config.filter_sizes = {2, 3};
        config.groups_per_size = {2, 2};
        config.filter_activation = Activation::relu;
        config.hidden_activation = Activation::identity;
        break;
    }
    // Trial 1 exercises the zero-padding path: fewer tokens than the widest
    // filter.
    const std::size_t max_width =
        *std::max_element(config.filter_sizes.begin(), config.filter_sizes.end());
    const std::size_t tokens = trial % 3 == 1 ? max_width - 2 : max_width + 4;

    const MCCNNModel model = init_model(config, rng.next_u64());
    const Matrix seq = random_sequence(rng, tokens, config.embedding_dim);
    const std::size_t true_class = rng.below(config.num_classes);

    const LossAndGrads analytic = model_gradients(model, seq, true_class);
    const GradientSet numeric = finite_difference_gradients(model, seq, true_class, eps);
    report.max_rel_error =
        std::max(report.max_rel_error, max_relative_error(analytic.grads, numeric));
    ++report.trials;
  }
  return report;
}

}  // namespace mccnn
