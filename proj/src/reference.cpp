#include "mccnn/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mccnn::reference {

std::vector<double> conv_pool(const Matrix& seq, const FilterBank& bank,
                              Activation activation,
                              std::vector<std::size_t>* argmax) {
  if (bank.weights.cols != bank.width * seq.cols) {
    throw std::runtime_error("filter bank / sequence dimension mismatch");
  }
  const std::size_t k = bank.width;
  const std::size_t d = seq.cols;
  const std::size_t positions = std::max(seq.rows, k) - k + 1;
  std::vector<double> pooled(bank.count, 0.0);
  if (argmax) argmax->assign(bank.count, 0);
  for (std::size_t f = 0; f < bank.count; ++f) {
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_p = 0;
    for (std::size_t p = 0; p < positions; ++p) {
      double pre = bank.biases[f];
      for (std::size_t r = 0; r < k; ++r) {
        if (p + r >= seq.rows) continue;
        for (std::size_t c = 0; c < d; ++c) {
          pre += bank.weights(f, r * d + c) * seq(p + r, c);
        }
      }
      const double a = apply_activation(activation, pre);
      if (a > best) {
        best = a;
        best_p = p;
      }
    }
    pooled[f] = best;
    if (argmax) (*argmax)[f] = best_p;
  }
  return pooled;
}

std::vector<double> grouped_softmax(const std::vector<double>& v,
                                    std::size_t group_size) {
  if (group_size == 0 || v.size() % group_size != 0) {
    throw std::runtime_error("vector length not divisible by group size");
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
  if (layer.weights.cols != x.size()) {
    throw std::runtime_error("dense layer / input dimension mismatch");
  }
  std::vector<double> out(layer.weights.rows);
  for (std::size_t r = 0; r < layer.weights.rows; ++r) {
    double acc = layer.biases[r];
    for (std::size_t c = 0; c < x.size(); ++c) acc += layer.weights(r, c) * x[c];
    out[r] = apply_activation(layer.activation, acc);
  }
  return out;
}

std::vector<double> forward(const MCCNNModel& model, const Matrix& seq) {
  std::vector<double> concat;
  concat.reserve(model.config.concat_dim());
  for (const FilterBank& bank : model.banks) {
    const std::vector<double> pooled =
        reference::conv_pool(seq, bank, model.config.filter_activation);
    concat.insert(concat.end(), pooled.begin(), pooled.end());
  }
  const std::vector<double> probs = reference::grouped_softmax(concat, model.config.group_size);
  const std::vector<double> hidden = reference::dense_forward(probs, model.hidden);
  const std::vector<double> logits = reference::dense_forward(hidden, model.output);
  return softmax(logits);
}

std::vector<double> ensemble_predict(const Ensemble& ensemble, const Matrix& seq) {
  if (ensemble.members.empty()) throw std::runtime_error("ensemble has no members");
  std::vector<double> mean(ensemble.config.num_classes, 0.0);
  for (const MCCNNModel& member : ensemble.members) {
    const std::vector<double> probs = reference::forward(member, seq);
    for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += probs[c];
  }
  const double inv = 1.0 / static_cast<double>(ensemble.members.size());
  for (double& value : mean) value *= inv;
  return mean;
}

LossAndGrads model_gradients(const MCCNNModel& model, const Matrix& seq,
                             std::size_t true_class) {
  // Serial mirror of mccnn::model_gradients, without the parallel pragmas.
  std::vector<std::vector<double>> pooled(model.banks.size());
  std::vector<std::vector<std::size_t>> argmax(model.banks.size());
  std::vector<double> concat;
  concat.reserve(model.config.concat_dim());
  for (std::size_t b = 0; b < model.banks.size(); ++b) {
    pooled[b] = reference::conv_pool(seq, model.banks[b],
                                     model.config.filter_activation, &argmax[b]);
    concat.insert(concat.end(), pooled[b].begin(), pooled[b].end());
  }
  const std::vector<double> group_probs =
      reference::grouped_softmax(concat, model.config.group_size);
  const std::vector<double> hidden = reference::dense_forward(group_probs, model.hidden);
  const std::vector<double> logits = reference::dense_forward(hidden, model.output);
  const auto [loss, dlogits] = softmax_cross_entropy(logits, true_class);

  LossAndGrads result;
  result.loss = loss;
  result.grads = GradientSet::zeros_like(model);
  auto& grads = result.grads.tensors;
  const std::size_t num_banks = model.banks.size();
  auto& d_hidden_w = grads[2 * num_banks];
  auto& d_hidden_b = grads[2 * num_banks + 1];
  auto& d_out_w = grads[2 * num_banks + 2];
  auto& d_out_b = grads[2 * num_banks + 3];

  const std::size_t hidden_size = model.config.hidden_size;
  std::vector<double> d_hidden(hidden_size, 0.0);
  for (std::size_t r = 0; r < model.config.num_classes; ++r) {
    d_out_b[r] = dlogits[r];
    for (std::size_t c = 0; c < hidden_size; ++c) {
      d_out_w[r * hidden_size + c] = dlogits[r] * hidden[c];
      d_hidden[c] += model.output.weights(r, c) * dlogits[r];
    }
  }

  const std::size_t concat_dim = group_probs.size();
  std::vector<double> d_group_probs(concat_dim, 0.0);
  for (std::size_t r = 0; r < hidden_size; ++r) {
    const double d_pre =
        d_hidden[r] * activation_grad(model.hidden.activation, hidden[r]);
    d_hidden_b[r] = d_pre;
    for (std::size_t c = 0; c < concat_dim; ++c) {
      d_hidden_w[r * concat_dim + c] = d_pre * group_probs[c];
      d_group_probs[c] += model.hidden.weights(r, c) * d_pre;
    }
  }

  const std::size_t group_size = model.config.group_size;
  std::vector<double> d_concat(concat_dim, 0.0);
  for (std::size_t start = 0; start < concat_dim; start += group_size) {
    double dot = 0.0;
    for (std::size_t i = 0; i < group_size; ++i) {
      dot += group_probs[start + i] * d_group_probs[start + i];
    }
    for (std::size_t i = 0; i < group_size; ++i) {
      d_concat[start + i] = group_probs[start + i] * (d_group_probs[start + i] - dot);
    }
  }

  const std::size_t d = model.config.embedding_dim;
  std::size_t offset = 0;
  for (std::size_t b = 0; b < num_banks; ++b) {
    const FilterBank& bank = model.banks[b];
    auto& d_w = grads[2 * b];
    auto& d_b = grads[2 * b + 1];
    const std::size_t k = bank.width;
    for (std::size_t f = 0; f < bank.count; ++f) {
      const double d_pre = d_concat[offset + f] *
                           activation_grad(model.config.filter_activation, pooled[b][f]);
      d_b[f] = d_pre;
      const std::size_t p = argmax[b][f];
      for (std::size_t r = 0; r < k; ++r) {
        if (p + r >= seq.rows) continue;
        for (std::size_t c = 0; c < d; ++c) {
          d_w[f * (k * d) + r * d + c] = d_pre * seq(p + r, c);
        }
      }
    }
    offset += bank.count;
  }
  return result;
}

GradientSet finite_difference_gradients(const MCCNNModel& model, const Matrix& seq,
                                        std::size_t true_class, double eps) {
  MCCNNModel scratch = model;
  GradientSet grads = GradientSet::zeros_like(model);
  auto tensors = param_tensors(scratch);
  // Fully serial loss through the reference kernels; same arithmetic per
  // slot as model_loss.
  auto loss = [&] {
    std::vector<double> concat;
    concat.reserve(scratch.config.concat_dim());
    for (const FilterBank& bank : scratch.banks) {
      const std::vector<double> pooled =
          reference::conv_pool(seq, bank, scratch.config.filter_activation);
      concat.insert(concat.end(), pooled.begin(), pooled.end());
    }
    const std::vector<double> probs =
        reference::grouped_softmax(concat, scratch.config.group_size);
    const std::vector<double> hidden = reference::dense_forward(probs, scratch.hidden);
    const std::vector<double> logits = reference::dense_forward(hidden, scratch.output);
    return softmax_cross_entropy(logits, true_class).loss;
  };
  for (std::size_t t = 0; t < tensors.size(); ++t) {
    for (std::size_t i = 0; i < tensors[t].values.size(); ++i) {
      double& parameter = tensors[t].values[i];
      const double original = parameter;
      parameter = original + eps;
      const double loss_plus = loss();
      parameter = original - eps;
      const double loss_minus = loss();
      parameter = original;
      grads.tensors[t][i] = (loss_plus - loss_minus) / (2.0 * eps);
    }
  }
  return grads;
}

}  // namespace mccnn::reference
