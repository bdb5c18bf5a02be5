#include "mccnn/model.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "mccnn/rng.hpp"

namespace mccnn {

std::size_t ModelConfig::concat_dim() const {
  std::size_t groups = 0;
  for (std::size_t g : groups_per_size) groups += g;
  return group_size * groups;
}

void ModelConfig::validate() const {
  if (embedding_dim == 0) throw std::runtime_error("embedding_dim must be >= 1");
  if (filter_sizes.empty()) throw std::runtime_error("filter_sizes must be nonempty");
  if (filter_sizes.size() != groups_per_size.size()) {
    throw std::runtime_error("filter_sizes and groups_per_size must have equal length");
  }
  for (std::size_t k : filter_sizes) {
    if (k == 0) throw std::runtime_error("filter sizes must be >= 1");
  }
  for (std::size_t g : groups_per_size) {
    if (g == 0) throw std::runtime_error("group counts must be >= 1");
  }
  if (group_size == 0) throw std::runtime_error("group_size must be >= 1");
  if (hidden_size == 0) throw std::runtime_error("hidden_size must be >= 1");
  if (num_classes < 2) throw std::runtime_error("num_classes must be >= 2");
  if (ensemble_size == 0) throw std::runtime_error("ensemble_size must be >= 1");
  if (max_tokens == 0) throw std::runtime_error("max_tokens must be >= 1");
}

namespace {

template <typename ModelT, typename ViewT>
std::vector<ViewT> collect_tensors(ModelT& model) {
  std::vector<ViewT> tensors;
  tensors.reserve(2 * model.banks.size() + 4);
  for (std::size_t i = 0; i < model.banks.size(); ++i) {
    auto& bank = model.banks[i];
    const std::string prefix = "conv" + std::to_string(i);
    tensors.push_back({prefix + ".weights", bank.weights.rows, bank.weights.cols,
                       {bank.weights.data.data(), bank.weights.data.size()}});
    tensors.push_back({prefix + ".bias", 1, bank.biases.size(),
                       {bank.biases.data(), bank.biases.size()}});
  }
  tensors.push_back({"hidden.weights", model.hidden.weights.rows,
                     model.hidden.weights.cols,
                     {model.hidden.weights.data.data(), model.hidden.weights.data.size()}});
  tensors.push_back({"hidden.bias", 1, model.hidden.biases.size(),
                     {model.hidden.biases.data(), model.hidden.biases.size()}});
  tensors.push_back({"output.weights", model.output.weights.rows,
                     model.output.weights.cols,
                     {model.output.weights.data.data(), model.output.weights.data.size()}});
  tensors.push_back({"output.bias", 1, model.output.biases.size(),
                     {model.output.biases.data(), model.output.biases.size()}});
  return tensors;
}

// Structurally complete model with all parameters zero.
MCCNNModel make_model_structure(const ModelConfig& config) {
  config.validate();
  MCCNNModel model;
  model.config = config;
  model.banks.resize(config.filter_sizes.size());
  for (std::size_t i = 0; i < config.filter_sizes.size(); ++i) {
    FilterBank& bank = model.banks[i];
    bank.width = config.filter_sizes[i];
    bank.count = config.group_size * config.groups_per_size[i];
    bank.weights = Matrix(bank.count, bank.width * config.embedding_dim);
    bank.biases.assign(bank.count, 0.0);
  }
  model.hidden.weights = Matrix(config.hidden_size, config.concat_dim());
  model.hidden.biases.assign(config.hidden_size, 0.0);
  model.hidden.activation = config.hidden_activation;
  model.output.weights = Matrix(config.num_classes, config.hidden_size);
  model.output.biases.assign(config.num_classes, 0.0);
  model.output.activation = Activation::identity;
  return model;
}

void init_weights(Matrix& weights, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(weights.rows + weights.cols));
  for (double& value : weights.data) value = rng.uniform(-limit, limit);
}

}  // namespace

std::vector<TensorView> param_tensors(MCCNNModel& model) {
  return collect_tensors<MCCNNModel, TensorView>(model);
}

std::vector<ConstTensorView> param_tensors(const MCCNNModel& model) {
  return collect_tensors<const MCCNNModel, ConstTensorView>(model);
}

MCCNNModel init_model(const ModelConfig& config, std::uint64_t seed) {
  MCCNNModel model = make_model_structure(config);
  Rng rng(seed);
  for (FilterBank& bank : model.banks) init_weights(bank.weights, rng);
  init_weights(model.hidden.weights, rng);
  init_weights(model.output.weights, rng);
  return model;
}

Ensemble init_ensemble(const ModelConfig& config) {
  config.validate();
  Ensemble ensemble;
  ensemble.config = config;
  ensemble.members.reserve(config.ensemble_size);
  for (std::size_t i = 0; i < config.ensemble_size; ++i) {
    ensemble.members.push_back(init_model(config, config.seed + i));
  }
  return ensemble;
}

ForwardTrace forward_trace(const MCCNNModel& model, const Matrix& seq) {
  if (seq.rows > 0 && seq.cols != model.config.embedding_dim) {
    throw std::runtime_error("input has dimension " + std::to_string(seq.cols) +
                             ", model expects " +
                             std::to_string(model.config.embedding_dim));
  }
  // A 0 x 0 input is an empty sequence of the model's dimension.
  const Matrix* input = &seq;
  Matrix empty;
  if (seq.rows == 0 && seq.cols != model.config.embedding_dim) {
    empty = Matrix(0, model.config.embedding_dim);
    input = &empty;
  }

  ForwardTrace trace;
  trace.pooled.resize(model.banks.size());
  trace.pool_argmax.resize(model.banks.size());
  trace.concat.reserve(model.config.concat_dim());
  for (std::size_t i = 0; i < model.banks.size(); ++i) {
    trace.pooled[i] = conv_pool(*input, model.banks[i], model.config.filter_activation,
                                &trace.pool_argmax[i]);
    trace.concat.insert(trace.concat.end(), trace.pooled[i].begin(),
                        trace.pooled[i].end());
  }
  trace.group_probs = grouped_softmax(trace.concat, model.config.group_size);
  trace.hidden_out = dense_forward(trace.group_probs, model.hidden);
  trace.logits = dense_forward(trace.hidden_out, model.output);
  trace.probs = softmax(trace.logits);
  return trace;
}

std::vector<double> forward(const MCCNNModel& model, const Matrix& seq) {
  return forward_trace(model, seq).probs;
}

std::vector<double> ensemble_predict(const Ensemble& ensemble, const Matrix& seq) {
  if (ensemble.members.empty()) throw std::runtime_error("ensemble has no members");
  std::vector<std::vector<double>> outputs(ensemble.members.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (!omp_in_parallel())
#endif
  for (std::size_t i = 0; i < ensemble.members.size(); ++i) {
    outputs[i] = forward(ensemble.members[i], seq);
  }
  // Averaged in member-index order so the result is independent of the
  // thread count.
  std::vector<double> mean(outputs[0].size(), 0.0);
  for (const auto& probs : outputs) {
    for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += probs[c];
  }
  const double inv = 1.0 / static_cast<double>(outputs.size());
  for (double& value : mean) value *= inv;
  return mean;
}

std::size_t predicted_class(const std::vector<double>& probs) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i) {
    if (probs[i] > probs[best]) best = i;
  }
  return best;
}

std::size_t count_parameters(const ModelConfig& config) {
  config.validate();
  std::size_t total = 0;
  for (std::size_t i = 0; i < config.filter_sizes.size(); ++i) {
    const std::size_t filters = config.group_size * config.groups_per_size[i];
    total += filters * (config.filter_sizes[i] * config.embedding_dim + 1);
  }
  total += config.concat_dim() * config.hidden_size + config.hidden_size;
  total += config.hidden_size * config.num_classes + config.num_classes;
  return total;
}

namespace {

constexpr int kCheckpointVersion = 1;

std::string join_sizes(const std::vector<std::size_t>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) throw std::runtime_error("empty entry in size list '" + text + "'");
    out.push_back(static_cast<std::size_t>(std::stoull(item)));
  }
  if (out.empty()) throw std::runtime_error("empty size list");
  return out;
}

std::string hex_double(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%a", value);
  return buffer;
}

// Reads "key value" from a line, enforcing the expected key.
std::string expect_keyed_line(std::istream& in, const std::string& path,
                              const std::string& key) {
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error(path + ": unexpected end of file, expected '" + key + "'");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::size_t space = line.find(' ');
  if (space == std::string::npos || line.substr(0, space) != key) {
    throw std::runtime_error(path + ": expected '" + key + " ...', got '" + line + "'");
  }
  return line.substr(space + 1);
}

}  // namespace

void save_model(const Ensemble& ensemble, const std::string& path) {
  if (ensemble.members.empty()) throw std::runtime_error("ensemble has no members");
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");

  const ModelConfig& config = ensemble.config;
  out << "mccnn-ensemble " << kCheckpointVersion << "\n";
  out << "embedding_dim " << config.embedding_dim << "\n";
  out << "filter_sizes " << join_sizes(config.filter_sizes) << "\n";
  out << "groups_per_size " << join_sizes(config.groups_per_size) << "\n";
  out << "group_size " << config.group_size << "\n";
  out << "filter_activation " << to_string(config.filter_activation) << "\n";
  out << "hidden_size " << config.hidden_size << "\n";
  out << "hidden_activation " << to_string(config.hidden_activation) << "\n";
  out << "num_classes " << config.num_classes << "\n";
  out << "ensemble_size " << config.ensemble_size << "\n";
  out << "max_tokens " << config.max_tokens << "\n";
  out << "seed " << config.seed << "\n";
  out << "members " << ensemble.members.size() << "\n";
  for (std::size_t m = 0; m < ensemble.members.size(); ++m) {
    out << "member " << m << "\n";
    for (const ConstTensorView& tensor : param_tensors(ensemble.members[m])) {
      out << "tensor " << tensor.name << " " << tensor.rows << " " << tensor.cols
          << "\n";
      for (std::size_t r = 0; r < tensor.rows; ++r) {
        for (std::size_t c = 0; c < tensor.cols; ++c) {
          if (c > 0) out << ' ';
          out << hex_double(tensor.values[r * tensor.cols + c]);
        }
        out << "\n";
      }
    }
  }
  out << "end\n";
  if (!out) throw std::runtime_error(path + ": write failed");
}

Ensemble load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open checkpoint");

  const std::string version = expect_keyed_line(in, path, "mccnn-ensemble");
  if (std::stoi(version) != kCheckpointVersion) {
    throw std::runtime_error(path + ": unsupported checkpoint version " + version +
                             " (this build reads version " +
                             std::to_string(kCheckpointVersion) + ")");
  }

  ModelConfig config;
  config.embedding_dim = std::stoull(expect_keyed_line(in, path, "embedding_dim"));
  config.filter_sizes = parse_sizes(expect_keyed_line(in, path, "filter_sizes"));
  config.groups_per_size = parse_sizes(expect_keyed_line(in, path, "groups_per_size"));
  config.group_size = std::stoull(expect_keyed_line(in, path, "group_size"));
  config.filter_activation =
      activation_from_string(expect_keyed_line(in, path, "filter_activation"));
  config.hidden_size = std::stoull(expect_keyed_line(in, path, "hidden_size"));
  config.hidden_activation =
      activation_from_string(expect_keyed_line(in, path, "hidden_activation"));
  config.num_classes = std::stoull(expect_keyed_line(in, path, "num_classes"));
  config.ensemble_size = std::stoull(expect_keyed_line(in, path, "ensemble_size"));
  config.max_tokens = std::stoull(expect_keyed_line(in, path, "max_tokens"));
  config.seed = std::stoull(expect_keyed_line(in, path, "seed"));
  config.validate();

  const std::size_t members = std::stoull(expect_keyed_line(in, path, "members"));
  if (members != config.ensemble_size) {
    throw std::runtime_error(path + ": member count " + std::to_string(members) +
                             " inconsistent with ensemble_size " +
                             std::to_string(config.ensemble_size));
  }

  Ensemble ensemble;
  ensemble.config = config;
  ensemble.members.reserve(members);
  for (std::size_t m = 0; m < members; ++m) {
    const std::string member_index = expect_keyed_line(in, path, "member");
    if (std::stoull(member_index) != m) {
      throw std::runtime_error(path + ": expected member " + std::to_string(m) +
                               ", got " + member_index);
    }
    MCCNNModel model = make_model_structure(config);
    for (TensorView tensor : param_tensors(model)) {
      const std::string header = expect_keyed_line(in, path, "tensor");
      std::istringstream fields(header);
      std::string name;
      std::size_t rows = 0, cols = 0;
      if (!(fields >> name >> rows >> cols)) {
        throw std::runtime_error(path + ": malformed tensor header '" + header + "'");
      }
      if (name != tensor.name || rows != tensor.rows || cols != tensor.cols) {
        throw std::runtime_error(
            path + ": tensor " + tensor.name + " expects shape " +
            std::to_string(tensor.rows) + "x" + std::to_string(tensor.cols) +
            ", checkpoint has '" + name + "' " + std::to_string(rows) + "x" +
            std::to_string(cols));
      }
      for (std::size_t i = 0; i < tensor.values.size(); ++i) {
        std::string value;
        if (!(in >> value)) {
          throw std::runtime_error(path + ": unexpected end of file in tensor " +
                                   tensor.name);
        }
        char* end = nullptr;
        tensor.values[i] = std::strtod(value.c_str(), &end);
        if (end == value.c_str() || *end != '\0') {
          throw std::runtime_error(path + ": bad value '" + value + "' in tensor " +
                                   tensor.name);
        }
      }
      in.ignore(std::numeric_limits<std::streamsize>::max(), '\n');
    }
    ensemble.members.push_back(std::move(model));
  }
  const std::string trailer = [&] {
    std::string line;
    if (!std::getline(in, line)) return std::string();
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }();
  if (trailer != "end") {
    throw std::runtime_error(path + ": truncated checkpoint, missing 'end' marker");
  }
  return ensemble;
}

}  // namespace mccnn
