#include "mccnn/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "mccnn/rng.hpp"

namespace mccnn {

std::size_t ConfusionMatrix::total() const {
  std::size_t sum = 0;
  for (std::size_t count : counts) sum += count;
  return sum;
}

MetricsReport metrics_from_confusion(const ConfusionMatrix& cm) {
  const std::size_t classes = cm.num_classes;
  if (classes == 0 || cm.total() == 0) {
    throw std::runtime_error("confusion matrix is empty");
  }
  MetricsReport report;
  report.confusion = cm;
  report.precision.resize(classes, 0.0);
  report.recall.resize(classes, 0.0);
  report.f1.resize(classes, 0.0);

  std::size_t trace = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    std::size_t row = 0;  // gold c
    std::size_t col = 0;  // predicted c
    for (std::size_t i = 0; i < classes; ++i) {
      row += cm.at(c, i);
      col += cm.at(i, c);
    }
    const double tp = static_cast<double>(cm.at(c, c));
    trace += cm.at(c, c);
    const double precision = col == 0 ? 0.0 : tp / static_cast<double>(col);
    const double recall = row == 0 ? 0.0 : tp / static_cast<double>(row);
    const double denom = precision + recall;
    report.precision[c] = precision;
    report.recall[c] = recall;
    report.f1[c] = denom == 0.0 ? 0.0 : 2.0 * precision * recall / denom;
    report.macro_f1 += report.f1[c];
  }
  report.macro_f1 /= static_cast<double>(classes);
  report.accuracy = static_cast<double>(trace) / static_cast<double>(cm.total());
  return report;
}

std::string format_report(const MetricsReport& report, const LabelSchema& schema) {
  if (schema.num_classes() != report.f1.size()) {
    throw std::runtime_error("schema does not match the report's class count");
  }
  std::ostringstream out;
  char line[160];
  out << "class        precision     recall         f1    support\n";
  for (std::size_t c = 0; c < schema.num_classes(); ++c) {
    std::size_t support = 0;
    for (std::size_t p = 0; p < report.confusion.num_classes; ++p) {
      support += report.confusion.at(c, p);
    }
    std::snprintf(line, sizeof line, "%-12s %9.4f  %9.4f  %9.4f  %9zu\n",
                  schema.classes[c].c_str(), report.precision[c], report.recall[c],
                  report.f1[c], support);
    out << line;
  }
  std::snprintf(line, sizeof line, "macro_f1 %.4f\naccuracy %.4f\n", report.macro_f1,
                report.accuracy);
  out << line;
  out << "[metrics]\n";
  std::snprintf(line, sizeof line, "macro_f1=%.6f\naccuracy=%.6f\n", report.macro_f1,
                report.accuracy);
  out << line;
  for (std::size_t c = 0; c < schema.num_classes(); ++c) {
    std::snprintf(line, sizeof line, "precision.%s=%.6f\nrecall.%s=%.6f\nf1.%s=%.6f\n",
                  schema.classes[c].c_str(), report.precision[c],
                  schema.classes[c].c_str(), report.recall[c],
                  schema.classes[c].c_str(), report.f1[c]);
    out << line;
  }
  return out.str();
}

namespace {

class ConstantPredictor final : public Predictor {
 public:
  explicit ConstantPredictor(std::size_t class_index) : class_index_(class_index) {}
  std::size_t predict_class(const Example&) const override { return class_index_; }

 private:
  std::size_t class_index_;
};

class EnsemblePredictor final : public Predictor {
 public:
  EnsemblePredictor(const Ensemble& ensemble, const SubwordVocabulary& vocab,
                    const EmbeddingProvider& provider)
      : ensemble_(&ensemble), vocab_(&vocab), provider_(&provider) {}

  std::size_t predict_class(const Example& example) const override {
    const TokenSequence tokens =
        tokenize(normalize_text(example.text), *vocab_, ensemble_->config.max_tokens);
    const EmbeddedSequence input = provider_->embed(tokens, example.id);
    return predicted_class(ensemble_predict(*ensemble_, input));
  }

 private:
  const Ensemble* ensemble_;
  const SubwordVocabulary* vocab_;
  const EmbeddingProvider* provider_;
};

class TfidfPredictor final : public Predictor {
 public:
  TfidfPredictor(TfidfModel tfidf, LinearModel linear, const SubwordVocabulary& vocab,
                 std::size_t max_tokens)
      : tfidf_(std::move(tfidf)),
        linear_(std::move(linear)),
        vocab_(&vocab),
        max_tokens_(max_tokens) {}

  std::size_t predict_class(const Example& example) const override {
    const TokenSequence tokens =
        tokenize(normalize_text(example.text), *vocab_, max_tokens_);
    return linear_.predict(tfidf_.transform(tokens));
  }

 private:
  TfidfModel tfidf_;
  LinearModel linear_;
  const SubwordVocabulary* vocab_;
  std::size_t max_tokens_;
};

}  // namespace

std::unique_ptr<Predictor> constant_baseline(std::size_t class_index) {
  return std::make_unique<ConstantPredictor>(class_index);
}

std::unique_ptr<Predictor> mfc_baseline(const std::vector<std::size_t>& train_distribution) {
  if (train_distribution.empty()) {
    throw std::runtime_error("mfc baseline needs a nonempty distribution");
  }
  std::size_t best = 0;
  for (std::size_t c = 1; c < train_distribution.size(); ++c) {
    if (train_distribution[c] > train_distribution[best]) best = c;
  }
  return std::make_unique<ConstantPredictor>(best);
}

std::unique_ptr<Predictor> make_ensemble_predictor(const Ensemble& ensemble,
                                                   const SubwordVocabulary& vocab,
                                                   const EmbeddingProvider& provider) {
  return std::make_unique<EnsemblePredictor>(ensemble, vocab, provider);
}

SparseVector TfidfModel::transform(const TokenSequence& tokens) const {
  std::unordered_map<std::size_t, double> tf;
  for (const std::string& token : tokens) {
    auto it = vocabulary.find(token);
    if (it != vocabulary.end()) tf[it->second] += 1.0;
  }
  SparseVector out(tf.begin(), tf.end());
  std::sort(out.begin(), out.end());
  double norm_sq = 0.0;
  for (auto& [index, weight] : out) {
    weight *= idf[index];
    norm_sq += weight * weight;
  }
  if (norm_sq > 0.0) {
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (auto& [index, weight] : out) weight *= inv;
  }
  return out;
}

TfidfVectorization tfidf_vectorize(const std::vector<TokenSequence>& corpus) {
  if (corpus.empty()) throw std::runtime_error("tfidf corpus is empty");
  TfidfVectorization result;
  auto& vocabulary = result.model.vocabulary;
  std::vector<std::size_t> document_frequency;
  for (const TokenSequence& document : corpus) {
    std::vector<std::size_t> seen;
    for (const std::string& token : document) {
      auto [it, inserted] = vocabulary.emplace(token, vocabulary.size());
      if (inserted) document_frequency.push_back(0);
      if (std::find(seen.begin(), seen.end(), it->second) == seen.end()) {
        seen.push_back(it->second);
      }
    }
    for (std::size_t index : seen) ++document_frequency[index];
  }
  const double n = static_cast<double>(corpus.size());
  result.model.idf.resize(document_frequency.size());
  for (std::size_t i = 0; i < document_frequency.size(); ++i) {
    result.model.idf[i] =
        std::log((1.0 + n) / (1.0 + static_cast<double>(document_frequency[i]))) + 1.0;
  }
  result.vectors.reserve(corpus.size());
  for (const TokenSequence& document : corpus) {
    result.vectors.push_back(result.model.transform(document));
  }
  return result;
}

std::size_t LinearModel::predict(const SparseVector& x) const {
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < weights.rows; ++c) {
    double score = biases[c];
    const double* w = weights.row(c).data();
    for (const auto& [index, value] : x) score += w[index] * value;
    if (score > best_score) {
      best_score = score;
      best = c;
    }
  }
  return best;
}

LinearModel train_linear_baseline(const std::vector<SparseVector>& vectors,
                                  const std::vector<int>& labels,
                                  std::size_t num_classes, std::size_t epochs,
                                  double learning_rate, std::uint64_t seed) {
  if (vectors.size() != labels.size()) {
    throw std::runtime_error("vector/label count mismatch");
  }
  if (vectors.empty()) throw std::runtime_error("no training vectors");
  std::vector<bool> present(num_classes, false);
  std::size_t dimension = 0;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= num_classes) {
      throw std::runtime_error("label out of range");
    }
    present[labels[i]] = true;
    for (const auto& [index, value] : vectors[i]) {
      dimension = std::max(dimension, index + 1);
    }
  }
  if (std::count(present.begin(), present.end(), true) < 2) {
    throw std::runtime_error("linear baseline needs at least two classes in the data");
  }

  constexpr double kL2 = 1e-4;
  LinearModel model;
  model.weights = Matrix(num_classes, dimension);
  model.biases.assign(num_classes, 0.0);

  Rng rng(seed);
  std::vector<std::size_t> order(vectors.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t index : order) {
      const SparseVector& x = vectors[index];
      for (std::size_t c = 0; c < num_classes; ++c) {
        const double y = labels[index] == static_cast<int>(c) ? 1.0 : -1.0;
        double* w = model.weights.row(c).data();
        double score = model.biases[c];
        for (const auto& [feature, value] : x) score += w[feature] * value;
        // L2 decay applies always; the hinge term only inside the margin.
        for (std::size_t f = 0; f < dimension; ++f) {
          w[f] -= learning_rate * kL2 * w[f];
        }
        if (y * score < 1.0) {
          for (const auto& [feature, value] : x) {
            w[feature] += learning_rate * y * value;
          }
          model.biases[c] += learning_rate * y;
        }
      }
    }
  }
  return model;
}

std::unique_ptr<Predictor> make_tfidf_predictor(TfidfModel tfidf, LinearModel linear,
                                                const SubwordVocabulary& vocab,
                                                std::size_t max_tokens) {
  return std::make_unique<TfidfPredictor>(std::move(tfidf), std::move(linear), vocab,
                                          max_tokens);
}

MetricsReport evaluate(const Predictor& predictor, const std::vector<Example>& dataset,
                       const LabelSchema& schema) {
  if (dataset.empty()) throw std::runtime_error("evaluation dataset is empty");
  std::vector<std::size_t> predictions(dataset.size(), 0);
  std::exception_ptr failure;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    try {
      predictions[i] = predictor.predict_class(dataset[i]);
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical(mccnn_eval_failure)
#endif
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  ConfusionMatrix cm(schema.num_classes());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const Example& example = dataset[i];
    if (!example.label.has_value()) {
      throw std::runtime_error("example '" + example.id + "' has no label");
    }
    const std::size_t gold = static_cast<std::size_t>(*example.label);
    if (gold >= schema.num_classes() || predictions[i] >= schema.num_classes()) {
      throw std::runtime_error("label or prediction outside schema " + schema.name);
    }
    cm.at(gold, predictions[i]) += 1;
  }
  return metrics_from_confusion(cm);
}

std::vector<Example> synthesize_dataset(const std::vector<std::size_t>& class_counts) {
  std::vector<Example> dataset;
  std::size_t id = 0;
  for (std::size_t c = 0; c < class_counts.size(); ++c) {
    for (std::size_t i = 0; i < class_counts[c]; ++i) {
      dataset.push_back({"synth-" + std::to_string(id++), "synthetic",
                         static_cast<int>(c)});
    }
  }
  return dataset;
}

std::vector<BaselineCheck> reproduce_reference_baselines(double tolerance) {
  struct Row {
    const char* name;
    std::vector<std::size_t> counts;
    std::size_t constant_class;
    double expected_f1;
    double expected_accuracy;
  };
  // Published constant-baseline scores on the 2019 shared-task test
  // distributions, reconstructed here from the class proportions alone.
  const std::vector<Row> rows = {
      {"All NOT", {7209, 2791}, 0, 0.4189, 0.7209},
      {"All OFF", {7209, 2791}, 1, 0.2182, 0.2790},
      {"All TIN", {8875, 1125}, 0, 0.4702, 0.8875},
      {"All UNT", {8875, 1125}, 1, 0.1011, 0.1125},
      {"All GRP", {3662, 4695, 1643}, 0, 0.1787, 0.3662},
      {"All IND", {3662, 4695, 1643}, 1, 0.2130, 0.4695},
      {"All OTH", {3662, 4695, 1643}, 2, 0.0941, 0.1643},
  };

  std::vector<BaselineCheck> checks;
  for (const Row& row : rows) {
    LabelSchema schema;
    schema.name = "synthetic";
    for (std::size_t c = 0; c < row.counts.size(); ++c) {
      schema.classes.push_back("C" + std::to_string(c));
    }
    const std::vector<Example> dataset = synthesize_dataset(row.counts);
    const MetricsReport report =
        evaluate(*constant_baseline(row.constant_class), dataset, schema);
    BaselineCheck check;
    check.name = row.name;
    check.expected_f1 = row.expected_f1;
    check.expected_accuracy = row.expected_accuracy;
    check.actual_f1 = report.macro_f1;
    check.actual_accuracy = report.accuracy;
    check.pass = std::abs(check.actual_f1 - check.expected_f1) <= tolerance &&
                 std::abs(check.actual_accuracy - check.expected_accuracy) <= tolerance;
    checks.push_back(check);
  }

  // Most-frequent-class baseline on the binary hate-speech distribution:
  // 5790 / 4210 in both train and test.
  {
    const std::vector<std::size_t> counts = {5790, 4210};
    LabelSchema schema = hateval_a_schema();
    const std::vector<Example> dataset = synthesize_dataset(counts);
    const MetricsReport report = evaluate(*mfc_baseline(counts), dataset, schema);
    BaselineCheck check;
    check.name = "MFC";
    check.expected_f1 = 0.367;
    check.expected_accuracy = 0.579;
    check.actual_f1 = report.macro_f1;
    check.actual_accuracy = report.accuracy;
    check.pass = std::abs(check.actual_f1 - check.expected_f1) <= tolerance &&
                 std::abs(check.actual_accuracy - check.expected_accuracy) <= tolerance;
    checks.push_back(check);
  }
  return checks;
}

}  // namespace mccnn
