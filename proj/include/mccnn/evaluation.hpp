#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mccnn/embeddings.hpp"
#include "mccnn/model.hpp"
#include "mccnn/text_pipeline.hpp"

namespace mccnn {

// C x C counts; entry (gold, predicted).
struct ConfusionMatrix {
  std::size_t num_classes = 0;
  std::vector<std::size_t> counts;

  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::size_t classes)
      : num_classes(classes), counts(classes * classes, 0) {}

  std::size_t& at(std::size_t gold, std::size_t predicted) {
    return counts[gold * num_classes + predicted];
  }
  std::size_t at(std::size_t gold, std::size_t predicted) const {
    return counts[gold * num_classes + predicted];
  }
  std::size_t total() const;
};

struct MetricsReport {
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<double> f1;
  double macro_f1 = 0.0;
  double accuracy = 0.0;
  ConfusionMatrix confusion;
};

// Per-class precision/recall/F1 with 0/0 ratios defined as 0; macro-F1 is
// the unweighted mean over ALL schema classes.
MetricsReport metrics_from_confusion(const ConfusionMatrix& cm);

// Structured text: per-class table followed by a machine-readable key-value
// block.
std::string format_report(const MetricsReport& report, const LabelSchema& schema);

class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual std::size_t predict_class(const Example& example) const = 0;
};

// Emits the fixed class for every input.
std::unique_ptr<Predictor> constant_baseline(std::size_t class_index);
// Most frequent class of the training distribution, ties to lowest index.
std::unique_ptr<Predictor> mfc_baseline(const std::vector<std::size_t>& train_distribution);

// Full-pipeline predictor over a trained ensemble. The referenced ensemble,
// vocabulary and provider must outlive the predictor.
std::unique_ptr<Predictor> make_ensemble_predictor(const Ensemble& ensemble,
                                                   const SubwordVocabulary& vocab,
                                                   const EmbeddingProvider& provider);

// Sparse vector sorted by feature index.
using SparseVector = std::vector<std::pair<std::size_t, double>>;

// Smoothed-idf TF-IDF with per-example L2 normalization. Tokens unseen in
// training are ignored at transform time.
struct TfidfModel {
  std::unordered_map<std::string, std::size_t> vocabulary;
  std::vector<double> idf;

  SparseVector transform(const TokenSequence& tokens) const;
};

struct TfidfVectorization {
  TfidfModel model;
  std::vector<SparseVector> vectors;
};

TfidfVectorization tfidf_vectorize(const std::vector<TokenSequence>& corpus);

// One-vs-rest linear scorers trained by seeded subgradient descent on hinge
// loss with an L2 term.
struct LinearModel {
  Matrix weights;  // num_classes x vocabulary size
  std::vector<double> biases;

  std::size_t predict(const SparseVector& x) const;
};

LinearModel train_linear_baseline(const std::vector<SparseVector>& vectors,
                                  const std::vector<int>& labels,
                                  std::size_t num_classes, std::size_t epochs,
                                  double learning_rate, std::uint64_t seed);

// TF-IDF + linear baseline over the token pipeline. The vocabulary must
// outlive the predictor.
std::unique_ptr<Predictor> make_tfidf_predictor(TfidfModel tfidf, LinearModel linear,
                                                const SubwordVocabulary& vocab,
                                                std::size_t max_tokens);

// Scores the predictor over a labeled dataset.
MetricsReport evaluate(const Predictor& predictor, const std::vector<Example>& dataset,
                       const LabelSchema& schema);

// One deterministic synthetic dataset with the given per-class counts.
std::vector<Example> synthesize_dataset(const std::vector<std::size_t>& class_counts);

// Constant-predictor baselines on the shared-task label distributions,
// checked against their published (macro-F1, accuracy) values.
struct BaselineCheck {
  std::string name;
  double expected_f1 = 0.0;
  double expected_accuracy = 0.0;
  double actual_f1 = 0.0;
  double actual_accuracy = 0.0;
  bool pass = false;
};

std::vector<BaselineCheck> reproduce_reference_baselines(double tolerance = 5e-4);

}  // namespace mccnn
