#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mccnn/evaluation.hpp"
#include "mccnn/rng.hpp"

using namespace mccnn;

namespace {

ConfusionMatrix from_pairs(std::size_t classes,
                           const std::vector<std::pair<int, int>>& pairs) {
  ConfusionMatrix cm(classes);
  for (const auto& [gold, predicted] : pairs) cm.at(gold, predicted) += 1;
  return cm;
}

}  // namespace

TEST_CASE("metrics_from_confusion hand example") {
  // gold [0,0,1], pred [0,1,1]
  const auto cm = from_pairs(2, {{0, 0}, {0, 1}, {1, 1}});
  const MetricsReport report = metrics_from_confusion(cm);
  CHECK(report.f1[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(report.f1[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(report.macro_f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(report.accuracy == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("metrics_from_confusion perfect predictions") {
  const auto cm = from_pairs(3, {{0, 0}, {1, 1}, {2, 2}, {1, 1}});
  const MetricsReport report = metrics_from_confusion(cm);
  CHECK(report.macro_f1 == 1.0);
  CHECK(report.accuracy == 1.0);
}

TEST_CASE("all-NOT constant predictor on the 7209/10000 split") {
  ConfusionMatrix cm(2);
  cm.at(0, 0) = 7209;
  cm.at(1, 0) = 2791;
  const MetricsReport report = metrics_from_confusion(cm);
  CHECK(std::abs(report.macro_f1 - 0.4189) <= 5e-4);
  CHECK(std::abs(report.accuracy - 0.7209) <= 5e-4);
}

TEST_CASE("0/0 ratios never produce non-finite metrics") {
  // Class 1 never appears in gold or predictions.
  const auto cm = from_pairs(3, {{0, 0}, {0, 2}, {2, 0}});
  const MetricsReport report = metrics_from_confusion(cm);
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(std::isfinite(report.precision[c]));
    CHECK(std::isfinite(report.recall[c]));
    CHECK(std::isfinite(report.f1[c]));
  }
  CHECK(report.f1[1] == 0.0);
  CHECK_THROWS(metrics_from_confusion(ConfusionMatrix(2)));
}

TEST_CASE("metrics match a brute-force oracle on random matrices") {
  Rng rng(97);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t classes = 2 + rng.below(4);
    std::vector<int> gold;
    std::vector<int> pred;
    const std::size_t n = 1 + rng.below(60);
    for (std::size_t i = 0; i < n; ++i) {
      gold.push_back(static_cast<int>(rng.below(classes)));
      pred.push_back(static_cast<int>(rng.below(classes)));
    }
    ConfusionMatrix cm(classes);
    for (std::size_t i = 0; i < n; ++i) {
      cm.at(gold[i], pred[i]) += 1;
    }
    const MetricsReport report = metrics_from_confusion(cm);

    // Independent per-class computation from the raw pairs.
    double macro = 0.0;
    std::size_t correct = 0;
    for (std::size_t c = 0; c < classes; ++c) {
      std::size_t tp = 0, fp = 0, fn = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const bool g = gold[i] == static_cast<int>(c);
        const bool p = pred[i] == static_cast<int>(c);
        tp += g && p;
        fp += !g && p;
        fn += g && !p;
      }
      const double precision = tp + fp == 0 ? 0.0 : double(tp) / double(tp + fp);
      const double recall = tp + fn == 0 ? 0.0 : double(tp) / double(tp + fn);
      const double f1 =
          precision + recall == 0.0 ? 0.0 : 2 * precision * recall / (precision + recall);
      CHECK(report.precision[c] == doctest::Approx(precision).epsilon(1e-12));
      CHECK(report.recall[c] == doctest::Approx(recall).epsilon(1e-12));
      CHECK(report.f1[c] == doctest::Approx(f1).epsilon(1e-12));
      macro += f1;
    }
    for (std::size_t i = 0; i < n; ++i) correct += gold[i] == pred[i];
    CHECK(report.macro_f1 == doctest::Approx(macro / classes).epsilon(1e-12));
    CHECK(report.accuracy ==
          doctest::Approx(double(correct) / double(n)).epsilon(1e-12));
  }
}

TEST_CASE("mfc baseline picks the most frequent class, ties to lowest") {
  const Example any{"x", "text", 0};
  CHECK(mfc_baseline({8840, 4400})->predict_class(any) == 0);
  CHECK(mfc_baseline({5790, 4210})->predict_class(any) == 0);
  CHECK(mfc_baseline({5, 9, 3})->predict_class(any) == 1);
  CHECK(mfc_baseline({4, 4, 2})->predict_class(any) == 0);
  CHECK(constant_baseline(2)->predict_class(any) == 2);
}

TEST_CASE("evaluate constant predictors on synthetic distributions") {
  LabelSchema binary{"synthetic", {"A", "B"}};
  const auto tin = synthesize_dataset({8875, 1125});
  const MetricsReport all_tin = evaluate(*constant_baseline(0), tin, binary);
  CHECK(std::abs(all_tin.macro_f1 - 0.4702) <= 5e-4);
  CHECK(std::abs(all_tin.accuracy - 0.8875) <= 5e-4);

  LabelSchema ternary{"synthetic", {"G", "I", "O"}};
  const auto subtask_c = synthesize_dataset({3662, 4695, 1643});
  const MetricsReport all_ind = evaluate(*constant_baseline(1), subtask_c, ternary);
  CHECK(std::abs(all_ind.macro_f1 - 0.2130) <= 5e-4);
  CHECK(std::abs(all_ind.accuracy - 0.4695) <= 5e-4);

  const auto hate = synthesize_dataset({5790, 4210});
  const MetricsReport mfc = evaluate(*mfc_baseline({5790, 4210}), hate, binary);
  CHECK(std::abs(mfc.macro_f1 - 0.367) <= 5e-4);
  CHECK(std::abs(mfc.accuracy - 0.579) <= 5e-4);
}

TEST_CASE("all reference baseline rows reproduce") {
  const auto checks = reproduce_reference_baselines();
  CHECK(checks.size() == 8);
  for (const BaselineCheck& check : checks) {
    INFO(check.name);
    CHECK(check.pass);
  }
}

TEST_CASE("metrics are invariant to example order") {
  LabelSchema binary{"synthetic", {"A", "B"}};
  auto dataset = synthesize_dataset({30, 20});
  const MetricsReport forward_order = evaluate(*constant_baseline(1), dataset, binary);
  std::reverse(dataset.begin(), dataset.end());
  const MetricsReport reverse_order = evaluate(*constant_baseline(1), dataset, binary);
  CHECK(forward_order.macro_f1 == reverse_order.macro_f1);
  CHECK(forward_order.accuracy == reverse_order.accuracy);
}

TEST_CASE("tfidf single-document weights") {
  const TfidfVectorization result = tfidf_vectorize({{"a", "a", "b"}});
  REQUIRE(result.vectors.size() == 1);
  const SparseVector& v = result.vectors[0];
  REQUIRE(v.size() == 2);
  // idf identical for both tokens; weights proportional to [2, 1].
  CHECK(v[0].second == doctest::Approx(2.0 / std::sqrt(5.0)).epsilon(1e-12));
  CHECK(v[1].second == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-12));
}

TEST_CASE("tfidf ignores unseen tokens and handles empty documents") {
  const TfidfVectorization result = tfidf_vectorize({{"a", "b"}, {"b", "c"}});
  const SparseVector unseen = result.model.transform({"zzz"});
  CHECK(unseen.empty());
  const SparseVector empty = result.model.transform({});
  CHECK(empty.empty());

  const SparseVector mixed = result.model.transform({"a", "zzz"});
  REQUIRE(mixed.size() == 1);
  CHECK(mixed[0].first == result.model.vocabulary.at("a"));

  // Identical documents get identical vectors.
  const TfidfVectorization twins = tfidf_vectorize({{"x", "y"}, {"x", "y"}});
  CHECK(twins.vectors[0] == twins.vectors[1]);
}

TEST_CASE("linear baseline separates a disjoint-vocabulary corpus") {
  std::vector<TokenSequence> corpus;
  std::vector<int> labels;
  for (int i = 0; i < 10; ++i) {
    corpus.push_back({"good", "fine", "extra" + std::to_string(i)});
    labels.push_back(0);
    corpus.push_back({"bad", "awful", "extra" + std::to_string(i)});
    labels.push_back(1);
  }
  const TfidfVectorization tfidf = tfidf_vectorize(corpus);
  const LinearModel model =
      train_linear_baseline(tfidf.vectors, labels, 2, 30, 0.1, 5);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    CHECK(model.predict(tfidf.vectors[i]) == static_cast<std::size_t>(labels[i]));
  }

  // Deterministic under a fixed seed.
  const LinearModel again =
      train_linear_baseline(tfidf.vectors, labels, 2, 30, 0.1, 5);
  CHECK(model.weights.data == again.weights.data);
  CHECK(model.biases == again.biases);

  // Zero epochs leaves the zero model: every score ties at 0, class 0 wins.
  const LinearModel zero = train_linear_baseline(tfidf.vectors, labels, 2, 0, 0.1, 5);
  for (double w : zero.weights.data) CHECK(w == 0.0);
  CHECK(zero.predict(tfidf.vectors[1]) == 0);

  CHECK_THROWS(train_linear_baseline(tfidf.vectors, std::vector<int>(20, 0), 2, 1, 0.1, 1));
}

TEST_CASE("format_report contains the table and key-value block") {
  const auto cm = from_pairs(2, {{0, 0}, {0, 1}, {1, 1}});
  const MetricsReport report = metrics_from_confusion(cm);
  const std::string text = format_report(report, {"toy", {"NOT", "OFF"}});
  CHECK(text.find("NOT") != std::string::npos);
  CHECK(text.find("[metrics]") != std::string::npos);
  CHECK(text.find("macro_f1=0.666667") != std::string::npos);
  CHECK(text.find("accuracy=0.666667") != std::string::npos);
}

TEST_CASE("evaluate rejects unlabeled examples") {
  LabelSchema binary{"synthetic", {"A", "B"}};
  std::vector<Example> dataset = {{"x", "text", std::nullopt}};
  CHECK_THROWS(evaluate(*constant_baseline(0), dataset, binary));
}
