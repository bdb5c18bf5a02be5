// Command-line entry point: train, predict, evaluate, baseline, gradcheck
// and reproduce-baselines over the MC-CNN toolkit.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "mccnn/embeddings.hpp"
#include "mccnn/evaluation.hpp"
#include "mccnn/gradients.hpp"
#include "mccnn/model.hpp"
#include "mccnn/text_pipeline.hpp"
#include "mccnn/training.hpp"

namespace {

using namespace mccnn;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

void add_config_option(CLI::App* cmd, std::string& path) {
  cmd->add_option("--config", path, "Flat key=value configuration file (flags win)")
      ->configurable(false);
}

std::string trim_copy(const std::string& text) {
  const auto begin = text.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = text.find_last_not_of(" \t\r");
  return text.substr(begin, end - begin + 1);
}

std::string normalize_key(std::string key) {
  for (char& c : key) {
    if (c == '-') c = '_';
  }
  return key;
}

std::string find_config_path(const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    }
  }
  return path;
}

// Reads a flat key=value (or "key value") file and turns it into option
// arguments, skipping keys already given on the command line so flags win.
// Unknown keys surface as unrecognized-option errors from the parser.
std::vector<std::string> config_args_from_file(const std::string& path,
                                               const std::vector<std::string>& given) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open config file");

  std::set<std::string> given_keys;
  for (const std::string& arg : given) {
    if (arg.rfind("--", 0) != 0) continue;
    const std::size_t eq = arg.find('=');
    given_keys.insert(normalize_key(arg.substr(2, eq == std::string::npos
                                                       ? std::string::npos
                                                       : eq - 2)));
  }

  std::vector<std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim_copy(line);
    if (line.empty() || line[0] == '#') continue;
    std::size_t split = line.find('=');
    if (split == std::string::npos) split = line.find_first_of(" \t");
    if (split == std::string::npos || split == 0) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected 'key=value'");
    }
    const std::string key = trim_copy(line.substr(0, split));
    std::string value = trim_copy(line.substr(split + 1));
    if ((value.size() >= 2 && value.front() == '"' && value.back() == '"') ||
        (value.size() >= 2 && value.front() == '\'' && value.back() == '\'')) {
      value = value.substr(1, value.size() - 2);
    }
    if (value.size() >= 2 && value.front() == '[' && value.back() == ']') {
      value = value.substr(1, value.size() - 2);
      std::string compact;
      for (char c : value) {
        if (c != ' ') compact += c;
      }
      value = compact;
    }
    if (given_keys.count(normalize_key(key)) != 0) continue;
    // An empty value is the string options' default; injecting "--key="
    // would swallow the next argument as its value.
    if (value.empty()) continue;
    out.push_back("--" + key + "=" + value);
  }
  return out;
}

struct PipelineOptions {
  std::string vocab_path;
  std::string embedding_kind = "hashed";
  std::string embedding_path;
  std::size_t embedding_dim = 32;
  std::uint64_t embedding_seed = 1;
  std::string format = "olid";
  std::string subtask = "a";
};

struct TrainOptions {
  std::string dataset_path;
  std::string checkpoint_path;
  std::string history_path;
  std::size_t parallel_members = 1;
  bool deterministic_output = false;
  bool echo_config = false;
  std::string filter_activation = "sigmoid";
  std::string hidden_activation = "tanh";
  ModelConfig model;
  TrainConfig train;
};

void add_pipeline_options(CLI::App* cmd, PipelineOptions& opts, bool need_vocab) {
  auto* vocab = cmd->add_option("--vocab", opts.vocab_path,
                                "Sub-word vocabulary file, one token per line")
                    ->envname("MCCNN_VOCAB");
  if (need_vocab) vocab->required();
  cmd->add_option("--embedding_kind", opts.embedding_kind,
                  "Embedding provider: hashed, static or precomputed")
      ->check(CLI::IsMember({"hashed", "static", "precomputed"}))
      ->envname("MCCNN_EMBEDDING_KIND");
  cmd->add_option("--embedding_path", opts.embedding_path,
                  "Embedding file for the static/precomputed kinds")
      ->envname("MCCNN_EMBEDDING_PATH");
  cmd->add_option("--embedding_dim", opts.embedding_dim,
                  "Dimension of hashed-random embeddings")
      ->envname("MCCNN_EMBEDDING_DIM");
  cmd->add_option("--embedding_seed", opts.embedding_seed,
                  "Seed for hashed-random embeddings")
      ->envname("MCCNN_EMBEDDING_SEED");
  cmd->add_option("--format", opts.format, "Dataset format: olid or hateval")
      ->check(CLI::IsMember({"olid", "hateval"}))
      ->envname("MCCNN_FORMAT");
  cmd->add_option("--subtask", opts.subtask, "Sub-task selector: a, b or c")
      ->check(CLI::IsMember({"a", "b", "c"}))
      ->envname("MCCNN_SUBTASK");
}

void add_model_options(CLI::App* cmd, TrainOptions& opts) {
  ModelConfig& config = opts.model;
  cmd->add_option("--filter_sizes", config.filter_sizes, "Filter widths in tokens")
      ->delimiter(',')
      ->envname("MCCNN_FILTER_SIZES");
  cmd->add_option("--groups_per_size", config.groups_per_size,
                  "Filter groups per filter width")
      ->delimiter(',')
      ->envname("MCCNN_GROUPS_PER_SIZE");
  cmd->add_option("--group_size", config.group_size, "Filters per softmax group")
      ->envname("MCCNN_GROUP_SIZE");
  cmd->add_option("--filter_activation", opts.filter_activation,
                  "Activation on the filters")
      ->check(CLI::IsMember({"sigmoid", "relu", "tanh"}))
      ->envname("MCCNN_FILTER_ACTIVATION");
  cmd->add_option("--hidden_size", config.hidden_size, "Hidden layer width")
      ->envname("MCCNN_HIDDEN_SIZE");
  cmd->add_option("--hidden_activation", opts.hidden_activation,
                  "Hidden layer activation")
      ->check(CLI::IsMember({"tanh", "identity"}))
      ->envname("MCCNN_HIDDEN_ACTIVATION");
  cmd->add_option("--ensemble_size", config.ensemble_size, "Model duplications")
      ->envname("MCCNN_ENSEMBLE_SIZE");
  cmd->add_option("--max_tokens", config.max_tokens, "Token cap per example")
      ->envname("MCCNN_MAX_TOKENS");
}

void add_train_options(CLI::App* cmd, TrainConfig& config) {
  cmd->add_option("--learning_rate", config.learning_rate, "Adam learning rate")
      ->envname("MCCNN_LEARNING_RATE");
  cmd->add_option("--beta1", config.beta1, "Adam beta1")->envname("MCCNN_BETA1");
  cmd->add_option("--beta2", config.beta2, "Adam beta2")->envname("MCCNN_BETA2");
  cmd->add_option("--epsilon", config.epsilon, "Adam epsilon")
      ->envname("MCCNN_EPSILON");
  cmd->add_option("--batch_size", config.batch_size, "Mini-batch size")
      ->envname("MCCNN_BATCH_SIZE");
  cmd->add_option("--max_epochs", config.max_epochs, "Epoch cap")
      ->envname("MCCNN_MAX_EPOCHS");
  cmd->add_option("--patience", config.patience,
                  "Epochs tolerated without dev improvement")
      ->envname("MCCNN_PATIENCE");
  cmd->add_option("--dev_fraction", config.dev_fraction,
                  "Fraction of training data held out per class")
      ->envname("MCCNN_DEV_FRACTION");
}

std::unique_ptr<EmbeddingProvider> make_provider(const PipelineOptions& opts) {
  if (opts.embedding_kind == "hashed") {
    return make_hashed_random(opts.embedding_dim, opts.embedding_seed);
  }
  if (opts.embedding_path.empty()) {
    throw std::runtime_error("--embedding_path is required for the " +
                             opts.embedding_kind + " embedding kind");
  }
  if (opts.embedding_kind == "static") return load_static_table(opts.embedding_path);
  return load_precomputed(opts.embedding_path);
}

LabelSchema resolve_schema(const PipelineOptions& opts) {
  return schema_for(dataset_format_from_string(opts.format),
                    subtask_from_string(opts.subtask));
}

std::vector<Example> load_examples(const std::string& path,
                                   const PipelineOptions& opts) {
  return load_dataset(path, dataset_format_from_string(opts.format),
                      subtask_from_string(opts.subtask));
}

void write_history(const std::string& path, const std::vector<TrainHistory>& histories) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << "member\tepoch\ttrain_loss\tdev_macro_f1\tdev_accuracy\tbest\n";
  char line[160];
  for (std::size_t m = 0; m < histories.size(); ++m) {
    const TrainHistory& history = histories[m];
    for (std::size_t e = 0; e < history.train_loss.size(); ++e) {
      std::snprintf(line, sizeof line, "%zu\t%zu\t%.17g\t%.17g\t%.17g\t%d\n", m, e,
                    history.train_loss[e], history.dev_macro_f1[e],
                    history.dev_accuracy[e], e == history.best_epoch ? 1 : 0);
      out << line;
    }
  }
}

int run_train(const TrainOptions& opts, const PipelineOptions& pipeline,
              const std::string& echoed_config) {
  const auto start = std::chrono::steady_clock::now();
  const LabelSchema schema = resolve_schema(pipeline);

  ModelConfig model_config = opts.model;
  model_config.filter_activation = activation_from_string(opts.filter_activation);
  model_config.hidden_activation = activation_from_string(opts.hidden_activation);
  model_config.seed = opts.train.seed;
  model_config.num_classes = schema.num_classes();

  const std::vector<Example> dataset = load_examples(opts.dataset_path, pipeline);
  const auto [train_split, dev_split] =
      stratified_split(dataset, opts.train.dev_fraction, opts.train.seed);

  const SubwordVocabulary vocab = SubwordVocabulary::load(pipeline.vocab_path);
  const auto provider = make_provider(pipeline);
  model_config.embedding_dim = provider->dimension();
  model_config.validate();

  const auto train_embedded =
      embed_examples(*provider, vocab, model_config.max_tokens, train_split);
  const auto dev_embedded =
      embed_examples(*provider, vocab, model_config.max_tokens, dev_split);

  std::vector<TrainHistory> histories;
  const Ensemble ensemble =
      train_ensemble(model_config, opts.train, train_embedded, dev_embedded,
                     opts.parallel_members, &histories);

  save_model(ensemble, opts.checkpoint_path);
  const std::string history_path = opts.history_path.empty()
                                       ? opts.checkpoint_path + ".history.tsv"
                                       : opts.history_path;
  write_history(history_path, histories);

  if (opts.echo_config) std::cout << echoed_config;
  std::cout << "checkpoint " << opts.checkpoint_path << "\n";
  std::cout << "history " << history_path << "\n";
  std::cout << "train_examples " << train_embedded.size() << "\n";
  std::cout << "dev_examples " << dev_embedded.size() << "\n";

  const auto predictor = make_ensemble_predictor(ensemble, vocab, *provider);
  std::cout << format_report(evaluate(*predictor, dev_split, schema), schema);
  if (!opts.deterministic_output) {
    std::printf("elapsed_seconds %.3f\n", seconds_since(start));
  }
  return 0;
}

int run_predict(const std::string& checkpoint, const std::string& input,
                const std::string& output, const PipelineOptions& pipeline) {
  const Ensemble ensemble = load_model(checkpoint);
  const LabelSchema schema = resolve_schema(pipeline);
  if (schema.num_classes() != ensemble.config.num_classes) {
    throw std::runtime_error("checkpoint has " +
                             std::to_string(ensemble.config.num_classes) +
                             " classes but " + schema.name + " has " +
                             std::to_string(schema.num_classes()));
  }
  const SubwordVocabulary vocab = SubwordVocabulary::load(pipeline.vocab_path);
  const auto provider = make_provider(pipeline);
  if (provider->dimension() != ensemble.config.embedding_dim) {
    throw std::runtime_error("embedding dimension " +
                             std::to_string(provider->dimension()) +
                             " does not match the checkpoint's " +
                             std::to_string(ensemble.config.embedding_dim));
  }

  const std::vector<Example> examples = load_examples(input, pipeline);
  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!output.empty()) {
    file.open(output);
    if (!file) throw std::runtime_error(output + ": cannot open for writing");
    out = &file;
  }

  char buffer[64];
  for (const Example& example : examples) {
    const TokenSequence tokens =
        tokenize(normalize_text(example.text), vocab, ensemble.config.max_tokens);
    const std::vector<double> probs =
        ensemble_predict(ensemble, provider->embed(tokens, example.id));
    *out << example.id << '\t' << schema.classes[predicted_class(probs)];
    for (double p : probs) {
      std::snprintf(buffer, sizeof buffer, "%.17g", p);
      *out << '\t' << buffer;
    }
    *out << '\n';
  }
  return 0;
}

struct BaselineOptions {
  std::string kind = "mfc";
  std::string constant_class;
  std::string train_path;
  std::size_t epochs = 30;
  double learning_rate = 0.1;
  std::uint64_t seed = 1;
};

void add_baseline_options(CLI::App* cmd, BaselineOptions& opts, bool require_kind) {
  auto* kind = cmd->add_option("--kind", opts.kind,
                               "Baseline kind: mfc, constant or tfidf")
                   ->check(CLI::IsMember({"mfc", "constant", "tfidf"}))
                   ->envname("MCCNN_BASELINE_KIND");
  if (require_kind) kind->required();
  cmd->add_option("--constant_class", opts.constant_class,
                  "Class label emitted by the constant baseline")
      ->envname("MCCNN_CONSTANT_CLASS");
  cmd->add_option("--train", opts.train_path,
                  "Training file for the mfc/tfidf baselines")
      ->envname("MCCNN_TRAIN");
  cmd->add_option("--epochs", opts.epochs, "Linear-baseline training epochs")
      ->envname("MCCNN_BASELINE_EPOCHS");
  cmd->add_option("--lr", opts.learning_rate, "Linear-baseline learning rate")
      ->envname("MCCNN_BASELINE_LR");
  cmd->add_option("--seed", opts.seed, "Linear-baseline seed")
      ->envname("MCCNN_BASELINE_SEED");
}

std::unique_ptr<Predictor> build_baseline(const BaselineOptions& opts,
                                          const PipelineOptions& pipeline,
                                          const LabelSchema& schema,
                                          const SubwordVocabulary* vocab,
                                          std::size_t max_tokens) {
  if (opts.kind == "constant") {
    const int index = schema.index_of(opts.constant_class);
    if (index < 0) {
      throw std::runtime_error("--constant_class '" + opts.constant_class +
                               "' is not a class of " + schema.name);
    }
    return constant_baseline(static_cast<std::size_t>(index));
  }
  if (opts.train_path.empty()) {
    throw std::runtime_error("--train is required for the " + opts.kind + " baseline");
  }
  const std::vector<Example> train = load_examples(opts.train_path, pipeline);
  if (opts.kind == "mfc") {
    return mfc_baseline(class_distribution(train, schema));
  }
  // tfidf
  if (vocab == nullptr) {
    throw std::runtime_error("--vocab is required for the tfidf baseline");
  }
  std::vector<TokenSequence> corpus;
  std::vector<int> labels;
  for (const Example& example : train) {
    if (!example.label.has_value()) {
      throw std::runtime_error("train example '" + example.id + "' has no label");
    }
    corpus.push_back(tokenize(normalize_text(example.text), *vocab, max_tokens));
    labels.push_back(*example.label);
  }
  TfidfVectorization tfidf = tfidf_vectorize(corpus);
  LinearModel linear =
      train_linear_baseline(tfidf.vectors, labels, schema.num_classes(), opts.epochs,
                            opts.learning_rate, opts.seed);
  return make_tfidf_predictor(std::move(tfidf.model), std::move(linear), *vocab,
                              max_tokens);
}

int run_gradcheck(std::uint64_t seed, std::size_t trials, double eps,
                  bool deterministic_output) {
  const auto start = std::chrono::steady_clock::now();
  const GradientCheckReport report = gradient_check(seed, trials, eps);
  std::printf("max_relative_error %.6e\n", report.max_rel_error);
  std::printf("trials %zu\n", report.trials);
  if (!deterministic_output) {
    std::printf("elapsed_seconds %.3f\n", seconds_since(start));
  }
  if (report.max_rel_error > 1e-4) {
    std::cout << "FAIL gradient check exceeded 1e-4\n";
    return 1;
  }
  std::cout << "PASS gradient check within 1e-4\n";
  return 0;
}

int run_reproduce_baselines(double tolerance) {
  const std::vector<BaselineCheck> checks = reproduce_reference_baselines(tolerance);
  bool all_pass = true;
  for (const BaselineCheck& check : checks) {
    std::printf("%s %s %.4f %.4f (computed %.4f %.4f)\n",
                check.pass ? "PASS" : "FAIL", check.name.c_str(), check.expected_f1,
                check.expected_accuracy, check.actual_f1, check.actual_accuracy);
    all_pass = all_pass && check.pass;
  }
  if (!all_pass) {
    std::cout << "FAIL baseline reproduction outside tolerance\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiple-choice CNN text classification toolkit"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  std::string config_path;

  // train
  TrainOptions train_opts;
  PipelineOptions train_pipeline;
  CLI::App* train_cmd = app.add_subcommand("train", "Train an ensemble");
  add_config_option(train_cmd, config_path);
  train_cmd->add_option("--dataset", train_opts.dataset_path, "Labeled training file")
      ->required()
      ->envname("MCCNN_DATASET");
  train_cmd->add_option("--checkpoint", train_opts.checkpoint_path,
                        "Output checkpoint path")
      ->required()
      ->envname("MCCNN_CHECKPOINT");
  train_cmd->add_option("--history", train_opts.history_path,
                        "Output per-epoch history TSV")
      ->envname("MCCNN_HISTORY");
  train_cmd->add_option("--seed", train_opts.train.seed, "Base seed")
      ->envname("MCCNN_SEED");
  train_cmd->add_option("--parallel_members,--parallel-members",
                        train_opts.parallel_members,
                        "Train up to N ensemble members concurrently")
      ->envname("MCCNN_PARALLEL_MEMBERS");
  train_cmd->add_flag("--deterministic_output,--deterministic-output",
                      train_opts.deterministic_output, "Suppress timing lines");
  train_cmd->add_flag("--echo_config", train_opts.echo_config,
                      "Print the effective configuration");
  add_pipeline_options(train_cmd, train_pipeline, /*need_vocab=*/true);
  add_model_options(train_cmd, train_opts);
  add_train_options(train_cmd, train_opts.train);

  // predict
  PipelineOptions predict_pipeline;
  std::string predict_checkpoint;
  std::string predict_input;
  std::string predict_output;
  CLI::App* predict_cmd =
      app.add_subcommand("predict", "Emit per-example labels and probabilities");
  add_config_option(predict_cmd, config_path);
  predict_cmd->add_option("--checkpoint", predict_checkpoint, "Trained checkpoint")
      ->required()
      ->envname("MCCNN_CHECKPOINT");
  predict_cmd->add_option("--input", predict_input, "Input dataset file")
      ->required()
      ->envname("MCCNN_INPUT");
  predict_cmd->add_option("--output", predict_output,
                          "Output TSV (stdout when omitted)")
      ->envname("MCCNN_OUTPUT");
  add_pipeline_options(predict_cmd, predict_pipeline, /*need_vocab=*/true);

  // evaluate
  PipelineOptions evaluate_pipeline;
  BaselineOptions evaluate_baseline;
  std::string evaluate_checkpoint;
  std::string evaluate_dataset;
  bool evaluate_use_baseline = false;
  CLI::App* evaluate_cmd =
      app.add_subcommand("evaluate", "Score a checkpoint or baseline");
  add_config_option(evaluate_cmd, config_path);
  evaluate_cmd->add_option("--dataset", evaluate_dataset, "Labeled evaluation file")
      ->required()
      ->envname("MCCNN_DATASET");
  evaluate_cmd->add_option("--checkpoint", evaluate_checkpoint, "Trained checkpoint")
      ->envname("MCCNN_CHECKPOINT");
  evaluate_cmd->add_flag("--baseline", evaluate_use_baseline,
                         "Evaluate the baseline selected by --kind instead");
  add_baseline_options(evaluate_cmd, evaluate_baseline, /*require_kind=*/false);
  add_pipeline_options(evaluate_cmd, evaluate_pipeline, /*need_vocab=*/false);

  // baseline
  PipelineOptions baseline_pipeline;
  BaselineOptions baseline_opts;
  std::string baseline_test;
  bool baseline_deterministic = false;
  CLI::App* baseline_cmd =
      app.add_subcommand("baseline", "Run the mfc/constant/tfidf baselines");
  add_config_option(baseline_cmd, config_path);
  baseline_cmd->add_option("--test", baseline_test, "Labeled evaluation file")
      ->required()
      ->envname("MCCNN_TEST");
  baseline_cmd->add_flag("--deterministic_output,--deterministic-output",
                         baseline_deterministic, "Suppress timing lines");
  add_baseline_options(baseline_cmd, baseline_opts, /*require_kind=*/true);
  add_pipeline_options(baseline_cmd, baseline_pipeline, /*need_vocab=*/false);

  // gradcheck
  std::uint64_t gradcheck_seed = 1;
  std::size_t gradcheck_trials = 3;
  double gradcheck_eps = 1e-5;
  bool gradcheck_deterministic = false;
  CLI::App* gradcheck_cmd = app.add_subcommand(
      "gradcheck", "Compare analytic gradients against finite differences");
  gradcheck_cmd->add_option("--seed", gradcheck_seed, "Seed")->envname("MCCNN_SEED");
  gradcheck_cmd->add_option("--trials", gradcheck_trials, "Random configurations")
      ->check(CLI::PositiveNumber);
  gradcheck_cmd->add_option("--eps", gradcheck_eps, "Central-difference step");
  gradcheck_cmd->add_flag("--deterministic_output,--deterministic-output",
                          gradcheck_deterministic, "Suppress timing lines");

  // reproduce-baselines
  double reproduce_tolerance = 5e-4;
  CLI::App* reproduce_cmd = app.add_subcommand(
      "reproduce-baselines",
      "Check the constant baselines against their published scores");
  reproduce_cmd->add_option("--tolerance", reproduce_tolerance,
                            "Allowed absolute deviation");

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    const std::string config_file = find_config_path(args);
    if (!config_file.empty()) {
      const std::vector<std::string> extra = config_args_from_file(config_file, args);
      args.insert(args.end(), extra.begin(), extra.end());
    }
    std::reverse(args.begin(), args.end());  // CLI11 consumes reversed argv
    app.parse(args);

    if (train_cmd->parsed()) {
      return run_train(train_opts, train_pipeline,
                       train_cmd->config_to_str(true, false));
    }
    if (predict_cmd->parsed()) {
      return run_predict(predict_checkpoint, predict_input, predict_output,
                         predict_pipeline);
    }
    if (evaluate_cmd->parsed()) {
      const LabelSchema schema = resolve_schema(evaluate_pipeline);
      const std::vector<Example> dataset =
          load_examples(evaluate_dataset, evaluate_pipeline);
      std::unique_ptr<Predictor> predictor;
      SubwordVocabulary vocab;
      Ensemble ensemble;
      std::unique_ptr<EmbeddingProvider> provider;
      if (evaluate_use_baseline) {
        const bool needs_vocab = evaluate_baseline.kind == "tfidf";
        if (needs_vocab) {
          if (evaluate_pipeline.vocab_path.empty()) {
            throw std::runtime_error("--vocab is required for the tfidf baseline");
          }
          vocab = SubwordVocabulary::load(evaluate_pipeline.vocab_path);
        }
        predictor = build_baseline(evaluate_baseline, evaluate_pipeline, schema,
                                   needs_vocab ? &vocab : nullptr, kDefaultMaxTokens);
      } else {
        if (evaluate_checkpoint.empty()) {
          throw std::runtime_error("pass --checkpoint or --baseline with --kind");
        }
        ensemble = load_model(evaluate_checkpoint);
        if (schema.num_classes() != ensemble.config.num_classes) {
          throw std::runtime_error("checkpoint classes do not match " + schema.name);
        }
        if (evaluate_pipeline.vocab_path.empty()) {
          throw std::runtime_error("--vocab is required to evaluate a checkpoint");
        }
        vocab = SubwordVocabulary::load(evaluate_pipeline.vocab_path);
        provider = make_provider(evaluate_pipeline);
        if (provider->dimension() != ensemble.config.embedding_dim) {
          throw std::runtime_error("embedding dimension does not match checkpoint");
        }
        predictor = make_ensemble_predictor(ensemble, vocab, *provider);
      }
      std::cout << format_report(evaluate(*predictor, dataset, schema), schema);
      return 0;
    }
    if (baseline_cmd->parsed()) {
      const auto start = std::chrono::steady_clock::now();
      const LabelSchema schema = resolve_schema(baseline_pipeline);
      SubwordVocabulary vocab;
      const bool needs_vocab = baseline_opts.kind == "tfidf";
      if (needs_vocab) {
        if (baseline_pipeline.vocab_path.empty()) {
          throw std::runtime_error("--vocab is required for the tfidf baseline");
        }
        vocab = SubwordVocabulary::load(baseline_pipeline.vocab_path);
      }
      const auto predictor =
          build_baseline(baseline_opts, baseline_pipeline, schema,
                         needs_vocab ? &vocab : nullptr, kDefaultMaxTokens);
      const std::vector<Example> test = load_examples(baseline_test, baseline_pipeline);
      std::cout << format_report(evaluate(*predictor, test, schema), schema);
      if (!baseline_deterministic) {
        std::printf("elapsed_seconds %.3f\n", seconds_since(start));
      }
      return 0;
    }
    if (gradcheck_cmd->parsed()) {
      return run_gradcheck(gradcheck_seed, gradcheck_trials, gradcheck_eps,
                           gradcheck_deterministic);
    }
    if (reproduce_cmd->parsed()) {
      return run_reproduce_baselines(reproduce_tolerance);
    }
    std::cerr << "error: no subcommand selected\n";
    return 2;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
