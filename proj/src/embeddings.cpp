#include "mccnn/embeddings.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "mccnn/rng.hpp"

namespace mccnn {

namespace {

class StaticTableProvider final : public EmbeddingProvider {
 public:
  StaticTableProvider(Matrix table, std::unordered_map<std::string, std::size_t> index,
                      std::size_t unk_row)
      : table_(std::move(table)), index_(std::move(index)), unk_row_(unk_row) {}

  std::size_t dimension() const override { return table_.cols; }

  EmbeddedSequence embed(const TokenSequence& tokens, const std::string&) const override {
    EmbeddedSequence out(tokens.size(), table_.cols);
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      auto it = index_.find(tokens[t]);
      const std::size_t row = it == index_.end() ? unk_row_ : it->second;
      auto src = table_.row(row);
      auto dst = out.row(t);
      std::copy(src.begin(), src.end(), dst.begin());
    }
    return out;
  }

 private:
  Matrix table_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t unk_row_;
};

class PrecomputedProvider final : public EmbeddingProvider {
 public:
  PrecomputedProvider(std::unordered_map<std::string, Matrix> store, std::size_t dim)
      : store_(std::move(store)), dim_(dim) {}

  std::size_t dimension() const override { return dim_; }

  EmbeddedSequence embed(const TokenSequence& tokens,
                         const std::string& example_id) const override {
    auto it = store_.find(example_id);
    if (it == store_.end()) {
      throw std::runtime_error("no precomputed embedding for example id '" +
                               example_id + "'");
    }
    if (it->second.rows != tokens.size()) {
      throw std::runtime_error("precomputed embedding for '" + example_id + "' has " +
                               std::to_string(it->second.rows) + " rows, expected " +
                               std::to_string(tokens.size()));
    }
    return it->second;
  }

 private:
  std::unordered_map<std::string, Matrix> store_;
  std::size_t dim_;
};

class HashedRandomProvider final : public EmbeddingProvider {
 public:
  HashedRandomProvider(std::size_t dim, std::uint64_t seed)
      : dim_(dim), seed_(seed), scale_(1.0 / std::sqrt(static_cast<double>(dim))) {}

  std::size_t dimension() const override { return dim_; }

  EmbeddedSequence embed(const TokenSequence& tokens, const std::string&) const override {
    EmbeddedSequence out(tokens.size(), dim_);
    for (std::size_t t = 0; t < tokens.size(); ++t) {
      Rng rng(hash64(tokens[t], seed_));
      auto row = out.row(t);
      for (std::size_t c = 0; c < dim_; ++c) {
        row[c] = rng.uniform(-0.5, 0.5) * scale_;
      }
    }
    return out;
  }

 private:
  std::size_t dim_;
  std::uint64_t seed_;
  double scale_;
};

}  // namespace

std::unique_ptr<EmbeddingProvider> load_static_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open embedding table");

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ":1: missing header");
  std::istringstream header(line);
  long long vocab_size = -1;
  long long dim = -1;
  std::string extra;
  if (!(header >> vocab_size >> dim) || (header >> extra) || vocab_size < 0 || dim < 1) {
    throw std::runtime_error(path + ":1: malformed header, expected 'V d'");
  }

  Matrix table(static_cast<std::size_t>(vocab_size), static_cast<std::size_t>(dim));
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(static_cast<std::size_t>(vocab_size));

  std::size_t line_no = 1;
  for (long long row = 0; row < vocab_size; ++row) {
    if (!std::getline(in, line)) {
      throw std::runtime_error(path + ": unexpected end of file, expected " +
                               std::to_string(vocab_size) + " rows, got " +
                               std::to_string(row));
    }
    ++line_no;
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": empty row");
    }
    if (!index.emplace(token, static_cast<std::size_t>(row)).second) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": duplicate token '" + token + "'");
    }
    auto dst = table.row(static_cast<std::size_t>(row));
    for (long long c = 0; c < dim; ++c) {
      if (!(fields >> dst[static_cast<std::size_t>(c)])) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": expected " + std::to_string(dim) +
                                 " values after the token");
      }
    }
    if (fields >> extra) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected " + std::to_string(dim) +
                               " values after the token, found more");
    }
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    throw std::runtime_error(path + ":" + std::to_string(line_no) +
                             ": extra row beyond the " + std::to_string(vocab_size) +
                             " declared in the header");
  }

  auto unk = index.find(kUnkToken);
  if (unk == index.end()) {
    throw std::runtime_error(path + ": table is missing the required '" +
                             std::string(kUnkToken) + "' row");
  }
  return std::make_unique<StaticTableProvider>(std::move(table), std::move(index),
                                               unk->second);
}

std::unique_ptr<EmbeddingProvider> load_precomputed(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open precomputed embeddings");

  std::unordered_map<std::string, Matrix> store;
  std::size_t dim = 0;
  std::string id;
  while (in >> id) {
    long long rows = -1;
    long long cols = -1;
    if (!(in >> rows >> cols) || rows < 0 || cols < 1) {
      throw std::runtime_error(path + ": malformed block header for id '" + id + "'");
    }
    if (dim == 0) {
      dim = static_cast<std::size_t>(cols);
    } else if (static_cast<std::size_t>(cols) != dim) {
      throw std::runtime_error(path + ": block '" + id + "' has dimension " +
                               std::to_string(cols) + ", expected " +
                               std::to_string(dim));
    }
    Matrix block(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
    for (double& value : block.data) {
      if (!(in >> value)) {
        throw std::runtime_error(path + ": unexpected end of file in block '" + id + "'");
      }
    }
    if (!store.emplace(id, std::move(block)).second) {
      throw std::runtime_error(path + ": duplicate example id '" + id + "'");
    }
  }
  if (store.empty()) throw std::runtime_error(path + ": no embedding blocks found");
  return std::make_unique<PrecomputedProvider>(std::move(store), dim);
}

std::unique_ptr<EmbeddingProvider> make_hashed_random(std::size_t dimension,
                                                      std::uint64_t seed) {
  if (dimension == 0) throw std::runtime_error("embedding dimension must be >= 1");
  return std::make_unique<HashedRandomProvider>(dimension, seed);
}

std::vector<EmbeddedExample> embed_examples(const EmbeddingProvider& provider,
                                            const SubwordVocabulary& vocab,
                                            std::size_t max_tokens,
                                            const std::vector<Example>& examples) {
  std::vector<EmbeddedExample> out(examples.size());
  std::exception_ptr failure;
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::size_t i = 0; i < examples.size(); ++i) {
    try {
      const Example& example = examples[i];
      const TokenSequence tokens =
          tokenize(normalize_text(example.text), vocab, max_tokens);
      out[i] = {example.id, provider.embed(tokens, example.id), example.label};
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical(mccnn_embed_failure)
#endif
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace mccnn
