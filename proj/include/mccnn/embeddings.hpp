#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mccnn/matrix.hpp"
#include "mccnn/text_pipeline.hpp"

namespace mccnn {

// T x d matrix of per-token vectors, the model's input.
using EmbeddedSequence = Matrix;

// Uniform source of per-token vectors. Providers are immutable after
// construction; concurrent reads are safe.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::size_t dimension() const = 0;
  // Returns a len(tokens) x d matrix. `example_id` is only consulted by the
  // precomputed provider, which stores one matrix per example.
  virtual EmbeddedSequence embed(const TokenSequence& tokens,
                                 const std::string& example_id) const = 0;
};

// Text table: header line "V d", then V lines of token followed by d floats.
// Tokens absent at query time fall back to the <unk> row, which must exist.
std::unique_ptr<EmbeddingProvider> load_static_table(const std::string& path);

// Per-example matrices: repeated blocks "id T d" followed by T lines of d
// floats. All blocks must share one dimension.
std::unique_ptr<EmbeddingProvider> load_precomputed(const std::string& path);

// Deterministic synthetic vectors: each row is a pure function of
// (token text, seed), entries uniform in [-0.5, 0.5] scaled by 1/sqrt(d).
std::unique_ptr<EmbeddingProvider> make_hashed_random(std::size_t dimension,
                                                      std::uint64_t seed);

inline EmbeddedSequence embed_sequence(const EmbeddingProvider& provider,
                                       const TokenSequence& tokens,
                                       const std::string& example_id = {}) {
  return provider.embed(tokens, example_id);
}

// An example after the text pipeline: ready for the model.
struct EmbeddedExample {
  std::string id;
  EmbeddedSequence input;
  std::optional<int> label;
};

// normalize -> tokenize -> embed for a whole dataset.
std::vector<EmbeddedExample> embed_examples(const EmbeddingProvider& provider,
                                            const SubwordVocabulary& vocab,
                                            std::size_t max_tokens,
                                            const std::vector<Example>& examples);

}  // namespace mccnn
