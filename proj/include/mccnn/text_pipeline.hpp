#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

namespace mccnn {

inline constexpr const char* kUrlToken = "<url>";
inline constexpr const char* kUserToken = "<user>";
inline constexpr const char* kUnkToken = "<unk>";
inline constexpr std::size_t kDefaultMaxTokens = 80;

// Ordered set of class labels for one classification sub-task. The class
// index of a label is its position in `classes`.
struct LabelSchema {
  std::string name;
  std::vector<std::string> classes;

  std::size_t num_classes() const { return classes.size(); }
  // Index of `label`, or -1 if the schema does not contain it.
  int index_of(const std::string& label) const;
};

LabelSchema offenseval_a_schema();  // [NOT, OFF]
LabelSchema offenseval_b_schema();  // [TIN, UNT]
LabelSchema offenseval_c_schema();  // [GRP, IND, OTH]
LabelSchema hateval_a_schema();     // [NOT_HS, HS]

// One labeled (or, for prediction input, unlabeled) text instance.
struct Example {
  std::string id;
  std::string text;
  std::optional<int> label;
};

using TokenSequence = std::vector<std::string>;

// Sub-word vocabulary. Continuation pieces carry a leading "##". The special
// tokens <url>, <user> and <unk> are always present.
class SubwordVocabulary {
 public:
  SubwordVocabulary();

  static SubwordVocabulary from_tokens(const std::vector<std::string>& tokens);
  // One token per line, UTF-8; lines starting with "##" are continuation
  // pieces. Duplicate lines are an error.
  static SubwordVocabulary load(const std::string& path);

  bool contains(const std::string& piece) const { return entries_.count(piece) != 0; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_set<std::string> entries_;
};

// Replaces URLs with <url> and @handles with <user>, lowercases, collapses
// whitespace runs and strips leading/trailing whitespace. Total and
// idempotent.
std::string normalize_text(const std::string& raw);

// Whitespace-splits normalized text and decomposes each word by greedy
// longest-match against the vocabulary (non-initial pieces matched with the
// "##" prefix). A word with unmatched residue becomes a single <unk>. Output
// is truncated to the first `max_tokens` tokens.
TokenSequence tokenize(const std::string& normalized, const SubwordVocabulary& vocab,
                       std::size_t max_tokens = kDefaultMaxTokens);

enum class DatasetFormat { olid, hateval };
enum class Subtask { a, b, c };

DatasetFormat dataset_format_from_string(const std::string& name);
Subtask subtask_from_string(const std::string& name);
LabelSchema schema_for(DatasetFormat format, Subtask subtask);

// Reads a tab-separated dataset with a header row. OLID columns: id, tweet,
// subtask_a, subtask_b, subtask_c; HatEval columns: id, text, HS, TR, AG.
// Rows whose selected label column is "NULL" (OLID) are skipped. If the
// label column is absent from the header, examples are returned unlabeled.
std::vector<Example> load_dataset(const std::string& path, DatasetFormat format,
                                  Subtask subtask);

// Per-class example counts. Every example must be labeled.
std::vector<std::size_t> class_distribution(const std::vector<Example>& dataset,
                                            const LabelSchema& schema);

}  // namespace mccnn
