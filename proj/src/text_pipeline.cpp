#include "mccnn/text_pipeline.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mccnn {

namespace {

bool is_space_char(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

bool is_word_char(char c) {
  unsigned char u = static_cast<unsigned char>(c);
  return std::isalnum(u) != 0 || c == '_';
}

char ascii_lower(char c) {
  return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

// ASCII case-insensitive prefix match at `pos`.
bool starts_with_ci(const std::string& s, std::size_t pos, std::string_view prefix) {
  if (pos + prefix.size() > s.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (ascii_lower(s[pos + i]) != prefix[i]) return false;
  }
  return true;
}

constexpr std::size_t kMaxHandleChars = 15;

}  // namespace

int LabelSchema::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < classes.size(); ++i) {
    if (classes[i] == label) return static_cast<int>(i);
  }
  return -1;
}

LabelSchema offenseval_a_schema() { return {"offenseval-a", {"NOT", "OFF"}}; }
LabelSchema offenseval_b_schema() { return {"offenseval-b", {"TIN", "UNT"}}; }
LabelSchema offenseval_c_schema() { return {"offenseval-c", {"GRP", "IND", "OTH"}}; }
LabelSchema hateval_a_schema() { return {"hateval-a", {"NOT_HS", "HS"}}; }

SubwordVocabulary::SubwordVocabulary() {
  entries_ = {kUrlToken, kUserToken, kUnkToken};
}

SubwordVocabulary SubwordVocabulary::from_tokens(const std::vector<std::string>& tokens) {
  SubwordVocabulary vocab;
  for (const auto& token : tokens) vocab.entries_.insert(token);
  return vocab;
}

SubwordVocabulary SubwordVocabulary::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open vocabulary file");
  SubwordVocabulary vocab;
  vocab.entries_.clear();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!vocab.entries_.insert(line).second) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": duplicate token '" + line + "'");
    }
  }
  vocab.entries_.insert(kUrlToken);
  vocab.entries_.insert(kUserToken);
  vocab.entries_.insert(kUnkToken);
  return vocab;
}

std::string normalize_text(const std::string& raw) {
  std::string replaced;
  replaced.reserve(raw.size());
  std::size_t i = 0;
  const std::size_t n = raw.size();
  while (i < n) {
    const bool token_start = i == 0 || is_space_char(raw[i - 1]);
    if (starts_with_ci(raw, i, "http://") || starts_with_ci(raw, i, "https://") ||
        (token_start && starts_with_ci(raw, i, "www."))) {
      replaced += kUrlToken;
      while (i < n && !is_space_char(raw[i])) ++i;
      continue;
    }
    if (raw[i] == '@') {
      std::size_t j = i + 1;
      while (j < n && j - i - 1 < kMaxHandleChars && is_word_char(raw[j])) ++j;
      if (j > i + 1) {
        replaced += kUserToken;
        i = j;
        continue;
      }
    }
    replaced += ascii_lower(raw[i]);
    ++i;
  }

  std::string out;
  out.reserve(replaced.size());
  bool pending_space = false;
  for (char c : replaced) {
    if (is_space_char(c)) {
      pending_space = true;
      continue;
    }
    if (pending_space && !out.empty()) out += ' ';
    pending_space = false;
    out += c;
  }
  return out;
}

namespace {

// Greedy longest-match decomposition of one word. Appends pieces to `out`
// until `max_tokens` is reached.
void append_word_pieces(const std::string& word, const SubwordVocabulary& vocab,
                        std::size_t max_tokens, TokenSequence& out) {
  if (word == kUrlToken || word == kUserToken || word == kUnkToken) {
    if (out.size() < max_tokens) out.push_back(word);
    return;
  }
  std::vector<std::string> pieces;
  std::size_t start = 0;
  while (start < word.size()) {
    std::size_t end = word.size();
    std::string match;
    while (end > start) {
      std::string candidate = word.substr(start, end - start);
      if (start > 0) candidate = "##" + candidate;
      if (vocab.contains(candidate)) {
        match = std::move(candidate);
        break;
      }
      --end;
    }
    if (match.empty()) {
      // Unmatched residue: the whole word maps to a single <unk>.
      pieces.assign(1, kUnkToken);
      break;
    }
    pieces.push_back(std::move(match));
    start = end;
  }
  for (auto& piece : pieces) {
    if (out.size() >= max_tokens) break;
    out.push_back(std::move(piece));
  }
}

}  // namespace

TokenSequence tokenize(const std::string& normalized, const SubwordVocabulary& vocab,
                       std::size_t max_tokens) {
  TokenSequence out;
  std::size_t i = 0;
  const std::size_t n = normalized.size();
  while (i < n && out.size() < max_tokens) {
    while (i < n && is_space_char(normalized[i])) ++i;
    if (i >= n) break;
    std::size_t j = i;
    while (j < n && !is_space_char(normalized[j])) ++j;
    append_word_pieces(normalized.substr(i, j - i), vocab, max_tokens, out);
    i = j;
  }
  return out;
}

DatasetFormat dataset_format_from_string(const std::string& name) {
  if (name == "olid") return DatasetFormat::olid;
  if (name == "hateval") return DatasetFormat::hateval;
  throw std::runtime_error("unknown dataset format '" + name + "'");
}

Subtask subtask_from_string(const std::string& name) {
  if (name == "a") return Subtask::a;
  if (name == "b") return Subtask::b;
  if (name == "c") return Subtask::c;
  throw std::runtime_error("unknown subtask '" + name + "'");
}

LabelSchema schema_for(DatasetFormat format, Subtask subtask) {
  if (format == DatasetFormat::olid) {
    switch (subtask) {
      case Subtask::a: return offenseval_a_schema();
      case Subtask::b: return offenseval_b_schema();
      case Subtask::c: return offenseval_c_schema();
    }
  }
  if (subtask != Subtask::a) {
    throw std::runtime_error("hateval supports only subtask a");
  }
  return hateval_a_schema();
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

int find_column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

std::vector<Example> load_dataset(const std::string& path, DatasetFormat format,
                                  Subtask subtask) {
  const LabelSchema schema = schema_for(format, subtask);
  std::string text_column;
  std::string label_column;
  if (format == DatasetFormat::olid) {
    text_column = "tweet";
    switch (subtask) {
      case Subtask::a: label_column = "subtask_a"; break;
      case Subtask::b: label_column = "subtask_b"; break;
      case Subtask::c: label_column = "subtask_c"; break;
    }
  } else {
    text_column = "text";
    label_column = "HS";
  }

  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open dataset file");

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_tabs(line);

  const int id_col = find_column(header, "id");
  const int text_col = find_column(header, text_column);
  const int label_col = find_column(header, label_column);
  if (id_col < 0) throw std::runtime_error(path + ": header is missing column 'id'");
  if (text_col < 0) {
    throw std::runtime_error(path + ": header is missing column '" + text_column + "'");
  }

  std::vector<Example> examples;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_tabs(line);
    if (fields.size() != header.size()) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected " +
                               std::to_string(header.size()) + " columns, got " +
                               std::to_string(fields.size()));
    }
    Example example;
    example.id = fields[id_col];
    example.text = fields[text_col];
    if (label_col >= 0) {
      const std::string& value = fields[label_col];
      if (format == DatasetFormat::olid && value == "NULL") continue;
      int index = -1;
      if (format == DatasetFormat::hateval) {
        if (value == "0") index = 0;
        else if (value == "1") index = 1;
      } else {
        index = schema.index_of(value);
      }
      if (index < 0) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": unknown label '" + value + "' for " + schema.name);
      }
      example.label = index;
    }
    examples.push_back(std::move(example));
  }
  return examples;
}

std::vector<std::size_t> class_distribution(const std::vector<Example>& dataset,
                                            const LabelSchema& schema) {
  std::vector<std::size_t> counts(schema.num_classes(), 0);
  for (const Example& example : dataset) {
    if (!example.label.has_value()) {
      throw std::runtime_error("example '" + example.id + "' has no label");
    }
    const int label = *example.label;
    if (label < 0 || static_cast<std::size_t>(label) >= counts.size()) {
      throw std::runtime_error("example '" + example.id + "' has label index " +
                               std::to_string(label) + " outside schema " + schema.name);
    }
    ++counts[label];
  }
  return counts;
}

}  // namespace mccnn
