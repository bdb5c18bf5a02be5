#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>
#include <vector>

#include "mccnn/rng.hpp"
#include "mccnn/text_pipeline.hpp"
#include "test_util.hpp"

using namespace mccnn;

TEST_CASE("normalize_text replaces urls and handles") {
  CHECK(normalize_text("Check https://t.co/abc @Bob!") == "check <url> <user>!");
  CHECK(normalize_text("") == "");
  CHECK(normalize_text("A  B") == "a b");
  CHECK(normalize_text("see www.example.com now") == "see <url> now");
  CHECK(normalize_text("HTTP://CAPS.example/x tail") == "<url> tail");
  CHECK(normalize_text("mail @ nothing") == "mail @ nothing");  // bare @ kept
  CHECK(normalize_text("  padded\t\ttext \n") == "padded text");
  // Handles are capped at 15 word characters.
  CHECK(normalize_text("@abcdefghijklmnop") == "<user>p");
}

TEST_CASE("normalize_text is idempotent") {
  Rng rng(7);
  const std::vector<std::string> pieces = {"Hello",   "https://x.co/q", "@Someone",
                                           "WORLD!!", "www.a.b",        "\t",
                                           "  ",      "C3PO",           "@x"};
  for (int trial = 0; trial < 200; ++trial) {
    std::string text;
    const std::size_t parts = rng.below(8);
    for (std::size_t i = 0; i < parts; ++i) {
      text += pieces[rng.below(pieces.size())];
      text += rng.below(2) == 0 ? " " : "";
    }
    const std::string once = normalize_text(text);
    CHECK(normalize_text(once) == once);
  }
}

TEST_CASE("tokenize greedy longest match") {
  const auto vocab = SubwordVocabulary::from_tokens({"un", "##believ", "##able"});
  const TokenSequence expected = {"un", "##believ", "##able"};
  CHECK(tokenize("unbelievable", vocab) == expected);
}

TEST_CASE("tokenize special token passthrough") {
  const SubwordVocabulary vocab;  // specials only
  CHECK(tokenize("<url>", vocab) == TokenSequence{kUrlToken});
  CHECK(tokenize("<user>", vocab) == TokenSequence{kUserToken});
  CHECK(tokenize("mystery", vocab) == TokenSequence{kUnkToken});
}

TEST_CASE("tokenize truncates to max_tokens") {
  const auto vocab = SubwordVocabulary::from_tokens({"a"});
  std::string text;
  for (int i = 0; i < 81; ++i) text += "a ";
  CHECK(tokenize(text, vocab).size() == 80);
  CHECK(tokenize(text, vocab, 5).size() == 5);
}

TEST_CASE("tokenize properties: bounded length, known tokens only") {
  const auto vocab = SubwordVocabulary::from_tokens({"ab", "cd", "##ab", "##cd", "x"});
  Rng rng(13);
  for (int trial = 0; trial < 300; ++trial) {
    std::string text;
    const std::size_t words = rng.below(30);
    for (std::size_t w = 0; w < words; ++w) {
      const std::size_t len = 1 + rng.below(6);
      for (std::size_t i = 0; i < len; ++i) {
        text += "abcdxy"[rng.below(6)];
      }
      text += ' ';
    }
    const TokenSequence tokens = tokenize(text, vocab, 10);
    CHECK(tokens.size() <= 10);
    for (const std::string& token : tokens) {
      CHECK(vocab.contains(token));
    }
  }
}

TEST_CASE("vocabulary load: continuation pieces and duplicates") {
  testing::TempDir dir;
  const std::string path = dir.write("vocab.txt", "hello\n##lo\nworld\n");
  const SubwordVocabulary vocab = SubwordVocabulary::load(path);
  CHECK(vocab.contains("hello"));
  CHECK(vocab.contains("##lo"));
  CHECK(vocab.contains(kUnkToken));  // specials always present

  const std::string dup = dir.write("dup.txt", "a\nb\na\n");
  CHECK_THROWS_WITH_AS(SubwordVocabulary::load(dup),
                       doctest::Contains("duplicate token 'a'"), std::runtime_error);
}

namespace {

const char* kToyOlid =
    "id\ttweet\tsubtask_a\tsubtask_b\tsubtask_c\n"
    "86426\t@USER she should ask a few native Americans\tOFF\tUNT\tNULL\n"
    "90194\t@USER @USER go home you're drunk\tNOT\tNULL\tNULL\n"
    "16820\tURL Was this done on purpose?\tOFF\tTIN\tIND\n";

const char* kToyHateval =
    "id\ttext\tHS\tTR\tAG\n"
    "201\tHurray, saving us from the invasion\t1\t0\t0\n"
    "202\tsuch a lovely day\t0\t0\t0\n";

}  // namespace

TEST_CASE("load_dataset olid subtask a") {
  testing::TempDir dir;
  const std::string path = dir.write("olid.tsv", kToyOlid);
  const auto examples = load_dataset(path, DatasetFormat::olid, Subtask::a);
  REQUIRE(examples.size() == 3);
  CHECK(examples[0].label == 1);
  CHECK(examples[1].label == 0);
  CHECK(examples[2].label == 1);
  CHECK(examples[0].id == "86426");
}

TEST_CASE("load_dataset skips NULL label rows") {
  testing::TempDir dir;
  const std::string path = dir.write("olid.tsv", kToyOlid);
  const auto b = load_dataset(path, DatasetFormat::olid, Subtask::b);
  REQUIRE(b.size() == 2);
  CHECK(b[0].label == 1);  // UNT
  CHECK(b[1].label == 0);  // TIN
  const auto c = load_dataset(path, DatasetFormat::olid, Subtask::c);
  REQUIRE(c.size() == 1);
  CHECK(c[0].label == 1);  // IND
}

TEST_CASE("load_dataset hateval") {
  testing::TempDir dir;
  const std::string path = dir.write("hateval.tsv", kToyHateval);
  const auto examples = load_dataset(path, DatasetFormat::hateval, Subtask::a);
  REQUIRE(examples.size() == 2);
  CHECK(examples[0].label == 1);
  CHECK(examples[1].label == 0);
  CHECK_THROWS(load_dataset(path, DatasetFormat::hateval, Subtask::b));
}

TEST_CASE("load_dataset error paths") {
  testing::TempDir dir;
  CHECK_THROWS(load_dataset(dir.file("missing.tsv"), DatasetFormat::olid, Subtask::a));

  const std::string bad_cols = dir.write(
      "bad.tsv", "id\ttweet\tsubtask_a\tsubtask_b\tsubtask_c\n1\tonly two\tOFF\n");
  CHECK_THROWS_WITH_AS(load_dataset(bad_cols, DatasetFormat::olid, Subtask::a),
                       doctest::Contains(":2: expected 5 columns, got 3"),
                       std::runtime_error);

  const std::string bad_label = dir.write(
      "lbl.tsv",
      "id\ttweet\tsubtask_a\tsubtask_b\tsubtask_c\n1\they\tMAYBE\tNULL\tNULL\n");
  CHECK_THROWS_WITH_AS(load_dataset(bad_label, DatasetFormat::olid, Subtask::a),
                       doctest::Contains("unknown label 'MAYBE'"), std::runtime_error);
}

TEST_CASE("load_dataset without the label column yields unlabeled examples") {
  testing::TempDir dir;
  const std::string path =
      dir.write("test.tsv", "id\ttweet\n77\tsomething to classify\n");
  const auto examples = load_dataset(path, DatasetFormat::olid, Subtask::a);
  REQUIRE(examples.size() == 1);
  CHECK_FALSE(examples[0].label.has_value());
}

TEST_CASE("class_distribution") {
  testing::TempDir dir;
  const std::string path = dir.write("olid.tsv", kToyOlid);
  const auto examples = load_dataset(path, DatasetFormat::olid, Subtask::a);
  const auto counts = class_distribution(examples, offenseval_a_schema());
  CHECK(counts == std::vector<std::size_t>{1, 2});

  CHECK(class_distribution({}, offenseval_a_schema()) ==
        std::vector<std::size_t>{0, 0});

  std::vector<Example> unlabeled = {{"x", "text", std::nullopt}};
  CHECK_THROWS(class_distribution(unlabeled, offenseval_a_schema()));
}

TEST_CASE("distribution counts sum to non-skipped rows") {
  testing::TempDir dir;
  const std::string path = dir.write("olid.tsv", kToyOlid);
  for (Subtask subtask : {Subtask::a, Subtask::b, Subtask::c}) {
    const auto examples = load_dataset(path, DatasetFormat::olid, subtask);
    const auto counts =
        class_distribution(examples, schema_for(DatasetFormat::olid, subtask));
    std::size_t sum = 0;
    for (std::size_t count : counts) sum += count;
    CHECK(sum == examples.size());
  }
}
