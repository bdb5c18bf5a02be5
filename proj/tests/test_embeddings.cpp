#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mccnn/embeddings.hpp"
#include "test_util.hpp"

using namespace mccnn;

namespace {

const char* kToyTable =
    "2 3\n"
    "<unk> 0 0 0\n"
    "cat 1 2 3\n";

}  // namespace

TEST_CASE("static table lookup and fallback") {
  testing::TempDir dir;
  const auto provider = load_static_table(dir.write("table.txt", kToyTable));
  CHECK(provider->dimension() == 3);

  const EmbeddedSequence cat = provider->embed({"cat"}, "");
  CHECK(cat.rows == 1);
  CHECK(cat.row(0)[0] == 1.0);
  CHECK(cat.row(0)[1] == 2.0);
  CHECK(cat.row(0)[2] == 3.0);

  const EmbeddedSequence dog = provider->embed({"dog"}, "");
  CHECK(dog.row(0)[0] == 0.0);
  CHECK(dog.row(0)[1] == 0.0);
  CHECK(dog.row(0)[2] == 0.0);

  const EmbeddedSequence both = provider->embed({"cat", "dog"}, "");
  CHECK(both.rows == 2);
  CHECK(both.row(1)[2] == 0.0);

  const EmbeddedSequence empty = provider->embed({}, "");
  CHECK(empty.rows == 0);
  CHECK(empty.cols == 3);
}

TEST_CASE("static table load errors") {
  testing::TempDir dir;
  CHECK_THROWS_WITH_AS(
      load_static_table(dir.write("extra.txt",
                                  "2 3\n<unk> 0 0 0\ncat 1 2 3\ndog 4 5 6\n")),
      doctest::Contains(":4:"), std::runtime_error);
  CHECK_THROWS_WITH_AS(load_static_table(dir.write("hdr.txt", "two three\n")),
                       doctest::Contains("malformed header"), std::runtime_error);
  CHECK_THROWS_WITH_AS(
      load_static_table(dir.write("arity.txt", "2 3\n<unk> 0 0 0\ncat 1 2\n")),
      doctest::Contains(":3:"), std::runtime_error);
  CHECK_THROWS_WITH_AS(
      load_static_table(dir.write("dup.txt", "2 3\n<unk> 0 0 0\n<unk> 1 1 1\n")),
      doctest::Contains("duplicate token"), std::runtime_error);
  CHECK_THROWS_WITH_AS(
      load_static_table(dir.write("nounk.txt", "1 2\ncat 1 2\n")),
      doctest::Contains("<unk>"), std::runtime_error);
  CHECK_THROWS(load_static_table(dir.write("short.txt", "3 2\n<unk> 0 0\n")));
}

TEST_CASE("precomputed provider") {
  testing::TempDir dir;
  const auto provider = load_precomputed(
      dir.write("pre.txt", "ex1 2 2\n1 0\n0 1\nex2 1 2\n5 6\n"));
  CHECK(provider->dimension() == 2);

  const EmbeddedSequence identity = provider->embed({"a", "b"}, "ex1");
  CHECK(identity(0, 0) == 1.0);
  CHECK(identity(0, 1) == 0.0);
  CHECK(identity(1, 1) == 1.0);

  CHECK_THROWS_WITH_AS(provider->embed({"a"}, "ex3"),
                       doctest::Contains("ex3"), std::runtime_error);
  CHECK_THROWS_WITH_AS(provider->embed({"a"}, "ex1"),
                       doctest::Contains("2 rows, expected 1"), std::runtime_error);
}

TEST_CASE("precomputed load errors") {
  testing::TempDir dir;
  CHECK_THROWS_WITH_AS(
      load_precomputed(dir.write("dup.txt", "ex1 1 2\n1 2\nex1 1 2\n3 4\n")),
      doctest::Contains("duplicate example id"), std::runtime_error);
  CHECK_THROWS_WITH_AS(
      load_precomputed(dir.write("dim.txt", "ex1 1 2\n1 2\nex2 1 3\n3 4 5\n")),
      doctest::Contains("dimension"), std::runtime_error);
  CHECK_THROWS(load_precomputed(dir.write("trunc.txt", "ex1 2 2\n1 2\n")));
}

TEST_CASE("hashed-random provider is deterministic and scaled") {
  const auto provider = make_hashed_random(16, 42);
  const EmbeddedSequence a = provider->embed({"alpha", "beta"}, "");
  const EmbeddedSequence b = provider->embed({"alpha", "beta"}, "");
  CHECK(a == b);  // bit-identical
  CHECK(a.rows == 2);
  CHECK(a.cols == 16);

  // Same token, same row regardless of position.
  const EmbeddedSequence c = provider->embed({"beta", "alpha"}, "");
  for (std::size_t i = 0; i < 16; ++i) {
    CHECK(a(0, i) == c(1, i));
    CHECK(a(1, i) == c(0, i));
  }

  const auto other_seed = make_hashed_random(16, 43);
  const EmbeddedSequence d = other_seed->embed({"alpha"}, "");
  bool any_unequal = false;
  for (std::size_t i = 0; i < 16; ++i) any_unequal |= d(0, i) != a(0, i);
  CHECK(any_unequal);

  const double bound = 0.5 / std::sqrt(16.0);
  for (double value : a.data) {
    CHECK(std::abs(value) <= bound);
  }
}

TEST_CASE("embed_examples runs the full pipeline") {
  const auto vocab = SubwordVocabulary::from_tokens({"nice", "day"});
  const auto provider = make_hashed_random(8, 1);
  const std::vector<Example> examples = {{"e1", "Nice day https://x.co", 0},
                                         {"e2", "unknownword", 1}};
  const auto embedded = embed_examples(*provider, vocab, 80, examples);
  REQUIRE(embedded.size() == 2);
  CHECK(embedded[0].input.rows == 3);  // nice day <url>
  CHECK(embedded[0].label == 0);
  CHECK(embedded[1].input.rows == 1);  // <unk>
  CHECK(embedded[1].id == "e2");
}
