#include <doctest.h>

#include "cacheleak/tokenizer.hpp"

using namespace cacheleak;

TEST_CASE("vocab assigns dense ids in insertion order") {
  Vocab v({"alpha", "beta"});
  CHECK(v.size() == 2);
  CHECK(*v.find("beta") == 1);
  CHECK(v.intern("gamma") == 2);
  CHECK(v.intern("alpha") == 0);
  CHECK_FALSE(v.contains("delta"));
  CHECK_THROWS_AS(Vocab({"x", "x"}), std::invalid_argument);
  CHECK_THROWS_AS(Vocab({""}), std::invalid_argument);
}

TEST_CASE("split_words drops empty words on any ascii whitespace") {
  auto w = split_words("  one\ttwo\n\nthree  ");
  REQUIRE(w.size() == 3);
  CHECK(w[0] == "one");
  CHECK(w[2] == "three");
  CHECK(split_words("   ").empty());
}

TEST_CASE("encode and decode round trip") {
  Vocab v;
  const auto ids = encode_interning("the cat sat on the mat", v);
  CHECK(ids == TokenSeq{0, 1, 2, 3, 0, 4});
  CHECK(decode(ids, v) == "the cat sat on the mat");
  CHECK(encode("mat  the", v) == TokenSeq{4, 0});
}

TEST_CASE("unknown words and ids are reported") {
  Vocab v({"a"});
  try {
    encode("a b", v);
    FAIL("expected UnknownToken");
  } catch (const UnknownToken& e) {
    CHECK(e.word() == "b");
  }
  const TokenSeq bad{7};
  CHECK_THROWS_AS(decode(bad, v), std::out_of_range);
}
