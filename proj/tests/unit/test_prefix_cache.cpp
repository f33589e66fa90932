#include <doctest.h>

#include <random>

#include "cacheleak/prefix_cache.hpp"

using namespace cacheleak;

namespace {

std::size_t lcp(const TokenSeq& a, const TokenSeq& b) {
  std::size_t i = 0;
  while (i < a.size() && i < b.size() && a[i] == b[i]) ++i;
  return i;
}

// Linear scan over everything ever inserted, each truncated to whole blocks.
std::size_t brute_match(const std::vector<TokenSeq>& stored, const TokenSeq& q, std::size_t k) {
  std::size_t best = 0;
  for (const auto& s : stored) best = std::max(best, lcp(s, q) / k * k);
  return best;
}

}  // namespace

TEST_CASE("match rounds down to whole blocks") {
  for (std::size_t k : {1, 2, 3}) {
    PrefixCache c({k, 1000});
    c.insert(TokenSeq{1, 2, 3, 4, 5, 6});
    const TokenSeq q{1, 2, 3, 4, 9};
    CHECK(c.match_prefix(q).shared_len == 4 / k * k);
    CHECK(c.peek_prefix(q) == 4 / k * k);
  }
}

TEST_CASE("insert reports only newly resident tokens") {
  PrefixCache c({1, 1000});
  CHECK(c.insert(TokenSeq{1, 2, 3, 4}) == 4);
  CHECK(c.insert(TokenSeq{1, 2, 5}) == 1);
  CHECK(c.insert(TokenSeq{1, 2}) == 0);
  CHECK(c.resident_tokens() == 5);
  CHECK(c.stats().resident_tokens == 5);

  PrefixCache k2({2, 1000});
  CHECK(k2.insert(TokenSeq{1, 2, 3, 4, 5}) == 4);  // trailing partial block dropped
  CHECK(k2.peek_prefix(TokenSeq{1, 2, 3, 4, 5}) == 4);
}

TEST_CASE("peek leaves the clock alone, match ticks it") {
  PrefixCache c;
  c.insert(TokenSeq{1, 2});
  const auto t = c.clock();
  c.peek_prefix(TokenSeq{1, 2});
  CHECK(c.clock() == t);
  c.match_prefix(TokenSeq{1, 2});
  CHECK(c.clock() == t + 1);
}

TEST_CASE("least recently used leaf is evicted first") {
  PrefixCache c({1, 8});
  const TokenSeq a{1, 1, 1, 1}, b{2, 2, 2, 2}, d{3, 3, 3, 3};
  c.insert(a);
  c.insert(b);
  c.match_prefix(a);
  c.insert(d);
  CHECK(c.peek_prefix(a) == 4);
  CHECK(c.peek_prefix(b) == 0);
  CHECK(c.peek_prefix(d) == 4);
  CHECK(c.resident_tokens() <= 8);
  CHECK(c.evicted_tokens() == 4);
}

TEST_CASE("oversized sequences are refused") {
  PrefixCache c({1, 8});
  CHECK_THROWS_AS(c.insert(TokenSeq(9, 1)), SequenceExceedsCapacity);
}

TEST_CASE("flush empties the tree") {
  PrefixCache c;
  c.insert(TokenSeq{4, 5, 6});
  c.flush();
  CHECK(c.resident_tokens() == 0);
  CHECK(c.stats().node_count == 1);
  CHECK(c.peek_prefix(TokenSeq{4, 5, 6}) == 0);
}

TEST_CASE("random operations agree with a brute-force scan") {
  std::mt19937_64 rng(42);
  for (std::size_t k : {1, 2, 3, 4}) {
    PrefixCache c({k, 1u << 24});
    std::vector<TokenSeq> stored;
    std::uniform_int_distribution<int> len(1, 24), tok(0, 3), coin(0, 1);
    for (int op = 0; op < 3000; ++op) {
      TokenSeq s;
      if (!stored.empty() && coin(rng)) {
        s = stored[std::uniform_int_distribution<std::size_t>(0, stored.size() - 1)(rng)];
        s.resize(std::uniform_int_distribution<std::size_t>(0, s.size())(rng));
      }
      for (int n = len(rng); n > 0; --n) s.push_back(static_cast<TokenId>(tok(rng)));
      if (coin(rng)) {
        c.insert(s);
        stored.push_back(s);
      } else {
        REQUIRE(c.match_prefix(s).shared_len == brute_match(stored, s, k));
      }
    }
    CHECK(c.evicted_tokens() == 0);
    CHECK(c.stats().resident_tokens == c.resident_tokens());
  }
}
