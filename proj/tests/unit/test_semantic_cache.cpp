#include <doctest.h>

#include "cacheleak/semantic_cache.hpp"

using namespace cacheleak;

TEST_CASE("lookup honours the similarity threshold") {
  SemanticCache c({0.8, 10, {}});
  c.insert("book a table for two at the italian place", "ok");
  auto hit = c.lookup("book a table for two at the italian place tonight");
  REQUIRE(hit);
  CHECK(hit->response_text == "ok");
  CHECK(hit->similarity >= 0.8);
  CHECK_FALSE(c.lookup("what is the capital of peru"));
  const auto near = c.nearest(embed("what is the capital of peru"));
  REQUIRE(near);
  CHECK(near->similarity < 0.8);
}

TEST_CASE("ring evicts the oldest entry") {
  SemanticCache c({0.9, 2, {}});
  c.insert("alpha bravo charlie", "1");
  c.insert("delta echo foxtrot", "2");
  c.insert("golf hotel india", "3");
  CHECK(c.size() == 2);
  CHECK_FALSE(c.lookup("alpha bravo charlie"));
  CHECK(c.lookup("delta echo foxtrot"));
  const auto e = c.entries();
  REQUIRE(e.size() == 2);
  CHECK(e[0].request_text == "delta echo foxtrot");
  CHECK(e[1].request_text == "golf hotel india");
}

TEST_CASE("equal similarity resolves to the earliest slot") {
  SemanticCache c({0.5, 4, {}});
  c.insert("same words here", "first");
  c.insert("same words here", "second");
  auto hit = c.lookup("same words here");
  REQUIRE(hit);
  CHECK(hit->response_text == "first");
}

TEST_CASE("lookups do not refresh and flush clears") {
  SemanticCache c({0.9, 2, {}});
  c.insert("alpha bravo charlie", "1");
  c.insert("delta echo foxtrot", "2");
  c.lookup("alpha bravo charlie");
  c.insert("golf hotel india", "3");
  CHECK_FALSE(c.lookup("alpha bravo charlie"));
  c.flush();
  CHECK(c.size() == 0);
  CHECK_FALSE(c.nearest(embed("golf hotel india")));
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(SemanticCache({1.0, 1, {}}), std::invalid_argument);
  CHECK_THROWS_AS(SemanticCache({0.0, 1, {}}), std::invalid_argument);
  CHECK_THROWS_AS(SemanticCache({0.5, 0, {}}), std::invalid_argument);
}
