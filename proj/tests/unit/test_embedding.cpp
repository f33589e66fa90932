#include <doctest.h>

#include <cmath>
#include <map>
#include <stdexcept>

#include "cacheleak/embedding.hpp"

using namespace cacheleak;

namespace {

// Published FNV-1a 64 test vectors (zero seed leaves the basis unchanged),
// passed through the splitmix64 finaliser.
std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

TEST_CASE("feature hash is fnv-1a then splitmix") {
  CHECK(feature_hash("", 0) == splitmix(0xcbf29ce484222325ULL));
  CHECK(feature_hash("a", 0) == splitmix(0xaf63dc4c8601ec8cULL));
  CHECK(feature_hash("foobar", 0) == splitmix(0x85944171f73967e8ULL));
  CHECK(feature_hash("a", 1) != feature_hash("a", 0));
}

TEST_CASE("terms are lower-cased, trimmed and stopword-filtered") {
  CHECK(embedding_terms("The Flu, of Ada!", true) == std::vector<std::string>{"flu", "ada"});
  CHECK(embedding_terms("The Flu", false) == std::vector<std::string>{"the", "flu"});
  CHECK(embedding_terms("x@y.org", true) == std::vector<std::string>{"x@y.org"});
}

TEST_CASE("embedding matches a hand-built feature vector") {
  EmbeddingConfig cfg;
  cfg.dimension = 97;
  std::map<std::size_t, double> want;
  auto add = [&](const std::string& f, double w) {
    const auto h = feature_hash(f, cfg.hash_seed);
    want[h % 97] += (h >> 63 ? -1.0 : 1.0) * w;
  };
  add("u:red", 1.0);
  add("u:fox", 1.0);
  add("b:red fox", 0.3);
  double norm = 0;
  for (auto& [_, v] : want) norm += v * v;
  norm = std::sqrt(norm);
  const auto e = embed("the red fox", cfg);
  for (std::size_t j = 0; j < 97; ++j) {
    const double w = want.count(j) ? want[j] / norm : 0.0;
    CHECK(e.values[j] == doctest::Approx(w).epsilon(1e-12));
  }
}

TEST_CASE("embedding geometry") {
  const auto a = embed("schedule a meeting with Ada about asthma");
  const auto b = embed("Schedule a meeting, with ada about ASTHMA.");
  const auto c = embed("weather forecast for tomorrow");
  CHECK(dot(a, a) == doctest::Approx(1.0));
  CHECK(cosine(a, b) == doctest::Approx(1.0));
  CHECK(cosine(a, c) < 0.3);
  CHECK(l2_distance(a, b) == doctest::Approx(0.0));
  const auto z = embed("   ");
  CHECK(z.is_zero());
  CHECK(cosine(z, a) == 0.0);
  EmbeddingConfig bad;
  bad.dimension = 0;
  CHECK_THROWS_AS(embed("x", bad), std::invalid_argument);
}
