#include <doctest.h>

#include <set>

#include "cacheleak/anonymizer.hpp"
#include "cacheleak/attribute_corpus.hpp"

using namespace cacheleak;

TEST_CASE("each pii kind is detected with exact offsets") {
  Anonymizer a({"Ada Lovelace", "Ada"});
  const std::string s = "Ada Lovelace mailed ada@x.io from 10.0.0.12, call 555-123-4567, card 4111 1111 1111 1111";
  const auto spans = a.detect_pii(s);
  REQUIRE(spans.size() == 5);
  CHECK(spans[0].kind == PiiKind::name);
  CHECK(spans[0].surface == "Ada Lovelace");  // longest gazetteer entry wins
  CHECK(spans[1].kind == PiiKind::email);
  CHECK(spans[2].kind == PiiKind::ip_address);
  CHECK(spans[3].kind == PiiKind::phone);
  CHECK(spans[4].kind == PiiKind::credit_card);
  for (const auto& sp : spans) CHECK(s.substr(sp.start, sp.end - sp.start) == sp.surface);
}

TEST_CASE("names match whole words only") {
  Anonymizer a({"Al"});
  CHECK(a.detect_pii("Alice met Al").size() == 1);
}

TEST_CASE("repeated surfaces share one identifier") {
  Anonymizer a({"Bob"});
  const auto r = a.anonymize("Bob said Bob would call Bob.");
  const auto id = Anonymizer::make_identifier(PiiKind::name, 1);
  CHECK(r.text == id + " said " + id + " would call " + id + ".");
  CHECK(r.map.size() == 1);
  CHECK(r.map.at(id) == "Bob");
}

TEST_CASE("round trip over generated pii sentences") {
  Anonymizer a(person_names());
  for (const auto& s : pii_sentences(300, 21)) {
    const auto r = a.anonymize(s);
    std::set<std::string> surfaces;
    for (const auto& [id, surface] : r.map) surfaces.insert(surface);
    CHECK(surfaces.size() == r.map.size());  // injective
    for (const auto& surface : surfaces) CHECK(r.text.find(surface) == std::string::npos);
    const auto back = Anonymizer::restore(r.text, r.map);
    CHECK(back.text == s);
    CHECK(back.unknown_identifiers.empty());
  }
}

TEST_CASE("restore leaves unknown identifiers in place") {
  const auto id = Anonymizer::make_identifier(PiiKind::email, 9);
  const auto r = Anonymizer::restore("write to " + id, {});
  CHECK(r.text == "write to " + id);
  CHECK(r.unknown_identifiers == std::vector<std::string>{id});
}
