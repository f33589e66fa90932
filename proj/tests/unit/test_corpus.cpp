#include <doctest.h>

#include <algorithm>
#include <set>

#include "cacheleak/attribute_corpus.hpp"
#include "cacheleak/corpus.hpp"

using namespace cacheleak;

TEST_CASE("corpus is a pure function of config and seed") {
  CorpusConfig cfg;
  cfg.num_prompts = 60;
  const auto a = build_corpus(cfg, 7);
  const auto b = build_corpus(cfg, 7);
  const auto c = build_corpus(cfg, 8);
  CHECK(a.prompts == b.prompts);
  CHECK(a.victim == b.victim);
  CHECK(a.prompts != c.prompts);
}

TEST_CASE("corpus splits are disjoint and lengths stay in bounds") {
  CorpusConfig cfg;
  cfg.num_prompts = 100;
  cfg.victim_fraction = 0.25;
  const auto c = build_corpus(cfg, 3);
  CHECK(c.prompts.size() == 100);
  CHECK(c.victim.size() == 25);
  CHECK(c.victim.size() + c.attacker.size() == 100);
  std::set<std::size_t> v(c.victim.begin(), c.victim.end());
  for (auto i : c.attacker) CHECK(v.count(i) == 0);
  for (const auto& p : c.prompts) {
    CHECK(p.size() >= cfg.min_length);
    CHECK(p.size() <= cfg.max_length);
  }
  const double tv = split_unigram_tv_distance(c);
  CHECK(tv >= 0.0);
  CHECK(tv <= 1.0);
}

TEST_CASE("corpus json round trip") {
  CorpusConfig cfg;
  cfg.num_prompts = 20;
  const auto c = build_corpus(cfg, 11);
  const auto back = corpus_from_json(to_json(c));
  CHECK(back.prompts == c.prompts);
  CHECK(back.vocab.tokens() == c.vocab.tokens());
  CHECK(back.attacker == c.attacker);
}

TEST_CASE("invalid corpus configs are rejected") {
  CorpusConfig cfg;
  cfg.min_length = 50;
  cfg.max_length = 10;
  CHECK_THROWS_AS(build_corpus(cfg, 1), InvalidConfig);
  cfg = {};
  cfg.chain_order = 0;
  CHECK_THROWS_AS(build_corpus(cfg, 1), InvalidConfig);
}

TEST_CASE("filler lexicon never overlaps the prompt corpus") {
  CorpusConfig cfg;
  cfg.num_prompts = 200;
  const auto c = build_corpus(cfg, 5);
  const auto& lex = filler_lexicon();
  CHECK(lex.size() == 4096);
  CHECK(std::set<std::string>(lex.begin(), lex.end()).size() == lex.size());
  for (const auto& w : lex) CHECK_FALSE(c.vocab.contains(w));
}

TEST_CASE("slot templates") {
  SlotTemplate t("Meet [name] about [condition].");
  CHECK(t.slots() == std::vector<std::string>{"name", "condition"});
  CHECK(instantiate(t, {{"name", "Ada"}, {"condition", "flu"}}) == "Meet Ada about flu.");
  CHECK_THROWS_AS(instantiate(t, {{"name", "Ada"}}), MissingSlot);
  CHECK_THROWS_AS(SlotTemplate("[a] [a]"), std::invalid_argument);
  CHECK_THROWS_AS(SlotTemplate("[open"), std::invalid_argument);
}

TEST_CASE("victim mix follows the type pattern") {
  ParaphraseFamily fam;
  std::mt19937_64 rng(2);
  const auto& names = person_names();
  const auto& conds = medical_conditions();
  const auto mix = make_victim_mix(fam, names[0], conds[0], rng);
  REQUIRE(mix.size() == 5);
  CHECK(mix[0].type == VictimType::type1);
  CHECK(mix[0].name == names[0]);
  CHECK(mix[0].condition == conds[0]);
  CHECK(mix[1].name == names[0]);
  CHECK(mix[1].condition != conds[0]);
  CHECK(mix[2].name != names[0]);
  CHECK(mix[2].condition == conds[0]);
  CHECK(mix[3].type == VictimType::type4);
  CHECK(mix[4].type == VictimType::type4);
  CHECK(mix[0].text.find(names[0]) != std::string::npos);
}

TEST_CASE("filtered family keeps the canonical member first") {
  ParaphraseFamily fam;
  const auto f = fam.filtered(EmbeddingConfig{}, 0.8);
  REQUIRE(f.size() >= 1);
  CHECK(f.size() <= fam.size());
  CHECK(f.canonical().text() == fam.canonical().text());
}
