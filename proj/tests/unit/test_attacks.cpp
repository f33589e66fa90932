#include <doctest.h>

#include "cacheleak/documents.hpp"
#include "cacheleak/ksweep.hpp"
#include "cacheleak/psa.hpp"

using namespace cacheleak;

namespace {

EngineConfig quiet() {
  EngineConfig c;
  c.latency.noise_sigma = Millis{0.0};
  return c;
}

}  // namespace

TEST_CASE("k-sweep vote sizes") {
  const Millis t{-0.2};
  CHECK(ksweep_vote(1, t).n == 10);
  CHECK(ksweep_vote(1, t).k == 5);
  CHECK(ksweep_vote(2, t).n == 8);
  CHECK(ksweep_vote(3, t).k == 3);
  CHECK(ksweep_vote(4, t).n == 4);
  CHECK(ksweep_vote(6, t).n == 2);
  CHECK(ksweep_vote(6, t).k == 1);
}

TEST_CASE("filler batch pushes a victim prefix out of the default cache") {
  Engine e(quiet());
  InProcessClient c(e, 1);
  const std::string victim = "you are a helpful assistant for the billing team";
  c.send(ChatRequest::direct(victim));
  REQUIRE(e.peek_shared_prefix(victim) > 0);
  std::mt19937_64 rng(3);
  CHECK(evict_kv(c, {}, rng) == 15);
  CHECK(e.peek_shared_prefix(victim) == 0);
  c.send(ChatRequest::direct(victim));
  CHECK_NOTHROW(evict_kv_verified(c, {}, rng, victim, Millis{-1.0}));
}

TEST_CASE("noise-free attack recovers a short prompt exactly") {
  CorpusConfig cc;
  cc.num_prompts = 80;
  const auto corpus = build_corpus(cc, 4);
  std::vector<TokenSeq> train;
  for (auto i : corpus.attacker) train.push_back(corpus.prompts[i]);
  const auto pred = train_predictor(train, corpus.vocab.size(), 3, 0.01);
  Engine e(quiet());
  InProcessClient client(e, 1);
  PsaConfig cfg;
  cfg.vote.theta = Millis{-0.2};
  cfg.max_guesses_per_position = 80;
  const auto target = make_psa_target(corpus, corpus.victim[0], PromptTemplate{}, "hello");
  const auto trace = recover_prompt(client, target, pred, corpus.vocab, cfg, 7);
  CHECK_FALSE(trace.aborted);
  CHECK(trace.false_accepts == 0);
  CHECK(trace.tokens_correct == trace.tokens_recovered);
  CHECK(trace.tokens_recovered > 0);
}

TEST_CASE("document repetition rates") {
  DocumentRepetition r{8, 1, 9, 2};
  CHECK(r.accuracy() == doctest::Approx(17.0 / 20.0));
  CHECK(r.tpr() == doctest::Approx(0.8));
  CHECK(r.fpr() == doctest::Approx(0.1));
}

TEST_CASE("noise-free document protocol is exact") {
  auto ec = quiet();
  ec.kv.capacity_tokens = 4'000'000;
  Engine e(ec);
  InProcessClient attacker(e, 1), victim(e, 2);
  DocumentProtocolConfig cfg;
  cfg.interested = 20;
  cfg.victim_from_interested = 10;
  cfg.victim_outside = 5;
  cfg.repetitions = 2;
  cfg.lengths = {500, 800};
  cfg.threshold = Millis{50.0};
  const auto r = run_document_protocol(attacker, victim, cfg, [&] { e.admin_flush(FlushTarget::both); });
  REQUIRE(r.repetitions.size() == 2);
  CHECK(r.mean_accuracy() == 1.0);
  CHECK(r.mean_fpr() == 0.0);
  CHECK(r.probes.size() == 40);
}
