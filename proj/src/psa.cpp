#include "cacheleak/psa.hpp"

#include <ostream>

#include "cacheleak/corpus.hpp"
#include "cacheleak/csv.hpp"

namespace cacheleak {

namespace {

std::string join_words(std::string base, std::span<const TokenId> ids, const Vocab& vocab) {
  for (TokenId id : ids) {
    if (!base.empty()) base += ' ';
    base += vocab.token(id);
  }
  return base;
}

std::string append_words(std::string base, std::span<const std::string> words) {
  for (const auto& w : words) {
    if (!base.empty()) base += ' ';
    base += w;
  }
  return base;
}

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

struct Session {
  ServingClient& client;
  const PsaTarget& target;
  const PsaConfig& cfg;
  std::mt19937_64 filler_rng;
  std::mt19937_64 sim_rng;

  // Restore victim state before a timed sample: flush with fillers, then let
  // the victim's request re-cache the secret.
  void before_sample(PositionRecord& rec) {
    if (cfg.eviction.count > 0) rec.eviction_requests += evict_kv(client, cfg.eviction, filler_rng);
    client.send(target.trigger);
    ++rec.triggers;
  }

  Decision simulated_vote(bool truly_cached, PositionRecord& rec) {
    std::bernoulli_distribution single(truly_cached ? cfg.simulate->tpr : cfg.simulate->fpr);
    int hits = 0;
    for (int i = 0; i < cfg.vote.n; ++i) {
      if (single(sim_rng)) ++hits;
      rec.queries += 2;
      rec.triggers += 1;
      rec.eviction_requests += cfg.eviction.count;
    }
    return hits >= cfg.vote.k ? Decision::hit : Decision::miss;
  }
};

}  // namespace

std::size_t evict_kv(ServingClient& client, const EvictionBatch& batch, std::mt19937_64& rng) {
  const auto& lex = filler_lexicon();
  std::uniform_int_distribution<std::size_t> pick(0, lex.size() - 1);
  for (std::size_t r = 0; r < batch.count; ++r) {
    std::string text;
    text.reserve(batch.tokens_each * 8);
    for (std::size_t i = 0; i < batch.tokens_each; ++i) {
      if (i) text += ' ';
      text += lex[pick(rng)];
    }
    client.send(ChatRequest::direct(std::move(text), 1));
  }
  return batch.count;
}

void evict_kv_verified(ServingClient& client, const EvictionBatch& batch, std::mt19937_64& rng,
                       const std::string& probe_text, Millis theta) {
  evict_kv(client, batch, rng);
  // Reference: fresh filler text of the same length, which misses throughout.
  const auto& lex = filler_lexicon();
  std::uniform_int_distribution<std::size_t> pick(0, lex.size() - 1);
  std::string fresh;
  for (std::size_t i = 0, n = split_words(probe_text).size(); i < n; ++i) {
    if (i) fresh += ' ';
    fresh += lex[pick(rng)];
  }
  if (classify_single(measure_pair(client, probe_text, fresh), theta) == Decision::hit)
    throw EvictionIncomplete("prefix still cached after eviction batch");
}

double AttackTrace::accuracy() const { return ratio(tokens_correct, tokens_recovered); }
double AttackTrace::queries_per_recovered_token() const {
  return ratio(recovered_position_queries, tokens_recovered);
}
double AttackTrace::queries_per_token() const { return ratio(total_queries, tokens_recovered); }

AttackTrace recover_prompt(ServingClient& client, const PsaTarget& target, const NGramPredictor& predictor,
                           const Vocab& vocab, const PsaConfig& cfg, std::uint64_t seed, SampleCsv* samples) {
  cfg.vote.validate();
  if (cfg.max_guesses_per_position == 0) throw std::invalid_argument("psa: max_guesses_per_position must be >= 1");
  if (cfg.granularity == 0) throw std::invalid_argument("psa: granularity must be >= 1");

  std::seed_seq seq{seed, seed >> 32, std::uint64_t{0x7073}};
  std::mt19937_64 guess_rng(seq);
  Session session{client, target, cfg, std::mt19937_64(seed ^ 0xf111e5ULL), std::mt19937_64(seed ^ 0x51a1ULL)};

  AttackTrace trace;
  PenaltyState penalty;
  TokenSeq recovered;
  bool prefix_correct = true;
  const std::size_t template_len = split_words(target.known_prefix).size();
  const auto& secret = target.secret;

  std::size_t pos = 0;
  try {
    while (pos < secret.size()) {
      const std::size_t known_len = template_len + pos;
      const std::size_t m = cfg.granularity - known_len % cfg.granularity;
      const std::size_t m_secret = std::min(m, secret.size() - pos);
      const std::size_t fill = m - m_secret;
      if (fill > target.known_suffix.size()) break;
      const std::span<const std::string> suffix(target.known_suffix.data(), fill);
      const std::span<const TokenId> truth(secret.data() + pos, m_secret);

      const std::string prefix_text = join_words(target.known_prefix, recovered, vocab);
      const std::string ref_text = miss_reference(prefix_text, m);

      PositionRecord rec;
      rec.position = pos;
      rec.block_tokens = m_secret;
      trace.tokens_attempted += m_secret;

      const std::size_t budget = cfg.max_guesses_per_position * (cfg.budget_per_token ? m_secret : 1);
      for (std::size_t g = 0; g < budget; ++g) {
        const TokenSeq cand = predict_next_k(predictor, recovered, m_secret, cfg.temperature, penalty, pos, guess_rng);
        rec.guesses.push_back(cand);
        const bool truly_cached = prefix_correct && std::equal(cand.begin(), cand.end(), truth.begin());

        bool accept = false;
        if (cfg.simulate) {
          accept = session.simulated_vote(truly_cached, rec) == Decision::hit;
          if (accept && cfg.cross_verify) accept = session.simulated_vote(truly_cached, rec) == Decision::hit;
        } else {
          const std::string target_text = append_words(join_words(prefix_text, cand, vocab), suffix);
          auto hook = [&](int) { session.before_sample(rec); };
          // Hit and miss differ by m tokens, so the per-token threshold scales.
          VoteConfig vc = cfg.vote;
          vc.theta = cfg.vote.theta * static_cast<double>(m);
          const auto v = vote(client, target_text, ref_text, vc, hook);
          rec.queries += v.queries;
          if (samples) samples->write(pos, join_words({}, cand, vocab), v);
          accept = v.decision == Decision::hit;
          if (accept && cfg.cross_verify) {
            // The candidate must add m cheap tokens on top of the bare prefix:
            // d = ttft(prefix + cand) - ttft(prefix) stays under m * gap / 2.
            VoteConfig cv = cfg.vote;
            cv.theta = cfg.calibrated_gap * (static_cast<double>(m) / 2.0);
            const auto c = vote(client, target_text, prefix_text, cv, hook);
            rec.queries += c.queries;
            accept = c.decision == Decision::hit;
          }
        }
        if (accept) {
          rec.recovered = cand;
          rec.correct = truly_cached;
          break;
        }
        penalty.reject(pos, cand);
      }

      trace.total_guesses += rec.guesses.size();
      trace.total_queries += rec.queries;
      trace.trigger_queries += rec.triggers;
      trace.eviction_queries += rec.eviction_requests;

      if (rec.recovered) {
        trace.tokens_recovered += m_secret;
        trace.recovered_position_queries += rec.queries;
        if (rec.correct) {
          trace.tokens_correct += m_secret;
        } else {
          ++trace.false_accepts;
          prefix_correct = false;
        }
        recovered.insert(recovered.end(), rec.recovered->begin(), rec.recovered->end());
      } else if (cfg.on_exhausted == ExhaustedPolicy::reveal) {
        rec.revealed = true;
        recovered.insert(recovered.end(), truth.begin(), truth.end());
      } else {
        trace.positions.push_back(std::move(rec));
        break;
      }
      trace.positions.push_back(std::move(rec));
      pos += m_secret;
    }
  } catch (const TransportError& e) {
    trace.aborted = true;
    trace.abort_reason = e.what();
  }
  return trace;
}

PsaTarget make_psa_target(const PromptCorpus& corpus, std::size_t prompt_index, const PromptTemplate& tmpl,
                          const std::string& user_text) {
  PsaTarget t;
  const std::string secret_text = corpus.text(prompt_index);
  t.trigger = ChatRequest::synthesized(secret_text, user_text, 1);
  for (auto w : split_words(tmpl.system_prefix)) {
    if (!t.known_prefix.empty()) t.known_prefix += ' ';
    t.known_prefix += w;
  }
  const std::string rendered = synthesize_prompt(tmpl, secret_text, user_text);
  const auto words = split_words(rendered);
  const std::size_t skip = split_words(tmpl.system_prefix).size() + corpus.prompts.at(prompt_index).size();
  for (std::size_t i = skip; i < words.size(); ++i) t.known_suffix.emplace_back(words[i]);
  t.secret = corpus.prompts.at(prompt_index);
  return t;
}

void write_trace_jsonl(std::ostream& out, std::size_t prompt_id, const AttackTrace& trace, const Vocab& vocab) {
  for (const auto& rec : trace.positions) {
    nlohmann::json guesses = nlohmann::json::array();
    for (const auto& g : rec.guesses) guesses.push_back(join_words({}, g, vocab));
    nlohmann::json j = {{"prompt_id", prompt_id},
                        {"position", rec.position},
                        {"block_tokens", rec.block_tokens},
                        {"guesses", std::move(guesses)},
                        {"queries", rec.queries},
                        {"triggers", rec.triggers},
                        {"eviction_requests", rec.eviction_requests},
                        {"recovered", rec.recovered ? nlohmann::json(join_words({}, *rec.recovered, vocab))
                                                    : nlohmann::json(nullptr)},
                        {"revealed", rec.revealed},
                        {"correct", rec.correct}};
    out << j.dump() << '\n';
  }
}

void write_psa_summary_header(std::ostream& out) {
  out << "prompt_id,tokens_recovered,accuracy,queries_total,queries_per_recovered_token\n";
}

void write_psa_summary_row(std::ostream& out, std::size_t prompt_id, const AttackTrace& trace) {
  out << prompt_id << ',' << trace.tokens_recovered << ',' << fmt_num(trace.accuracy()) << ','
      << trace.total_queries << ',' << fmt_num(trace.queries_per_recovered_token()) << '\n';
}

}  // namespace cacheleak
