#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cacheleak/client.hpp"
#include "cacheleak/corpus.hpp"
#include "cacheleak/predictor.hpp"
#include "cacheleak/probe.hpp"

namespace cacheleak {

class EvictionIncomplete : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EvictionBatch {
  std::size_t count = 15;
  std::size_t tokens_each = 200;
};

/// Sends `batch.count` direct requests of `batch.tokens_each` random filler
/// words. Returns the number of requests sent.
std::size_t evict_kv(ServingClient& client, const EvictionBatch& batch, std::mt19937_64& rng);

/// evict_kv followed by a timed check that `probe_text` no longer reads as a
/// cached prefix. Throws EvictionIncomplete when it still does.
void evict_kv_verified(ServingClient& client, const EvictionBatch& batch, std::mt19937_64& rng,
                       const std::string& probe_text, Millis theta);

enum class ExhaustedPolicy {
  stop,    // end the attack at the first position that runs out of guesses
  reveal,  // take the true block and move on (simulation bookkeeping)
};

/// Single-trial classifier rates used instead of timing.
struct SimulatedClassifier {
  double tpr = 0.88;
  double fpr = 0.10;
};

struct PsaConfig {
  std::size_t max_guesses_per_position = 80;
  /// Give a block of m secret tokens m times the per-position budget.
  bool budget_per_token = false;
  VoteConfig vote;
  double temperature = 0.6;
  EvictionBatch eviction;
  bool cross_verify = true;
  /// Sharing granularity the attacker aligns its guesses to.
  std::size_t granularity = 1;
  ExhaustedPolicy on_exhausted = ExhaustedPolicy::stop;
  /// Accepted for parity with the wall-clock client; commits are synchronous.
  Millis trigger_delay{200.0};
  std::optional<SimulatedClassifier> simulate;
  /// Per-token miss/hit gap the attacker calibrated offline; used by the
  /// cross-verification check.
  Millis calibrated_gap{0.45};
};

/// What the attacker knows about the victim plus the ground truth used for
/// scoring.
struct PsaTarget {
  /// Request that makes the application re-send the secret system prompt.
  ChatRequest trigger;
  /// Rendered text before the secret (the role template's system prefix).
  std::string known_prefix;
  /// Rendered words after the secret (separator, user prefix, the trigger's
  /// user text). Used to complete a final partial block.
  std::vector<std::string> known_suffix;
  /// Secret tokens in the predictor's vocabulary.
  TokenSeq secret;
};

struct PositionRecord {
  std::size_t position = 0;  // offset into the secret
  std::size_t block_tokens = 0;
  std::vector<TokenSeq> guesses;
  std::size_t queries = 0;  // timed probes, cross-verification included
  std::size_t triggers = 0;
  std::size_t eviction_requests = 0;
  std::optional<TokenSeq> recovered;
  bool revealed = false;
  bool correct = false;
};

struct AttackTrace {
  std::vector<PositionRecord> positions;
  std::size_t tokens_attempted = 0;
  std::size_t tokens_recovered = 0;  // committed by the attack, reveals excluded
  std::size_t tokens_correct = 0;
  std::size_t false_accepts = 0;  // committed blocks that were wrong
  std::size_t total_queries = 0;
  std::size_t recovered_position_queries = 0;
  std::size_t trigger_queries = 0;
  std::size_t eviction_queries = 0;
  std::size_t total_guesses = 0;
  bool aborted = false;
  std::string abort_reason;

  double accuracy() const;
  double queries_per_recovered_token() const;  // queries on committed blocks
  double queries_per_token() const;            // all queries
};

/// Token-by-token recovery of `target.secret`. Every guess is a direct-mode
/// probe (known prefix + recovered + candidate) voted against a rare-token
/// miss reference; before each timed sample the KV cache is flushed with
/// fillers and the victim trigger is replayed. Transport errors end the attack
/// with `aborted` set.
AttackTrace recover_prompt(ServingClient& client, const PsaTarget& target, const NGramPredictor& predictor,
                           const Vocab& vocab, const PsaConfig& cfg, std::uint64_t seed,
                           SampleCsv* samples = nullptr);

/// Target for corpus prompt `prompt_index` used as the application's system
/// prompt, triggered with `user_text`.
PsaTarget make_psa_target(const PromptCorpus& corpus, std::size_t prompt_index, const PromptTemplate& tmpl,
                          const std::string& user_text);

/// One JSON object per position.
void write_trace_jsonl(std::ostream& out, std::size_t prompt_id, const AttackTrace& trace, const Vocab& vocab);

/// prompt_id,tokens_recovered,accuracy,queries_total,queries_per_recovered_token
void write_psa_summary_header(std::ostream& out);
void write_psa_summary_row(std::ostream& out, std::size_t prompt_id, const AttackTrace& trace);

}  // namespace cacheleak
