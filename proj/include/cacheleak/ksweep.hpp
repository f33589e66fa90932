#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <vector>

#include "cacheleak/corpus.hpp"
#include "cacheleak/engine.hpp"
#include "cacheleak/predictor.hpp"
#include "cacheleak/psa.hpp"

namespace cacheleak {

struct KSweepConfig {
  std::vector<std::size_t> k_values = {1, 2, 3, 4};
  /// Draw vote samples from per-K rates instead of timing a live engine.
  bool simulate_classifier = true;
  /// Single-trial operating point at K = 1; other K scale both distances to
  /// the threshold by K (the hit/miss gap grows with the block).
  SimulatedClassifier base_rates;
  /// Explicit per-K rates; overrides the scaled base rates.
  std::map<std::size_t, SimulatedClassifier> rates;
  /// Attack settings shared by every K; vote n/k, granularity and policy are
  /// set per row.
  PsaConfig psa;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument on an empty or non-positive k list.
  void validate() const;
};

/// Samples per decision at granularity K: max(2, 10 - 2(K - 1)), majority
/// threshold ceil(n/2).
VoteConfig ksweep_vote(std::size_t k_gran, Millis theta);

/// Rates used for granularity K.
SimulatedClassifier ksweep_rates(const KSweepConfig& cfg, std::size_t k_gran);

struct KSweepRow {
  std::size_t k = 1;
  int vote_n = 0;
  int vote_k = 0;
  double recovery_rate = 0.0;
  double accuracy = 0.0;
  double queries_per_recovered_token = 0.0;
  double queries_per_token = 0.0;
  std::size_t tokens_attempted = 0;
  std::size_t tokens_recovered = 0;
  std::size_t total_queries = 0;
};

struct KSweepInputs {
  const PromptCorpus& corpus;
  const NGramPredictor& predictor;
  std::vector<std::size_t> victims;  // corpus prompt indices
  /// Live mode only.
  EngineConfig engine;
  std::string user_text = "hello";
};

/// One row per K. Each victim prompt is attacked with guesses aligned to
/// K-token blocks; exhausted blocks are revealed so every K attempts the same
/// tokens. Live mode runs a fresh engine with prefix granularity K per row.
std::vector<KSweepRow> run_ksweep(const KSweepConfig& cfg, const KSweepInputs& inputs);

/// k,vote_n,vote_k,recovery_rate,accuracy,queries_per_recovered_token,queries_per_token
void write_ksweep_csv(std::ostream& out, const std::vector<KSweepRow>& rows);

}  // namespace cacheleak
