#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "cacheleak/attribute_corpus.hpp"
#include "cacheleak/client.hpp"
#include "cacheleak/embedding.hpp"
#include "cacheleak/probe.hpp"

namespace cacheleak {

class TooFewCandidates : public std::invalid_argument {
 public:
  TooFewCandidates() : std::invalid_argument("representative ranking needs at least two candidates") {}
};

struct ProbeCandidate {
  std::string text;
  Embedding embedding;
  /// Mean L2 distance to the other candidates of the pool; lower is more
  /// representative.
  double representativeness = 0.0;
  /// Paraphrase family member the text came from, if any.
  std::size_t member = static_cast<std::size_t>(-1);
};

ProbeCandidate make_candidate(std::string text, const EmbeddingConfig& cfg, std::size_t member = -1);

/// Fills in representativeness and sorts ascending (ties by text).
/// Throws TooFewCandidates.
std::vector<ProbeCandidate> rank_representative(std::vector<ProbeCandidate> candidates);

struct GreedyConfig {
  double sigma_budget = 0.06;
  std::size_t max_probes = 5;
  double orthogonality_min_distance = 0.5;
  /// Throws std::invalid_argument unless sigma_budget is in (0,1).
  void validate() const;
};

/// Cumulative false-positive estimate for a probe set.
using FprEstimator = std::function<double(const std::vector<const ProbeCandidate*>& probes)>;

/// Union bound over a per-probe estimate.
FprEstimator additive_fpr(std::function<double(const ProbeCandidate&)> per_probe);

/// Fraction of held-out negatives that at least one probe would match
/// (cosine >= threshold).
FprEstimator empirical_union_fpr(std::vector<Embedding> held_out_negatives, double threshold);

/// Held-out negative drawn for its own target pair.
struct PairedNegative {
  std::string name;
  std::string condition;
  Embedding embedding;
};

/// Union FPR where each probe (a family member) is re-rendered with the
/// negative's target pair before comparing. Candidates without a family
/// member fall back to their fixed embedding.
FprEstimator paired_union_fpr(const ParaphraseFamily& family, const EmbeddingConfig& embedding,
                              std::vector<PairedNegative> held_out, double threshold);

/// Walks `ranked` in order, taking a candidate when it is at least
/// orthogonality_min_distance from every probe taken so far. Stops when the
/// candidates run out, max_probes is reached, or taking the next acceptable
/// candidate would push the estimated cumulative FPR over sigma_budget.
std::vector<ProbeCandidate> greedy_select(const std::vector<ProbeCandidate>& ranked, const GreedyConfig& cfg,
                                          const FprEstimator& fpr);

/// Clears victim state between requests.
class Evictor {
 public:
  virtual ~Evictor() = default;
  virtual void evict(ServingClient& client) = 0;
  virtual std::size_t requests_sent() const { return 0; }
};

/// Sends `count` unrelated filler requests.
class FloodEvictor : public Evictor {
 public:
  FloodEvictor(std::size_t count, std::uint64_t seed) : count_(count), rng_(seed) {}
  void evict(ServingClient& client) override;
  std::size_t requests_sent() const override { return sent_; }

 private:
  std::size_t count_;
  std::mt19937_64 rng_;
  std::size_t sent_ = 0;
};

/// Administrative flush; only available in-process.
class AdminFlushEvictor : public Evictor {
 public:
  AdminFlushEvictor(Engine& engine, FlushTarget target) : engine_(engine), target_(target) {}
  void evict(ServingClient&) override { engine_.admin_flush(target_); }

 private:
  Engine& engine_;
  FlushTarget target_;
};

struct PnaRunConfig {
  std::size_t rounds = 500;
  /// Probe TTFT below this reads as a semantic hit.
  Millis threshold{1320.0};
  /// Probes are lookups that do not add cache entries.
  bool read_only_probes = true;
  std::uint64_t seed = 1;
};

struct PnaRoundRecord {
  std::size_t round = 0;
  VictimType victim_type = VictimType::type1;
  std::size_t probe_count = 0;
  Decision decision = Decision::miss;
  bool truth = false;
};

struct PnaResult {
  std::size_t max_probes = 0;
  std::vector<PnaRoundRecord> records;
  /// [probe_count - 1][type - 1] -> (positives, trials)
  std::vector<std::array<std::pair<std::size_t, std::size_t>, 4>> counts;
  std::size_t discarded_rounds = 0;

  /// Hit rate for the given victim type with the first `probe_count` probes.
  double rate(VictimType type, std::size_t probe_count) const;
};

/// Per round: draw a target (name, condition), then for each request of the
/// victim mix evict, let the victim send it, and fire every probe (the
/// selected family members rendered with the target pair). The decision for
/// c probes is "any of the first c probes hit".
PnaResult run_rounds(ServingClient& attacker, ServingClient& victim, const ParaphraseFamily& family,
                     const std::vector<std::size_t>& probe_members, const PnaRunConfig& cfg, Evictor& evictor);

/// round,victim_type,probe_count,decision,truth
void write_pna_rounds_csv(std::ostream& out, const PnaResult& result);
/// probe_count,tpr_type1,fpr_type2,fpr_type3,fpr_type4
void write_pna_summary_csv(std::ostream& out, const PnaResult& result);

/// Probe selection used by the experiments: candidate pool = `pool_size`
/// random family members rendered with a reference pair, held-out negatives =
/// type 2/3/4 requests in the victim mix ratio, each for a random target pair.
struct ProbeSelection {
  std::vector<ProbeCandidate> ranked;
  std::vector<ProbeCandidate> selected;
  std::vector<std::size_t> members;
  std::vector<double> cumulative_fpr;  // estimate after each selected probe
};
ProbeSelection select_probes(const ParaphraseFamily& family, const EmbeddingConfig& embedding, double threshold,
                             const GreedyConfig& greedy, std::size_t pool_size, std::size_t held_out_size,
                             std::uint64_t seed);

}  // namespace cacheleak
