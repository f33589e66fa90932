#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "cacheleak/client.hpp"

namespace cacheleak {

struct TimingSample {
  Millis ttft_target{0.0};
  Millis ttft_miss_ref{0.0};
  Millis delta{0.0};  // target - miss_ref
};

enum class Decision { miss, hit };
std::string_view decision_label(Decision d);

struct VoteConfig {
  int n = 10;
  int k = 5;
  Millis theta{-0.225};
  /// Throws std::invalid_argument unless 1 <= k <= n.
  void validate() const;
};

/// Reserved token appended to build a miss reference. Never produced by the
/// corpus or the filler lexicon.
inline constexpr std::string_view kRareToken = "<|rare|>";

/// `text` followed by `count` rare tokens.
std::string miss_reference(std::string_view text, std::size_t count = 1);

/// Direct-mode request with max_tokens = 1; returns TTFT. Transport errors
/// propagate.
Millis measure_ttft(ServingClient& client, const std::string& prompt);
TimingSample measure_pair(ServingClient& client, const std::string& target, const std::string& miss_ref);

/// hit iff delta < theta.
Decision classify_single(const TimingSample& sample, Millis theta);

struct VoteResult {
  Decision decision = Decision::miss;
  int hits = 0;
  std::vector<TimingSample> samples;
  std::vector<Decision> sample_decisions;
  std::size_t queries = 0;  // probe requests only
};

/// Called before every sample with its index; restores the victim state
/// (eviction + trigger in the attack).
using BeforeSample = std::function<void(int sample_idx)>;

/// n timed samples, hit iff at least k classify as hit.
VoteResult vote(ServingClient& client, const std::string& target, const std::string& miss_ref,
                const VoteConfig& cfg, const BeforeSample& before_sample = {});

/// Voting rule on already-made single decisions.
Decision vote_decision(const std::vector<Decision>& decisions, int k);

struct RatePoint {
  double tpr = 0.0;
  double fpr = 0.0;
};

/// Rates of the rule `delta < theta` on labelled deltas.
RatePoint rates_at(const std::vector<double>& hit_deltas, const std::vector<double>& miss_deltas, double theta);

/// Threshold maximising TPR - FPR over the pooled sample values (midpoints
/// between consecutive distinct values). Throws std::invalid_argument on an
/// empty side.
double youden_threshold(std::vector<double> hit_deltas, std::vector<double> miss_deltas);

/// Threshold whose empirical FPR on `miss_deltas` is floor(target_fpr * N)/N
/// (midpoint between the neighbouring order statistics).
double fpr_threshold(std::vector<double> miss_deltas, double target_fpr);

/// Per-sample CSV rows:
/// position,guess_token,sample_idx,ttft_target_ms,ttft_ref_ms,delta_ms,decision
class SampleCsv {
 public:
  explicit SampleCsv(std::ostream& out);
  void write(std::size_t position, const std::string& guess, const VoteResult& vote);

 private:
  std::ostream& out_;
};

}  // namespace cacheleak
