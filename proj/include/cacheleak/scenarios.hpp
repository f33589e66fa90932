#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cacheleak/config.hpp"
#include "cacheleak/pna.hpp"
#include "cacheleak/roc.hpp"

namespace cacheleak {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ScenarioReport {
  std::string scenario;
  std::map<std::string, double> metrics;
  std::vector<CheckResult> checks;
  std::vector<std::string> files;  // written, relative to the output dir
  bool all_pass() const;
};

/// Runs the configured scenario and writes its reports into
/// cfg.output_dir. Throws ConfigError on an invalid configuration.
ScenarioReport run_scenario(const ExperimentConfig& cfg);

/// Offline threshold calibration: on a private engine with the same latency
/// model, time `samples` one-token hits and misses against a rare-token
/// reference. With `target_fpr` the threshold pins the empirical FPR,
/// otherwise it is the Youden threshold.
Millis calibrate_theta(const EngineConfig& engine, std::size_t samples, std::uint64_t seed,
                       std::optional<double> target_fpr = std::nullopt);

struct DeltaSamples {
  std::vector<double> hit;
  std::vector<double> miss;
};
/// `trials` hit and `trials` miss votes, each sample preceded by a flush and
/// a re-cache of the target prompt.
RatePoint vote_trials(const EngineConfig& engine, const VoteConfig& vote, std::size_t trials, std::uint64_t seed);

/// The raw deltas behind calibrate_theta.
DeltaSamples collect_deltas(const EngineConfig& engine, std::size_t samples, std::uint64_t seed);

/// Semantic leakage check on the attribute corpus: similarity of evaluation
/// paraphrases (matching attributes) and of canonical-phrasing negatives to
/// the positive reference set. `one_attribute` selects negatives that keep
/// exactly one attribute.
struct SemanticRoc {
  std::vector<LabeledScore> samples;
  RocCurve curve;
  double tpr_at_threshold = 0.0;
  double fpr_at_threshold = 0.0;
};
SemanticRoc semantic_leakage_roc(const SemanticCacheConfig& cache, bool one_attribute, std::uint64_t seed);

}  // namespace cacheleak
