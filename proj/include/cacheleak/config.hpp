#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cacheleak/corpus.hpp"
#include "cacheleak/engine.hpp"
#include "cacheleak/probe.hpp"

namespace cacheleak {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PsaSettings {
  std::size_t victims = 100;
  std::size_t max_guesses = 80;
  double temperature = 0.6;
  std::size_t eviction_count = 15;
  std::size_t eviction_tokens = 200;
  bool cross_verify = true;
  std::size_t order = 3;
  double alpha = 0.01;
  std::string user_text = "hello";
  bool write_samples = false;
};

struct PnaSettings {
  std::size_t rounds = 500;
  std::size_t max_probes = 5;
  double sigma_budget = 0.06;
  double orthogonality_min_distance = 0.5;
  std::size_t flood_requests = 1000;
  std::string evictor = "flood";  // flood | admin
  bool read_only_probes = true;
  std::size_t pool_size = 200;
  std::size_t held_out = 2000;
};

struct DocSettings {
  std::size_t interested = 200;
  std::size_t victim_from_interested = 100;
  std::size_t victim_outside = 100;
  std::size_t repetitions = 5;
  std::vector<std::size_t> lengths = {12000, 18000, 24000};
  Millis threshold{2000.0};
  std::size_t capacity_tokens = 8'000'000;
};

struct KSweepSettings {
  std::vector<std::size_t> k_values = {1, 2, 3, 4};
  bool simulate = true;
  std::size_t victims = 100;
  bool budget_per_token = true;
};

struct AnonymizeSettings {
  /// PNA rounds per arm (off/on). Type-1 and type-3 requests look alike once
  /// names are masked, so the TPR - FPR gap is pure sampling noise; more
  /// rounds than the plain PNA run keep it well inside the bound.
  std::size_t rounds = 2000;
  std::string evictor = "admin";  // flood | admin
  std::size_t roundtrip_sentences = 1000;
  std::size_t sharing_trials = 200;
};

struct RocSettings {
  std::size_t samples = 4000;
  std::size_t vote_trials = 4000;
  std::string input;  // labelled sample CSV for `cacheleak roc`
};

struct ExperimentConfig {
  std::string scenario = "psa";
  std::uint64_t seed = 1;
  std::string output_dir = "out";

  LatencyParams latency;
  /// Replace latency.noise_sigma by the value that puts the single-trial
  /// classifier at (target_tpr, target_fpr).
  bool calibrate_noise = true;
  double target_tpr = 0.88;
  double target_fpr = 0.10;

  bool kv_enabled = true;
  PrefixCacheConfig kv;
  bool semantic_enabled = false;
  SemanticCacheConfig semantic;
  bool anonymize = false;

  CorpusConfig corpus;
  VoteConfig vote;
  /// Replace vote.theta by an offline Youden calibration.
  bool calibrate_theta = true;
  /// "target_fpr" pins the empirical FPR at target_fpr; "youden" maximises
  /// TPR - FPR.
  std::string theta_rule = "target_fpr";
  std::size_t calibration_samples = 2000;

  PsaSettings psa;
  PnaSettings pna;
  DocSettings doc;
  KSweepSettings ksweep;
  AnonymizeSettings anonymize_suite;
  RocSettings roc;

  /// Throws ConfigError.
  void validate() const;
};

const std::vector<std::string>& scenario_names();

/// One settable key. Keys are dotted paths ("latency.t_miss_ms").
struct ConfigField {
  std::string key;
  std::string type;  // for help text
  std::function<void(const std::string&)> set;
  std::function<std::string()> get;
};

/// Every key the TOML file and the command line accept, bound to `cfg`.
std::vector<ConfigField> config_fields(ExperimentConfig& cfg);

/// Parses a TOML file on top of the defaults. Unknown keys and type
/// mismatches throw ConfigError.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& toml_text);

/// key=value override using the same field table.
void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Deterministic sub-seed for a named component.
std::uint64_t derive_seed(std::uint64_t global, std::string_view label);

/// Engine configuration the scenario would start.
EngineConfig engine_config(const ExperimentConfig& cfg);

}  // namespace cacheleak
