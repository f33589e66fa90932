#include "cacheleak/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "cacheleak/attribute_corpus.hpp"

namespace cacheleak {

namespace {

// Shortest text that parses back to the same double.
std::string num_str(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

template <typename T>
T parse_number(const std::string& key, const std::string& s) {
  T v{};
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) throw ConfigError("bad value for " + key + ": '" + s + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError("bad boolean for " + key + ": '" + s + "'");
}

std::vector<std::size_t> parse_list(const std::string& key, const std::string& s) {
  std::vector<std::size_t> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" []");
    const auto e = item.find_last_not_of(" []");
    if (b == std::string::npos) continue;
    out.push_back(parse_number<std::size_t>(key, item.substr(b, e - b + 1)));
  }
  return out;
}

std::string list_str(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

struct Binder {
  std::vector<ConfigField>& out;

  void operator()(std::string key, double& ref) {
    out.push_back({key, "real", [&ref, key](const std::string& s) { ref = parse_number<double>(key, s); },
                   [&ref] { return num_str(ref); }});
  }
  void operator()(std::string key, Millis& ref) {
    out.push_back({key, "ms", [&ref, key](const std::string& s) { ref = Millis(parse_number<double>(key, s)); },
                   [&ref] { return num_str(ref.count()); }});
  }
  void operator()(std::string key, std::size_t& ref) {
    out.push_back({key, "count", [&ref, key](const std::string& s) { ref = parse_number<std::size_t>(key, s); },
                   [&ref] { return std::to_string(ref); }});
  }
  void operator()(std::string key, std::uint64_t& ref, int) {
    out.push_back({key, "u64", [&ref, key](const std::string& s) { ref = parse_number<std::uint64_t>(key, s); },
                   [&ref] { return std::to_string(ref); }});
  }
  void operator()(std::string key, int& ref) {
    out.push_back({key, "int", [&ref, key](const std::string& s) { ref = parse_number<int>(key, s); },
                   [&ref] { return std::to_string(ref); }});
  }
  void operator()(std::string key, bool& ref) {
    out.push_back({key, "bool", [&ref, key](const std::string& s) { ref = parse_bool(key, s); },
                   [&ref] { return std::string(ref ? "true" : "false"); }});
  }
  void operator()(std::string key, std::string& ref) {
    out.push_back({key, "string", [&ref](const std::string& s) { ref = s; }, [&ref] { return ref; }});
  }
  void operator()(std::string key, std::vector<std::size_t>& ref) {
    out.push_back({key, "list", [&ref, key](const std::string& s) { ref = parse_list(key, s); },
                   [&ref] { return list_str(ref); }});
  }
};

// Flattens a TOML table into dotted keys with string values.
void flatten(const toml::table& tbl, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
  for (auto&& [k, node] : tbl) {
    const std::string key = prefix.empty() ? std::string(k.str()) : prefix + "." + std::string(k.str());
    if (const auto* t = node.as_table()) {
      flatten(*t, key, out);
    } else if (const auto* a = node.as_array()) {
      std::string s;
      for (std::size_t i = 0; i < a->size(); ++i) {
        const auto* v = (*a)[i].as_integer();
        if (!v) throw ConfigError("only integer arrays are supported (" + key + ")");
        s += (i ? "," : "") + std::to_string(v->get());
      }
      out.emplace_back(key, s);
    } else if (const auto* v = node.as_integer()) {
      out.emplace_back(key, std::to_string(v->get()));
    } else if (const auto* v = node.as_floating_point()) {
      out.emplace_back(key, num_str(v->get()));
    } else if (const auto* v = node.as_boolean()) {
      out.emplace_back(key, v->get() ? "true" : "false");
    } else if (const auto* v = node.as_string()) {
      out.emplace_back(key, v->get());
    } else {
      throw ConfigError("unsupported value type for " + key);
    }
  }
}

}  // namespace

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> kNames = {"psa", "pna", "doc", "ksweep", "anonymize", "roc-kv", "roc-semantic"};
  return kNames;
}

std::vector<ConfigField> config_fields(ExperimentConfig& c) {
  std::vector<ConfigField> f;
  Binder b{f};
  b("scenario", c.scenario);
  b("seed", c.seed, 0);
  b("output_dir", c.output_dir);

  b("latency.t_miss_ms", c.latency.t_miss_per_token);
  b("latency.t_hit_ms", c.latency.t_hit_per_token);
  b("latency.t_base_ms", c.latency.t_base);
  b("latency.t_decode_ms", c.latency.t_decode_per_token);
  b("latency.noise_sigma_ms", c.latency.noise_sigma);
  b("latency.semantic_hit_ms", c.latency.semantic_hit_latency);
  b("latency.semantic_miss_ms", c.latency.semantic_miss_latency);
  b("latency.calibrate_noise", c.calibrate_noise);
  b("latency.target_tpr", c.target_tpr);
  b("latency.target_fpr", c.target_fpr);

  b("kv_cache.enabled", c.kv_enabled);
  b("kv_cache.granularity", c.kv.granularity);
  b("kv_cache.capacity_tokens", c.kv.capacity_tokens);

  b("semantic_cache.enabled", c.semantic_enabled);
  b("semantic_cache.threshold", c.semantic.threshold);
  b("semantic_cache.capacity_entries", c.semantic.capacity_entries);
  b("semantic_cache.dimension", c.semantic.embedding.dimension);
  b("semantic_cache.hash_seed", c.semantic.embedding.hash_seed, 0);
  b("semantic_cache.unigram_weight", c.semantic.embedding.unigram_weight);
  b("semantic_cache.bigram_weight", c.semantic.embedding.bigram_weight);
  b("semantic_cache.drop_stopwords", c.semantic.embedding.drop_stopwords);
  b("semantic_cache.anonymize", c.anonymize);

  b("corpus.num_prompts", c.corpus.num_prompts);
  b("corpus.victim_fraction", c.corpus.victim_fraction);
  b("corpus.min_length", c.corpus.min_length);
  b("corpus.max_length", c.corpus.max_length);
  b("corpus.chain_order", c.corpus.chain_order);

  b("vote.n", c.vote.n);
  b("vote.k", c.vote.k);
  b("vote.theta_ms", c.vote.theta);
  b("vote.calibrate_theta", c.calibrate_theta);
  b("vote.theta_rule", c.theta_rule);
  b("vote.calibration_samples", c.calibration_samples);

  b("psa.victims", c.psa.victims);
  b("psa.max_guesses", c.psa.max_guesses);
  b("psa.temperature", c.psa.temperature);
  b("psa.eviction_count", c.psa.eviction_count);
  b("psa.eviction_tokens", c.psa.eviction_tokens);
  b("psa.cross_verify", c.psa.cross_verify);
  b("psa.order", c.psa.order);
  b("psa.alpha", c.psa.alpha);
  b("psa.user_text", c.psa.user_text);
  b("psa.write_samples", c.psa.write_samples);

  b("pna.rounds", c.pna.rounds);
  b("pna.max_probes", c.pna.max_probes);
  b("pna.sigma_budget", c.pna.sigma_budget);
  b("pna.orthogonality_min_distance", c.pna.orthogonality_min_distance);
  b("pna.flood_requests", c.pna.flood_requests);
  b("pna.evictor", c.pna.evictor);
  b("pna.read_only_probes", c.pna.read_only_probes);
  b("pna.pool_size", c.pna.pool_size);
  b("pna.held_out", c.pna.held_out);

  b("doc.interested", c.doc.interested);
  b("doc.victim_from_interested", c.doc.victim_from_interested);
  b("doc.victim_outside", c.doc.victim_outside);
  b("doc.repetitions", c.doc.repetitions);
  b("doc.lengths", c.doc.lengths);
  b("doc.threshold_ms", c.doc.threshold);
  b("doc.capacity_tokens", c.doc.capacity_tokens);

  b("ksweep.k_values", c.ksweep.k_values);
  b("ksweep.simulate", c.ksweep.simulate);
  b("ksweep.budget_per_token", c.ksweep.budget_per_token);
  b("ksweep.victims", c.ksweep.victims);

  b("anonymize.rounds", c.anonymize_suite.rounds);
  b("anonymize.evictor", c.anonymize_suite.evictor);
  b("anonymize.roundtrip_sentences", c.anonymize_suite.roundtrip_sentences);
  b("anonymize.sharing_trials", c.anonymize_suite.sharing_trials);
  b("roc.samples", c.roc.samples);
  b("roc.vote_trials", c.roc.vote_trials);
  b("roc.input", c.roc.input);
  return f;
}

void ExperimentConfig::validate() const {
  const auto& names = scenario_names();
  if (std::find(names.begin(), names.end(), scenario) == names.end())
    throw ConfigError("unknown scenario '" + scenario + "'");
  try {
    latency.validate();
    vote.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(target_tpr > 0.5 && target_tpr < 1.0 && target_fpr > 0.0 && target_fpr < 0.5))
    throw ConfigError("latency.target_tpr/target_fpr must describe a better-than-chance classifier");
  if (kv.granularity == 0 || kv.capacity_tokens == 0) throw ConfigError("kv_cache granularity and capacity must be positive");
  if (!(semantic.threshold > 0.0 && semantic.threshold < 1.0)) throw ConfigError("semantic_cache.threshold must be in (0,1)");
  if (semantic.capacity_entries == 0 || semantic.embedding.dimension == 0)
    throw ConfigError("semantic_cache capacity and dimension must be positive");
  if (theta_rule != "target_fpr" && theta_rule != "youden")
    throw ConfigError("vote.theta_rule must be 'target_fpr' or 'youden'");
  if (psa.max_guesses == 0) throw ConfigError("psa.max_guesses must be >= 1");
  if (psa.order == 0 || !(psa.alpha > 0.0)) throw ConfigError("psa.order >= 1 and psa.alpha > 0 required");
  if (psa.temperature < 0.0) throw ConfigError("psa.temperature must be >= 0");
  if (!(pna.sigma_budget > 0.0 && pna.sigma_budget < 1.0)) throw ConfigError("pna.sigma_budget must be in (0,1)");
  if (pna.evictor != "flood" && pna.evictor != "admin") throw ConfigError("pna.evictor must be 'flood' or 'admin'");
  if (anonymize_suite.evictor != "flood" && anonymize_suite.evictor != "admin")
    throw ConfigError("anonymize.evictor must be 'flood' or 'admin'");
  if (doc.lengths.empty()) throw ConfigError("doc.lengths must not be empty");
  if (ksweep.k_values.empty()) throw ConfigError("ksweep.k_values must not be empty");
  for (auto k : ksweep.k_values)
    if (k == 0) throw ConfigError("ksweep.k_values must be positive");
}

ExperimentConfig parse_config(const std::string& text) {
  toml::table tbl;
  try {
    tbl = toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw ConfigError(std::string("TOML parse error: ") + std::string(e.description()));
  }
  std::vector<std::pair<std::string, std::string>> flat;
  flatten(tbl, "", flat);
  ExperimentConfig cfg;
  for (const auto& [k, v] : flat) apply_override(cfg, k, v);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  for (auto& f : config_fields(cfg))
    if (f.key == key) {
      f.set(value);
      return;
    }
  throw ConfigError("unknown config key '" + key + "'");
}

std::uint64_t derive_seed(std::uint64_t global, std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::uint64_t x = global ^ h;
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

EngineConfig engine_config(const ExperimentConfig& cfg) {
  EngineConfig e;
  e.latency = cfg.latency;
  e.latency.rng_seed = derive_seed(cfg.seed, "engine-noise");
  if (cfg.calibrate_noise)
    e.latency.noise_sigma = calibrated_noise_sigma(e.latency.per_token_gap(), cfg.target_tpr, cfg.target_fpr);
  e.kv_enabled = cfg.kv_enabled;
  e.kv = cfg.kv;
  e.semantic_enabled = cfg.semantic_enabled;
  e.semantic = cfg.semantic;
  e.anonymize = cfg.anonymize;
  e.name_gazetteer = person_names();
  return e;
}

}  // namespace cacheleak
