#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cacheleak/tokenizer.hpp"

namespace cacheleak {

class InvalidConfig : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class MissingSlot : public std::runtime_error {
 public:
  explicit MissingSlot(std::string name)
      : std::runtime_error("missing binding for slot '" + name + "'"), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

struct CorpusConfig {
  std::size_t num_prompts = 1000;
  double victim_fraction = 0.2;
  std::size_t min_length = 20;
  std::size_t max_length = 120;
  /// Context length of the Markov chain behind the prompt bodies.
  std::size_t chain_order = 1;
};

/// System-prompt corpus with a disjoint victim/attacker split.
struct PromptCorpus {
  std::uint64_t seed = 0;
  Vocab vocab;
  std::vector<TokenSeq> prompts;
  std::vector<std::size_t> victim;
  std::vector<std::size_t> attacker;

  std::string text(std::size_t index) const { return decode(prompts.at(index), vocab); }
};

/// Prompts open with one of the fixed preambles and continue along an
/// Markov chain (chain_order words of context) over the seed paragraphs. Pure function of
/// (config, seed). Throws InvalidConfig.
PromptCorpus build_corpus(const CorpusConfig& config, std::uint64_t seed);

nlohmann::json to_json(const PromptCorpus& corpus);
PromptCorpus corpus_from_json(const nlohmann::json& j);

/// Total-variation distance between the unigram distributions of the two
/// splits.
double split_unigram_tv_distance(const PromptCorpus& corpus);

const std::vector<std::string>& seed_paragraphs();
const std::vector<std::string>& prompt_preambles();
/// 4096 synthetic pronounceable words ("x" + three syllables) that never
/// occur in the prompt corpus. Used for eviction fillers.
const std::vector<std::string>& filler_lexicon();

/// Text with named slots written as `[slot]`.
class SlotTemplate {
 public:
  /// Throws std::invalid_argument if a slot name repeats or a bracket is
  /// unbalanced.
  explicit SlotTemplate(std::string text);

  const std::string& text() const noexcept { return text_; }
  const std::vector<std::string>& slots() const noexcept { return slots_; }

 private:
  std::string text_;
  std::vector<std::string> slots_;
};

/// Bindings are inserted verbatim. Throws MissingSlot.
std::string instantiate(const SlotTemplate& tmpl, const std::map<std::string, std::string>& bindings);

}  // namespace cacheleak
