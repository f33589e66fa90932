#include "cacheleak/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <span>
#include <unordered_map>

namespace cacheleak {

namespace {

class MarkovChain {
 public:
  explicit MarkovChain(std::size_t order) : order_(order) {
    std::vector<std::string> words;
    for (const auto& para : seed_paragraphs()) {
      starts_.push_back(words.size());
      for (auto w : split_words(para)) words.emplace_back(w);
    }
    words_ = std::move(words);
    const std::size_t n = words_.size();
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::string> ctx;
      for (std::size_t k = 0; k < order_; ++k) ctx.push_back(words_[(i + k) % n]);
      next_[key(ctx)].push_back(words_[(i + order_) % n]);
    }
  }

  std::vector<std::string> generate(std::size_t length, std::mt19937_64& rng) const {
    std::vector<std::string> out;
    std::uniform_int_distribution<std::size_t> pick_start(0, starts_.size() - 1);
    const std::size_t s = starts_[pick_start(rng)];
    for (std::size_t k = 0; k < order_ && out.size() < length; ++k) out.push_back(words_[(s + k) % words_.size()]);
    while (out.size() < length) {
      const auto& succ = next_.at(key(std::span<const std::string>(out).last(order_)));
      std::uniform_int_distribution<std::size_t> pick(0, succ.size() - 1);
      out.push_back(succ[pick(rng)]);
    }
    return out;
  }

 private:
  static std::string key(std::span<const std::string> ctx) {
    std::string k;
    for (const auto& w : ctx) {
      k += w;
      k += '\x1f';
    }
    return k;
  }

  std::size_t order_;
  std::vector<std::string> words_;
  std::vector<std::size_t> starts_;
  std::unordered_map<std::string, std::vector<std::string>> next_;
};

}  // namespace

PromptCorpus build_corpus(const CorpusConfig& config, std::uint64_t seed) {
  if (config.num_prompts < 2) throw InvalidConfig("corpus needs at least 2 prompts");
  if (config.min_length == 0 || config.max_length < config.min_length)
    throw InvalidConfig("prompt lengths must satisfy 1 <= min_length <= max_length");
  if (config.chain_order == 0) throw InvalidConfig("chain_order must be >= 1");
  if (!(config.victim_fraction > 0.0 && config.victim_fraction < 1.0))
    throw InvalidConfig("victim_fraction must lie in (0,1)");
  const auto n_victim = static_cast<std::size_t>(
      std::llround(config.victim_fraction * static_cast<double>(config.num_prompts)));
  if (n_victim == 0 || n_victim >= config.num_prompts)
    throw InvalidConfig("victim split would be empty or cover the whole corpus");

  const MarkovChain chain(config.chain_order);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_len(config.min_length, config.max_length);
  std::uniform_int_distribution<std::size_t> pick_pre(0, prompt_preambles().size() - 1);

  PromptCorpus corpus;
  corpus.seed = seed;
  std::set<std::vector<std::string>> seen;
  std::size_t failures = 0;
  while (corpus.prompts.size() < config.num_prompts) {
    const std::size_t length = pick_len(rng);
    std::vector<std::string> words;
    for (auto w : split_words(prompt_preambles()[pick_pre(rng)])) {
      if (words.size() < length) words.emplace_back(w);
    }
    if (words.size() < length) {
      auto body = chain.generate(length - words.size(), rng);
      words.insert(words.end(), body.begin(), body.end());
    }
    if (!seen.insert(words).second) {
      if (++failures > 100 * config.num_prompts)
        throw InvalidConfig("cannot generate enough distinct prompts for this length range");
      continue;
    }
    TokenSeq ids;
    ids.reserve(words.size());
    for (const auto& w : words) ids.push_back(corpus.vocab.intern(w));
    corpus.prompts.push_back(std::move(ids));
  }

  std::vector<std::size_t> order(config.num_prompts);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  corpus.victim.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_victim));
  corpus.attacker.assign(order.begin() + static_cast<std::ptrdiff_t>(n_victim), order.end());
  std::sort(corpus.victim.begin(), corpus.victim.end());
  std::sort(corpus.attacker.begin(), corpus.attacker.end());
  return corpus;
}

nlohmann::json to_json(const PromptCorpus& corpus) {
  return nlohmann::json{{"seed", corpus.seed},
                        {"vocab", corpus.vocab.tokens()},
                        {"prompts", corpus.prompts},
                        {"victim", corpus.victim},
                        {"attacker", corpus.attacker}};
}

PromptCorpus corpus_from_json(const nlohmann::json& j) {
  PromptCorpus corpus;
  corpus.seed = j.at("seed").get<std::uint64_t>();
  corpus.vocab = Vocab(j.at("vocab").get<std::vector<std::string>>());
  corpus.prompts = j.at("prompts").get<std::vector<TokenSeq>>();
  corpus.victim = j.at("victim").get<std::vector<std::size_t>>();
  corpus.attacker = j.at("attacker").get<std::vector<std::size_t>>();
  for (const auto& p : corpus.prompts)
    for (auto id : p)
      if (id >= corpus.vocab.size()) throw InvalidConfig("corpus json: token id out of range");
  return corpus;
}

double split_unigram_tv_distance(const PromptCorpus& corpus) {
  const std::size_t v = corpus.vocab.size();
  auto histogram = [&](const std::vector<std::size_t>& split) {
    std::vector<double> h(v, 0.0);
    double total = 0.0;
    for (auto idx : split)
      for (auto id : corpus.prompts.at(idx)) {
        h[id] += 1.0;
        total += 1.0;
      }
    if (total > 0)
      for (auto& x : h) x /= total;
    return h;
  };
  auto a = histogram(corpus.attacker);
  auto b = histogram(corpus.victim);
  double tv = 0.0;
  for (std::size_t i = 0; i < v; ++i) tv += std::abs(a[i] - b[i]);
  return 0.5 * tv;
}

SlotTemplate::SlotTemplate(std::string text) : text_(std::move(text)) {
  std::size_t pos = 0;
  while ((pos = text_.find('[', pos)) != std::string::npos) {
    auto close = text_.find(']', pos);
    if (close == std::string::npos) throw std::invalid_argument("slot template: unbalanced '['");
    std::string name = text_.substr(pos + 1, close - pos - 1);
    if (name.empty()) throw std::invalid_argument("slot template: empty slot name");
    if (std::find(slots_.begin(), slots_.end(), name) != slots_.end())
      throw std::invalid_argument("slot template: slot '" + name + "' appears more than once");
    slots_.push_back(std::move(name));
    pos = close + 1;
  }
}

std::string instantiate(const SlotTemplate& tmpl, const std::map<std::string, std::string>& bindings) {
  for (const auto& s : tmpl.slots())
    if (!bindings.count(s)) throw MissingSlot(s);
  std::string out;
  const auto& text = tmpl.text();
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto open = text.find('[', pos);
    if (open == std::string::npos) {
      out.append(text, pos, std::string::npos);
      break;
    }
    out.append(text, pos, open - pos);
    auto close = text.find(']', open);
    out += bindings.at(text.substr(open + 1, close - open - 1));
    pos = close + 1;
  }
  return out;
}

}  // namespace cacheleak
