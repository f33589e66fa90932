#include "cacheleak/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <queue>

namespace cacheleak {

NGramPredictor::NGramPredictor(std::size_t vocab_size, std::size_t order, double alpha)
    : vocab_size_(vocab_size), order_(order), alpha_(alpha) {
  if (vocab_size == 0) throw std::invalid_argument("predictor: empty vocabulary");
  if (order == 0) throw std::invalid_argument("predictor: order must be >= 1");
  if (!(alpha > 0.0)) throw std::invalid_argument("predictor: alpha must be positive");
}

TokenSeq NGramPredictor::context_key(std::span<const TokenId> context) const {
  const std::size_t width = order_ - 1;
  TokenSeq key(width, kBos);
  const std::size_t take = std::min(width, context.size());
  std::copy(context.end() - static_cast<std::ptrdiff_t>(take), context.end(), key.end() - static_cast<std::ptrdiff_t>(take));
  return key;
}

void NGramPredictor::observe(std::span<const TokenId> sequence) {
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    if (sequence[i] >= vocab_size_) throw std::out_of_range("predictor: token id outside vocabulary");
    auto& c = counts_[context_key(sequence.first(i))];
    ++c.total;
    ++c.next[sequence[i]];
  }
}

double NGramPredictor::probability(std::span<const TokenId> context, TokenId token) const {
  const double v = static_cast<double>(vocab_size_);
  if (token >= vocab_size_) return 0.0;
  auto it = counts_.find(context_key(context));
  if (it == counts_.end()) return 1.0 / v;
  const auto& c = it->second;
  auto nt = c.next.find(token);
  const double count = nt == c.next.end() ? 0.0 : static_cast<double>(nt->second);
  return (count + alpha_) / (static_cast<double>(c.total) + alpha_ * v);
}

std::vector<double> NGramPredictor::distribution(std::span<const TokenId> context) const {
  const double v = static_cast<double>(vocab_size_);
  auto it = counts_.find(context_key(context));
  if (it == counts_.end()) return std::vector<double>(vocab_size_, 1.0 / v);
  const auto& c = it->second;
  const double denom = static_cast<double>(c.total) + alpha_ * v;
  std::vector<double> p(vocab_size_, alpha_ / denom);
  for (const auto& [tok, count] : c.next) p[tok] = (static_cast<double>(count) + alpha_) / denom;
  return p;
}

NGramPredictor::SparseDistribution NGramPredictor::tempered_distribution(std::span<const TokenId> context,
                                                                        double temperature) const {
  if (!(temperature > 0.0)) throw std::invalid_argument("tempered_distribution: temperature must be positive");
  const double v = static_cast<double>(vocab_size_);
  SparseDistribution d;
  auto it = counts_.find(context_key(context));
  if (it == counts_.end()) {
    d.rest = 1.0 / v;
    return d;
  }
  const auto& c = it->second;
  const double denom = static_cast<double>(c.total) + alpha_ * v;
  const double rest_log = std::log(alpha_ / denom) / temperature;
  double max_log = rest_log;
  for (const auto& [tok, count] : c.next)
    max_log = std::max(max_log, std::log((static_cast<double>(count) + alpha_) / denom) / temperature);
  const double rest_w = std::exp(rest_log - max_log);
  double total = rest_w * (v - static_cast<double>(c.next.size()));
  for (const auto& [tok, count] : c.next) {
    const double w = std::exp(std::log((static_cast<double>(count) + alpha_) / denom) / temperature - max_log);
    d.listed.emplace(tok, w);
    total += w;
  }
  for (auto& [tok, w] : d.listed) w /= total;
  d.rest = rest_w / total;
  return d;
}

NGramPredictor train_predictor(const std::vector<TokenSeq>& sequences, std::size_t vocab_size, std::size_t order,
                               double alpha) {
  if (std::all_of(sequences.begin(), sequences.end(), [](const TokenSeq& s) { return s.empty(); }))
    throw EmptyCorpus();
  NGramPredictor p(vocab_size, order, alpha);
  for (const auto& s : sequences) p.observe(s);
  return p;
}

double PenaltyState::multiplier(std::size_t position, std::span<const TokenId> guess) const {
  return std::ldexp(1.0, -rejections(position, guess));
}

void PenaltyState::reject(std::size_t position, std::span<const TokenId> guess) {
  ++rejected_[position][TokenSeq(guess.begin(), guess.end())];
}

int PenaltyState::rejections(std::size_t position, std::span<const TokenId> guess) const {
  auto p = rejected_.find(position);
  if (p == rejected_.end()) return 0;
  auto g = p->second.find(TokenSeq(guess.begin(), guess.end()));
  return g == p->second.end() ? 0 : g->second;
}

const std::map<TokenSeq, int>& PenaltyState::rejected(std::size_t position) const {
  static const std::map<TokenSeq, int> kEmpty;
  auto p = rejected_.find(position);
  return p == rejected_.end() ? kEmpty : p->second;
}

namespace {

/// p^(1/T) normalised, computed in log space.
std::vector<double> tempered(std::vector<double> p, double temperature) {
  double max_log = -std::numeric_limits<double>::infinity();
  for (double& x : p) {
    x = x > 0.0 ? std::log(x) / temperature : -std::numeric_limits<double>::infinity();
    max_log = std::max(max_log, x);
  }
  double total = 0.0;
  for (double& x : p) {
    x = std::exp(x - max_log);
    total += x;
  }
  for (double& x : p) x /= total;
  return p;
}

TokenId draw(const std::vector<double>& weights, std::mt19937_64& rng) {
  double total = 0.0;
  for (double w : weights) total += w;
  const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
  double acc = 0.0;
  TokenId last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    acc += weights[i];
    last_positive = static_cast<TokenId>(i);
    if (u < acc) return last_positive;
  }
  return last_positive;
}

struct TrieNode {
  std::map<TokenId, std::unique_ptr<TrieNode>> children;
  int rejections = 0;  // meaningful at depth k
  double mass = 1.0;
};

TokenSeq concat(std::span<const TokenId> a, std::span<const TokenId> b) {
  TokenSeq out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

// Expected penalty factor of a completion below `node` under the tempered
// chain.
double compute_mass(TrieNode& node, std::size_t depth, std::size_t k, TokenSeq& path, const NGramPredictor& pred,
                    std::span<const TokenId> context, double temperature) {
  if (depth == k) {
    node.mass = std::exp2(-static_cast<double>(node.rejections) / temperature);
    return node.mass;
  }
  const auto q = pred.tempered_distribution(concat(context, path), temperature);
  double m = 1.0;
  for (auto& [tok, child] : node.children) {
    path.push_back(tok);
    const double cm = compute_mass(*child, depth + 1, k, path, pred, context, temperature);
    path.pop_back();
    m -= q.at(tok) * (1.0 - cm);
  }
  node.mass = std::max(m, 0.0);
  return node.mass;
}

TokenSeq best_tuple(const NGramPredictor& pred, std::span<const TokenId> context, std::size_t k,
                    const PenaltyState& penalty, std::size_t position) {
  // Best-first over prefixes ordered by product probability. Penalties only
  // shrink scores, so the search stops once no open prefix can beat the best
  // complete tuple.
  struct Open {
    double score;
    TokenSeq prefix;
    bool operator<(const Open& o) const {
      if (score != o.score) return score < o.score;
      return prefix > o.prefix;
    }
  };
  std::priority_queue<Open> open;
  open.push({1.0, {}});
  TokenSeq best;
  double best_score = -1.0;
  std::size_t expansions = 0;
  while (!open.empty() && open.top().score > best_score) {
    Open cur = open.top();
    open.pop();
    if (cur.prefix.size() == k) {
      const double s = cur.score * penalty.multiplier(position, cur.prefix);
      if (s > best_score || (s == best_score && cur.prefix < best)) {
        best_score = s;
        best = cur.prefix;
      }
      continue;
    }
    if (++expansions > 4096) break;
    const auto p = pred.distribution(concat(context, cur.prefix));
    // Only the tokens that could still beat the incumbent are queued.
    for (TokenId w = 0; w < p.size(); ++w) {
      const double s = cur.score * p[w];
      if (s <= best_score) continue;
      TokenSeq next = cur.prefix;
      next.push_back(w);
      open.push({s, std::move(next)});
    }
    if (open.size() > 200000) break;
  }
  if (best.empty()) {
    // Search budget exhausted: fall back to greedy chain.
    TokenSeq ctx(context.begin(), context.end());
    for (std::size_t i = 0; i < k; ++i) {
      const auto p = pred.distribution(ctx);
      const auto w = static_cast<TokenId>(std::max_element(p.begin(), p.end()) - p.begin());
      best.push_back(w);
      ctx.push_back(w);
    }
  }
  return best;
}

}  // namespace

TokenId sample_next(const NGramPredictor& predictor, std::span<const TokenId> context, double temperature,
                    const PenaltyState& penalty, std::size_t position, std::mt19937_64& rng) {
  auto p = predictor.distribution(context);
  for (const auto& [tuple, count] : penalty.rejected(position))
    if (tuple.size() == 1 && tuple[0] < p.size()) p[tuple[0]] = std::ldexp(p[tuple[0]], -count);
  if (temperature <= 0.0) return static_cast<TokenId>(std::max_element(p.begin(), p.end()) - p.begin());
  return draw(tempered(std::move(p), temperature), rng);
}

TokenSeq predict_next_k(const NGramPredictor& predictor, std::span<const TokenId> context, std::size_t k,
                        double temperature, const PenaltyState& penalty, std::size_t position,
                        std::mt19937_64& rng) {
  if (k == 0) throw std::invalid_argument("predict_next_k: k must be >= 1");
  if (k == 1) return {sample_next(predictor, context, temperature, penalty, position, rng)};
  if (temperature <= 0.0) return best_tuple(predictor, context, k, penalty, position);

  TrieNode root;
  for (const auto& [tuple, count] : penalty.rejected(position)) {
    if (tuple.size() != k) continue;
    TrieNode* node = &root;
    for (TokenId t : tuple) {
      auto& child = node->children[t];
      if (!child) child = std::make_unique<TrieNode>();
      node = child.get();
    }
    node->rejections = count;
  }
  TokenSeq path;
  if (!root.children.empty()) compute_mass(root, 0, k, path, predictor, context, temperature);

  TokenSeq out;
  const TrieNode* node = &root;
  for (std::size_t i = 0; i < k; ++i) {
    auto w = tempered(predictor.distribution(concat(context, out)), temperature);
    if (node)
      for (const auto& [tok, child] : node->children) w[tok] *= child->mass;
    const TokenId t = draw(w, rng);
    out.push_back(t);
    if (node) {
      auto it = node->children.find(t);
      node = it == node->children.end() ? nullptr : it->second.get();
    }
  }
  return out;
}

double tuple_probability(const NGramPredictor& predictor, std::span<const TokenId> context,
                         std::span<const TokenId> tuple) {
  TokenSeq ctx(context.begin(), context.end());
  double p = 1.0;
  for (TokenId t : tuple) {
    p *= predictor.probability(ctx, t);
    ctx.push_back(t);
  }
  return p;
}

}  // namespace cacheleak
