#include "cacheleak/embedding.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include "cacheleak/tokenizer.hpp"

namespace cacheleak {

namespace {

constexpr std::array<std::string_view, 24> kStopwords = {
    "a",  "an",  "the", "for", "with", "of",  "to",   "and", "in",  "on",   "who",  "is",
    "at", "by",  "as",  "it",  "be",   "are", "that", "this", "has", "from", "into", "about"};

bool is_word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80 || c == '_' || c == '@'; }

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

bool Embedding::is_zero() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return v == 0.0; });
}

std::vector<std::string> embedding_terms(std::string_view text, bool drop_stopwords) {
  std::vector<std::string> terms;
  for (auto word : split_words(text)) {
    std::size_t b = 0, e = word.size();
    while (b < e && !is_word_byte(static_cast<unsigned char>(word[b]))) ++b;
    while (e > b && !is_word_byte(static_cast<unsigned char>(word[e - 1]))) --e;
    if (b == e) continue;
    std::string term(word.substr(b, e - b));
    for (auto& c : term)
      if (static_cast<unsigned char>(c) < 0x80) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (drop_stopwords && std::find(kStopwords.begin(), kStopwords.end(), term) != kStopwords.end()) continue;
    terms.push_back(std::move(term));
  }
  return terms;
}

std::uint64_t feature_hash(std::string_view feature, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
  for (unsigned char c : feature) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(h);
}

Embedding embed(std::string_view text, const EmbeddingConfig& config) {
  if (config.dimension == 0) throw std::invalid_argument("embedding dimension must be positive");
  Embedding e;
  e.values.assign(config.dimension, 0.0);
  auto terms = embedding_terms(text, config.drop_stopwords);
  auto add = [&](const std::string& feature, double weight) {
    const auto h = feature_hash(feature, config.hash_seed);
    const double sign = (h >> 63) ? -1.0 : 1.0;
    e.values[h % config.dimension] += sign * weight;
  };
  for (std::size_t i = 0; i < terms.size(); ++i) {
    add("u:" + terms[i], config.unigram_weight);
    if (i + 1 < terms.size()) add("b:" + terms[i] + " " + terms[i + 1], config.bigram_weight);
  }
  double norm = 0.0;
  for (double v : e.values) norm += v * v;
  norm = std::sqrt(norm);
  if (norm > 0.0)
    for (auto& v : e.values) v /= norm;
  return e;
}

double dot(const Embedding& a, const Embedding& b) {
  if (a.values.size() != b.values.size()) throw std::invalid_argument("embedding dimension mismatch");
  double s = 0.0;
  for (std::size_t j = 0; j < a.values.size(); ++j) s += a.values[j] * b.values[j];
  return s;
}

double cosine(const Embedding& a, const Embedding& b) {
  if (a.is_zero() || b.is_zero()) return 0.0;
  return dot(a, b);
}

double l2_distance(const Embedding& a, const Embedding& b) {
  if (a.values.size() != b.values.size()) throw std::invalid_argument("embedding dimension mismatch");
  double s = 0.0;
  for (std::size_t j = 0; j < a.values.size(); ++j) {
    const double d = a.values[j] - b.values[j];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace cacheleak
