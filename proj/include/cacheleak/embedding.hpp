#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace cacheleak {

struct EmbeddingConfig {
  std::size_t dimension = 1024;
  std::uint64_t hash_seed = 0x9E3779B9;
  double unigram_weight = 1.0;
  double bigram_weight = 0.3;
  bool drop_stopwords = true;
};

/// L2-normalised hashed bag of words. Empty input maps to the zero vector.
struct Embedding {
  std::vector<double> values;

  bool is_zero() const;
};

/// Lower-cased terms with surrounding ASCII punctuation removed; bytes >= 0x80
/// count as word characters so anonymiser identifiers survive intact.
std::vector<std::string> embedding_terms(std::string_view text, bool drop_stopwords);

/// 64-bit FNV-1a over `feature` with `seed` folded into the offset basis,
/// followed by the splitmix64 finaliser.
std::uint64_t feature_hash(std::string_view feature, std::uint64_t seed);

/// Each term is hashed as "u:<term>" and each adjacent term pair as
/// "b:<t1> <t2>". A feature lands in bucket h % D with sign +1 when the top
/// bit of h is clear and -1 otherwise, weighted by its term frequency.
Embedding embed(std::string_view text, const EmbeddingConfig& config = {});

double dot(const Embedding& a, const Embedding& b);
/// Cosine similarity; 0 when either side is the zero vector.
double cosine(const Embedding& a, const Embedding& b);
double l2_distance(const Embedding& a, const Embedding& b);

}  // namespace cacheleak
