#include "cacheleak/tokenizer.hpp"

#include <cctype>

namespace cacheleak {

Vocab::Vocab(std::vector<std::string> tokens) {
  tokens_.reserve(tokens.size());
  for (auto& t : tokens) {
    if (t.empty()) throw std::invalid_argument("vocab: empty token");
    if (id_of_.count(t)) throw std::invalid_argument("vocab: duplicate token '" + t + "'");
    id_of_.emplace(t, static_cast<TokenId>(tokens_.size()));
    tokens_.push_back(std::move(t));
  }
}

TokenId Vocab::intern(std::string_view word) {
  std::string key(word);
  auto it = id_of_.find(key);
  if (it != id_of_.end()) return it->second;
  auto id = static_cast<TokenId>(tokens_.size());
  id_of_.emplace(key, id);
  tokens_.push_back(std::move(key));
  return id;
}

std::optional<TokenId> Vocab::find(std::string_view word) const {
  auto it = id_of_.find(std::string(word));
  if (it == id_of_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string_view> split_words(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < n && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) words.push_back(text.substr(start, i - start));
  }
  return words;
}

TokenSeq encode(std::string_view text, const Vocab& vocab) {
  TokenSeq ids;
  for (auto w : split_words(text)) {
    auto id = vocab.find(w);
    if (!id) throw UnknownToken(std::string(w));
    ids.push_back(*id);
  }
  return ids;
}

TokenSeq encode_interning(std::string_view text, Vocab& vocab) {
  TokenSeq ids;
  for (auto w : split_words(text)) ids.push_back(vocab.intern(w));
  return ids;
}

std::string decode(std::span<const TokenId> ids, const Vocab& vocab) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out.push_back(' ');
    out += vocab.token(ids[i]);
  }
  return out;
}

}  // namespace cacheleak
