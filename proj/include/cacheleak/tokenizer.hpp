#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cacheleak {

using TokenId = std::uint32_t;
using TokenSeq = std::vector<TokenId>;

class UnknownToken : public std::runtime_error {
 public:
  explicit UnknownToken(std::string word)
      : std::runtime_error("unknown token: '" + word + "'"), word_(std::move(word)) {}
  const std::string& word() const noexcept { return word_; }

 private:
  std::string word_;
};

/// Closed whitespace-word vocabulary. Ids are dense and 0-based, assigned in
/// insertion order.
class Vocab {
 public:
  Vocab() = default;
  /// Throws std::invalid_argument on duplicate or empty surface strings.
  explicit Vocab(std::vector<std::string> tokens);

  /// Returns the id of `word`, adding it when absent.
  TokenId intern(std::string_view word);
  std::optional<TokenId> find(std::string_view word) const;
  bool contains(std::string_view word) const { return find(word).has_value(); }

  const std::string& token(TokenId id) const { return tokens_.at(id); }
  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> id_of_;
};

/// Splits on ASCII whitespace; empty words are dropped.
std::vector<std::string_view> split_words(std::string_view text);

/// Throws UnknownToken for the first word missing from `vocab`.
TokenSeq encode(std::string_view text, const Vocab& vocab);
/// Same as encode but grows `vocab` instead of failing.
TokenSeq encode_interning(std::string_view text, Vocab& vocab);
/// Joins surface strings with single spaces. Throws std::out_of_range on ids
/// outside the vocabulary.
std::string decode(std::span<const TokenId> ids, const Vocab& vocab);

}  // namespace cacheleak
