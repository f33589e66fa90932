#pragma once

#include <random>
#include <string>
#include <vector>

#include "cacheleak/corpus.hpp"
#include "cacheleak/embedding.hpp"

namespace cacheleak {

/// Person names (mostly first + last) used as one private attribute.
const std::vector<std::string>& person_names();
/// Medical conditions (mostly single words) used as the other.
const std::vector<std::string>& medical_conditions();
/// Requests unrelated to the healthcare scenario.
const std::vector<std::string>& unrelated_requests();

/// Rule-based rewrites of the meeting-agenda request. Every member carries the
/// [name] and [condition] slots. Member 0 is the canonical phrasing.
class ParaphraseFamily {
 public:
  ParaphraseFamily();
  const std::vector<SlotTemplate>& members() const noexcept { return members_; }
  std::size_t size() const noexcept { return members_.size(); }
  const SlotTemplate& canonical() const { return members_.front(); }
  std::string render(std::size_t member, const std::string& name, const std::string& condition) const;

  /// Members whose rendering with the first name and condition stays at
  /// cosine >= threshold of the canonical rendering. The canonical member is
  /// always kept and stays first.
  ParaphraseFamily filtered(const EmbeddingConfig& embedding, double threshold) const;

 private:
  explicit ParaphraseFamily(std::vector<SlotTemplate> members) : members_(std::move(members)) {}
  std::vector<SlotTemplate> members_;
};

enum class VictimType { type1 = 1, type2 = 2, type3 = 3, type4 = 4 };
std::string_view victim_type_label(VictimType t);

struct VictimRequest {
  VictimType type = VictimType::type1;
  std::string text;
  std::string name;       // empty for type 4
  std::string condition;  // empty for type 4
};

/// Draws victim requests relative to a target (name, condition) pair:
/// type 1 keeps both, type 2 keeps the name only, type 3 the condition only,
/// type 4 is unrelated. Phrasing is a random family member.
VictimRequest make_victim_request(const ParaphraseFamily& family, VictimType type, const std::string& name,
                                  const std::string& condition, std::mt19937_64& rng);

/// The five requests of one round: types 1, 2, 3, 4, 4.
std::vector<VictimRequest> make_victim_mix(const ParaphraseFamily& family, const std::string& name,
                                           const std::string& condition, std::mt19937_64& rng);

/// Sentences carrying names, emails, phone numbers, card numbers and IPv4
/// addresses, for anonymiser round-trip checks.
std::vector<std::string> pii_sentences(std::size_t count, std::uint64_t seed);

/// Semantically unrelated flood request built from the filler lexicon.
std::string filler_request(std::mt19937_64& rng, std::size_t words = 12);

}  // namespace cacheleak
