#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace cacheleak {

enum class PiiKind { name, email, phone, credit_card, ip_address };

std::string_view pii_kind_label(PiiKind kind);

struct PiiSpan {
  std::size_t start = 0;  // byte offsets into the input
  std::size_t end = 0;
  PiiKind kind = PiiKind::name;
  std::string surface;

  bool operator==(const PiiSpan&) const = default;
};

/// Identifier (e.g. "⟨NAME_1⟩") -> original surface string.
using RestoreMap = std::map<std::string, std::string>;

struct Anonymized {
  std::string text;
  RestoreMap map;
};

struct Restored {
  std::string text;
  /// Identifier-shaped substrings that had no entry in the map; left intact.
  std::vector<std::string> unknown_identifiers;
};

/// Rule-based PII pre/post-processor placed in front of the semantic cache.
/// Emails, phone numbers, card numbers and IPv4 addresses are found by
/// pattern; names by whole-word gazetteer match (longest entry wins).
class Anonymizer {
 public:
  explicit Anonymizer(std::vector<std::string> name_gazetteer = {});

  /// Non-overlapping spans sorted by start.
  std::vector<PiiSpan> detect_pii(std::string_view text) const;

  /// Replaces spans left to right with kind-numbered identifiers. A surface
  /// string seen twice reuses its identifier, keeping the map bijective.
  Anonymized anonymize(std::string_view text) const;

  static Restored restore(std::string_view response, const RestoreMap& map);

  static std::string make_identifier(PiiKind kind, std::size_t n);

 private:
  std::vector<std::string> names_;  // longest first
};

}  // namespace cacheleak
