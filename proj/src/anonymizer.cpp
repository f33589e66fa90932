#include "cacheleak/anonymizer.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

namespace cacheleak {

namespace {

// U+27E8 / U+27E9 mathematical angle brackets.
constexpr std::string_view kOpen = "\xE2\x9F\xA8";
constexpr std::string_view kClose = "\xE2\x9F\xA9";

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

bool valid_ipv4(const std::string& s) {
  std::size_t pos = 0;
  for (int part = 0; part < 4; ++part) {
    auto dot = s.find('.', pos);
    auto octet = s.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (octet.empty() || octet.size() > 3 || std::stoi(octet) > 255) return false;
    pos = dot + 1;
  }
  return true;
}

struct Pattern {
  PiiKind kind;
  std::regex re;
};

const std::vector<Pattern>& patterns() {
  static const std::vector<Pattern> kPatterns = {
      {PiiKind::email, std::regex(R"([A-Za-z0-9._%+-]+@[A-Za-z0-9-]+(\.[A-Za-z0-9-]+)*\.[A-Za-z]{2,})")},
      {PiiKind::credit_card, std::regex(R"(\b\d{4}([ -]?)\d{4}\1\d{4}\1\d{4}\b)")},
      {PiiKind::ip_address, std::regex(R"(\b\d{1,3}\.\d{1,3}\.\d{1,3}\.\d{1,3}\b)")},
      {PiiKind::phone, std::regex(R"((\+\d{1,2}[ -]?)?(\(\d{3}\)|\b\d{3})[ -.]?\d{3}[ -.]?\d{4}\b)")},
  };
  return kPatterns;
}

}  // namespace

std::string_view pii_kind_label(PiiKind kind) {
  switch (kind) {
    case PiiKind::name: return "NAME";
    case PiiKind::email: return "EMAIL";
    case PiiKind::phone: return "PHONE";
    case PiiKind::credit_card: return "CREDIT_CARD";
    case PiiKind::ip_address: return "IP_ADDRESS";
  }
  return "PII";
}

std::string Anonymizer::make_identifier(PiiKind kind, std::size_t n) {
  std::string id(kOpen);
  id += pii_kind_label(kind);
  id += '_';
  id += std::to_string(n);
  id += kClose;
  return id;
}

Anonymizer::Anonymizer(std::vector<std::string> name_gazetteer) : names_(std::move(name_gazetteer)) {
  std::erase_if(names_, [](const std::string& s) { return s.empty(); });
  std::sort(names_.begin(), names_.end(), [](const auto& a, const auto& b) {
    return a.size() != b.size() ? a.size() > b.size() : a < b;
  });
  names_.erase(std::unique(names_.begin(), names_.end()), names_.end());
}

std::vector<PiiSpan> Anonymizer::detect_pii(std::string_view text) const {
  const std::string s(text);
  std::vector<PiiSpan> found;
  for (const auto& p : patterns()) {
    for (auto it = std::sregex_iterator(s.begin(), s.end(), p.re); it != std::sregex_iterator(); ++it) {
      auto start = static_cast<std::size_t>(it->position(0));
      auto len = static_cast<std::size_t>(it->length(0));
      std::string surface = it->str(0);
      if (p.kind == PiiKind::ip_address && !valid_ipv4(surface)) continue;
      found.push_back({start, start + len, p.kind, std::move(surface)});
    }
  }
  for (const auto& name : names_) {
    std::size_t pos = 0;
    while ((pos = s.find(name, pos)) != std::string::npos) {
      const std::size_t end = pos + name.size();
      const bool left_ok = pos == 0 || !is_word_char(s[pos - 1]);
      const bool right_ok = end == s.size() || !is_word_char(s[end]);
      if (left_ok && right_ok) found.push_back({pos, end, PiiKind::name, name});
      pos = end;
    }
  }
  // Earliest start wins; on equal starts the longer span wins.
  std::sort(found.begin(), found.end(), [](const PiiSpan& a, const PiiSpan& b) {
    if (a.start != b.start) return a.start < b.start;
    if (a.end != b.end) return a.end > b.end;
    return static_cast<int>(a.kind) < static_cast<int>(b.kind);
  });
  std::vector<PiiSpan> out;
  for (auto& span : found) {
    if (!out.empty() && span.start < out.back().end) continue;
    out.push_back(std::move(span));
  }
  return out;
}

Anonymized Anonymizer::anonymize(std::string_view text) const {
  Anonymized result;
  std::map<std::string, std::string> id_of_surface;
  std::map<PiiKind, std::size_t> counters;
  std::size_t pos = 0;
  for (const auto& span : detect_pii(text)) {
    result.text.append(text.substr(pos, span.start - pos));
    auto it = id_of_surface.find(span.surface);
    if (it == id_of_surface.end()) {
      auto id = make_identifier(span.kind, ++counters[span.kind]);
      it = id_of_surface.emplace(span.surface, id).first;
      result.map.emplace(id, span.surface);
    }
    result.text += it->second;
    pos = span.end;
  }
  result.text.append(text.substr(pos));
  return result;
}

Restored Anonymizer::restore(std::string_view response, const RestoreMap& map) {
  Restored out;
  std::size_t pos = 0;
  while (pos < response.size()) {
    auto open = response.find(kOpen, pos);
    if (open == std::string_view::npos) break;
    auto close = response.find(kClose, open + kOpen.size());
    if (close == std::string_view::npos) break;
    out.text.append(response.substr(pos, open - pos));
    std::string id(response.substr(open, close + kClose.size() - open));
    if (auto it = map.find(id); it != map.end()) {
      out.text += it->second;
    } else {
      out.text += id;
      out.unknown_identifiers.push_back(id);
    }
    pos = close + kClose.size();
  }
  out.text.append(response.substr(pos));
  return out;
}

}  // namespace cacheleak
