#include "cacheleak/attribute_corpus.hpp"

#include <cctype>
#include <map>

namespace cacheleak {

const std::vector<std::string>& person_names() {
  static const std::vector<std::string> kNames = {
      "Alice Johnson", "Brian Miller",  "Carla Mendes",   "David Okafor",   "Elena Petrova",
      "Farid Haddad",  "Grace Liu",     "Hiroshi Tanaka", "Isabel Moreno",  "Jonas Becker",
      "Kavya Reddy",   "Liam O'Brien",  "Maria Rossi",    "Noah Williams",  "Olga Ivanova",
      "Pedro Alvarez", "Quinn Harper",  "Rosa Jimenez",   "Samuel Osei",    "Tara Nguyen",
  };
  return kNames;
}

const std::vector<std::string>& medical_conditions() {
  static const std::vector<std::string> kConditions = {
      "asthma",          "diabetes",          "hypertension",   "migraine",         "arthritis",
      "pneumonia",       "epilepsy",          "anemia",         "psoriasis",        "glaucoma",
      "acute bronchitis", "atopic eczema",    "chronic insomnia", "pulmonary tuberculosis", "viral hepatitis",
      "systemic lupus",  "recurrent gout",    "sinus infection", "heart disease",    "kidney stones",
  };
  return kConditions;
}

const std::vector<std::string>& unrelated_requests() {
  static const std::vector<std::string> kRequests = {
      "Recommend three novels to read on a long train journey.",
      "Explain how compound interest works with a simple example.",
      "Write a short poem about autumn leaves falling in the park.",
      "Suggest a weekend itinerary for a first visit to Lisbon.",
      "Translate the phrase good morning everyone into Spanish and German.",
      "Give me a recipe for a vegetarian lasagna that serves six people.",
      "What are the rules of chess castling and when is it allowed?",
      "Summarize the plot of a classic detective story in five sentences.",
      "List some tips for improving my sleep schedule during exam season.",
      "How do I change a flat tire on a bicycle?",
      "Draft a polite email asking my landlord to fix the kitchen sink.",
      "Explain the difference between weather and climate to a child.",
      "Suggest names for a small bakery that sells sourdough bread.",
      "What should I pack for a three day hiking trip in the mountains?",
      "Write a product description for a stainless steel water bottle.",
      "Give me five ideas for a team building activity at the office.",
      "How can I start learning to play the guitar as an adult?",
      "Explain what a binary search tree is and why it is useful.",
      "Plan a birthday party for a seven year old who loves dinosaurs.",
      "Compare electric cars and hybrid cars for daily commuting.",
      "Write a thank you note to a colleague who helped with a project.",
      "Describe how to grow tomatoes on a small apartment balcony.",
      "What are good stretching exercises after a long run?",
      "Create a monthly budget template for a university student.",
      "Suggest a playlist of relaxing jazz songs for a rainy evening.",
      "Explain how vaccines train the immune system in simple terms.",
      "Write a cover letter opening for a junior software developer role.",
      "How do I remove a red wine stain from a cotton shirt?",
      "Give me a short history of the printing press.",
      "Recommend board games that work well for four players.",
  };
  return kRequests;
}

namespace {

// Interchangeable phrasings for each part of the request.
const std::map<std::string, std::vector<std::string>>& parts() {
  static const std::map<std::string, std::vector<std::string>> kParts = {
      {"V", {"Compose", "Draft", "Write", "Prepare", "Create"}},
      {"O", {"a meeting agenda", "an agenda", "a meeting outline"}},
      {"G", {"for an interdisciplinary team", "for a multidisciplinary team", "for the care team"}},
      {"D", {"discussing", "to discuss", "reviewing"}},
      {"P", {"the treatment plan", "the care plan", "the treatment options"}},
      {"A", {"for [name] with [condition]", "for [name] who has [condition]", "of [name] with [condition]"}},
  };
  return kParts;
}

// Clause orders. Upper-case letters name parts; anything else is literal.
const std::vector<std::string>& frames() {
  static const std::vector<std::string> kFrames = {
      "V O G D P A.",
      "V O G D P A, including next steps.",
  };
  return kFrames;
}

std::string capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

void expand(const std::string& frame, std::size_t at, std::string acc, std::vector<std::string>& out) {
  if (at == frame.size()) {
    out.push_back(capitalize(std::move(acc)));
    return;
  }
  const char c = frame[at];
  auto it = parts().find(std::string(1, c));
  if (it == parts().end()) {
    acc += c;
    expand(frame, at + 1, std::move(acc), out);
    return;
  }
  for (const auto& option : it->second) expand(frame, at + 1, acc + option, out);
}

}  // namespace

ParaphraseFamily::ParaphraseFamily() {
  std::vector<std::string> texts;
  for (const auto& f : frames()) expand(f, 0, {}, texts);
  members_.reserve(texts.size());
  for (auto& t : texts) members_.emplace_back(std::move(t));
}

std::string ParaphraseFamily::render(std::size_t member, const std::string& name, const std::string& condition) const {
  return instantiate(members_.at(member), {{"name", name}, {"condition", condition}});
}

ParaphraseFamily ParaphraseFamily::filtered(const EmbeddingConfig& embedding, double threshold) const {
  const auto& name = person_names().front();
  const auto& condition = medical_conditions().front();
  const auto anchor = cacheleak::embed(render(0, name, condition), embedding);
  std::vector<SlotTemplate> kept{members_.front()};
  for (std::size_t i = 1; i < members_.size(); ++i)
    if (cosine(cacheleak::embed(render(i, name, condition), embedding), anchor) >= threshold) kept.push_back(members_[i]);
  return ParaphraseFamily(std::move(kept));
}

std::string_view victim_type_label(VictimType t) {
  switch (t) {
    case VictimType::type1: return "type1";
    case VictimType::type2: return "type2";
    case VictimType::type3: return "type3";
    case VictimType::type4: return "type4";
  }
  return "?";
}

namespace {

const std::string& pick_other(const std::vector<std::string>& pool, const std::string& avoid, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> d(0, pool.size() - 1);
  while (true) {
    const auto& s = pool[d(rng)];
    if (s != avoid) return s;
  }
}

}  // namespace

VictimRequest make_victim_request(const ParaphraseFamily& family, VictimType type, const std::string& name,
                                  const std::string& condition, std::mt19937_64& rng) {
  VictimRequest r;
  r.type = type;
  if (type == VictimType::type4) {
    const auto& pool = unrelated_requests();
    r.text = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
    return r;
  }
  r.name = type == VictimType::type3 ? pick_other(person_names(), name, rng) : name;
  r.condition = type == VictimType::type2 ? pick_other(medical_conditions(), condition, rng) : condition;
  const auto member = std::uniform_int_distribution<std::size_t>(0, family.size() - 1)(rng);
  r.text = family.render(member, r.name, r.condition);
  return r;
}

std::vector<VictimRequest> make_victim_mix(const ParaphraseFamily& family, const std::string& name,
                                           const std::string& condition, std::mt19937_64& rng) {
  std::vector<VictimRequest> mix;
  for (auto t : {VictimType::type1, VictimType::type2, VictimType::type3, VictimType::type4, VictimType::type4})
    mix.push_back(make_victim_request(family, t, name, condition, rng));
  return mix;
}

std::string filler_request(std::mt19937_64& rng, std::size_t words) {
  const auto& lex = filler_lexicon();
  std::uniform_int_distribution<std::size_t> pick(0, lex.size() - 1);
  std::string out;
  for (std::size_t i = 0; i < words; ++i) {
    if (i) out += ' ';
    out += lex[pick(rng)];
  }
  return out;
}

std::vector<std::string> pii_sentences(std::size_t count, std::uint64_t seed) {
  static const std::vector<SlotTemplate> kTemplates = {
      SlotTemplate("Please email [name] at [email] about the overdue invoice."),
      SlotTemplate("Call [name] on [phone] before noon tomorrow."),
      SlotTemplate("Charge the card [card] for the order placed by [name]."),
      SlotTemplate("The login from [ip] was made with the account of [name]."),
      SlotTemplate("Forward the report to [email] and copy [name]."),
      SlotTemplate("[name] asked us to update the phone number to [phone]."),
      SlotTemplate("Block traffic from [ip] until [name] confirms the change."),
      SlotTemplate("Refund [name] on card [card] and send a receipt to [email]."),
      SlotTemplate("Meeting notes: [name] will follow up with the vendor."),
      SlotTemplate("No personal details are included in this sentence."),
  };
  std::mt19937_64 rng(seed);
  auto digits = [&](std::size_t n) {
    std::string s;
    for (std::size_t i = 0; i < n; ++i) s += static_cast<char>('0' + std::uniform_int_distribution<int>(0, 9)(rng));
    return s;
  };
  auto octet = [&] { return std::to_string(std::uniform_int_distribution<int>(1, 254)(rng)); };
  const auto& names = person_names();
  std::vector<std::string> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto& tmpl = kTemplates[std::uniform_int_distribution<std::size_t>(0, kTemplates.size() - 1)(rng)];
    const std::string& name = names[std::uniform_int_distribution<std::size_t>(0, names.size() - 1)(rng)];
    std::string user;
    for (char c : name)
      if (std::isalpha(static_cast<unsigned char>(c))) user += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    std::map<std::string, std::string> b = {
        {"name", name},
        {"email", user + "@example.org"},
        {"phone", digits(3) + "-" + digits(3) + "-" + digits(4)},
        {"card", digits(4) + " " + digits(4) + " " + digits(4) + " " + digits(4)},
        {"ip", octet() + "." + octet() + "." + octet() + "." + octet()},
    };
    out.push_back(instantiate(tmpl, b));
  }
  return out;
}

}  // namespace cacheleak
