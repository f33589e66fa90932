#include "cacheleak/documents.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

#include "cacheleak/corpus.hpp"
#include "cacheleak/csv.hpp"

namespace cacheleak {

std::string make_document(std::size_t tokens, std::mt19937_64& rng) {
  const auto& lex = filler_lexicon();
  std::uniform_int_distribution<std::size_t> pick(0, lex.size() - 1);
  std::string out;
  out.reserve(tokens * 8);
  for (std::size_t i = 0; i < tokens; ++i) {
    if (i) out += ' ';
    out += lex[pick(rng)];
  }
  return out;
}

ChatRequest summarize_request(const std::string& document) {
  return ChatRequest::synthesized(std::string(kSummarizeInstruction), document, 1);
}

Decision document_probe(ServingClient& client, const std::string& document, Millis threshold) {
  return time_to_first_token(client.send(summarize_request(document))) < threshold ? Decision::hit : Decision::miss;
}

double DocumentRepetition::accuracy() const {
  const auto total = tp + fp + tn + fn;
  return total == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(total);
}
double DocumentRepetition::tpr() const { return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn); }
double DocumentRepetition::fpr() const { return fp + tn == 0 ? 0.0 : static_cast<double>(fp) / static_cast<double>(fp + tn); }

double DocumentResult::mean_accuracy() const {
  if (repetitions.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : repetitions) s += r.accuracy();
  return s / static_cast<double>(repetitions.size());
}

double DocumentResult::mean_fpr() const {
  if (repetitions.empty()) return 0.0;
  double s = 0.0;
  for (const auto& r : repetitions) s += r.fpr();
  return s / static_cast<double>(repetitions.size());
}

DocumentResult run_document_protocol(ServingClient& attacker, ServingClient& victim,
                                     const DocumentProtocolConfig& cfg, const std::function<void()>& reset) {
  if (cfg.victim_from_interested > cfg.interested)
    throw std::invalid_argument("document protocol: victim cannot submit more interested documents than exist");
  if (cfg.lengths.empty()) throw std::invalid_argument("document protocol: no document lengths");
  std::mt19937_64 rng(cfg.seed);
  auto length_of = [&](std::size_t i) { return cfg.lengths[i % cfg.lengths.size()]; };

  std::vector<std::string> interested;
  for (std::size_t i = 0; i < cfg.interested; ++i) interested.push_back(make_document(length_of(i), rng));

  DocumentResult result;
  for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
    if (reset) reset();
    std::vector<std::size_t> order(cfg.interested);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<bool> submitted(cfg.interested, false);
    for (std::size_t i = 0; i < cfg.victim_from_interested; ++i) {
      submitted[order[i]] = true;
      victim.send(summarize_request(interested[order[i]]));
    }
    for (std::size_t i = 0; i < cfg.victim_outside; ++i) victim.send(summarize_request(make_document(length_of(i), rng)));

    DocumentRepetition r;
    for (std::size_t i = 0; i < cfg.interested; ++i) {
      const Millis t = time_to_first_token(attacker.send(summarize_request(interested[i])));
      const bool hit = t < cfg.threshold;
      result.probes.emplace_back(t.count(), submitted[i]);
      if (submitted[i])
        ++(hit ? r.tp : r.fn);
      else
        ++(hit ? r.fp : r.tn);
    }
    result.repetitions.push_back(r);
  }
  return result;
}

void write_document_csv(std::ostream& out, const DocumentResult& result) {
  out << "repetition,tp,fp,tn,fn,accuracy,tpr,fpr\n";
  for (std::size_t i = 0; i < result.repetitions.size(); ++i) {
    const auto& r = result.repetitions[i];
    out << i << ',' << r.tp << ',' << r.fp << ',' << r.tn << ',' << r.fn << ',' << fmt_num(r.accuracy(), 4) << ','
        << fmt_num(r.tpr(), 4) << ',' << fmt_num(r.fpr(), 4) << '\n';
  }
}

}  // namespace cacheleak
