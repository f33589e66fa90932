#pragma once

#include <functional>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "cacheleak/client.hpp"
#include "cacheleak/probe.hpp"

namespace cacheleak {

/// System prompt of the summarisation application.
inline constexpr std::string_view kSummarizeInstruction = "Summarize the following document in five sentences.";

/// Synthetic document of `tokens` random filler words.
std::string make_document(std::size_t tokens, std::mt19937_64& rng);

/// The application's request for a document (synthesized mode, document in
/// the user role).
ChatRequest summarize_request(const std::string& document);

/// Submits the document for summarisation; hit iff TTFT < threshold.
Decision document_probe(ServingClient& client, const std::string& document, Millis threshold);

struct DocumentProtocolConfig {
  std::size_t interested = 200;
  std::size_t victim_from_interested = 100;
  std::size_t victim_outside = 100;
  std::size_t repetitions = 5;
  std::vector<std::size_t> lengths = {12000, 18000, 24000};
  Millis threshold{2000.0};
  std::uint64_t seed = 1;
};

struct DocumentRepetition {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double accuracy() const;
  double tpr() const;
  double fpr() const;
};

struct DocumentResult {
  std::vector<DocumentRepetition> repetitions;
  /// (ttft_ms, cached) for every probe, for ROC plots.
  std::vector<std::pair<double, bool>> probes;
  double mean_accuracy() const;
  double mean_fpr() const;
};

/// Per repetition: `reset` clears the service (cache expiry between runs),
/// the victim submits `victim_from_interested` documents of the interested
/// set and `victim_outside` others, then the attacker probes every
/// interested document once.
DocumentResult run_document_protocol(ServingClient& attacker, ServingClient& victim,
                                     const DocumentProtocolConfig& cfg, const std::function<void()>& reset);

/// repetition,tp,fp,tn,fn,accuracy,tpr,fpr
void write_document_csv(std::ostream& out, const DocumentResult& result);

}  // namespace cacheleak
