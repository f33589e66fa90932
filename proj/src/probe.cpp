#include "cacheleak/probe.hpp"

#include "cacheleak/csv.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace cacheleak {

std::string_view decision_label(Decision d) { return d == Decision::hit ? "hit" : "miss"; }

void VoteConfig::validate() const {
  if (n < 1 || k < 1 || k > n) throw std::invalid_argument("vote config needs 1 <= k <= n");
}

std::string miss_reference(std::string_view text, std::size_t count) {
  std::string out(text);
  for (std::size_t i = 0; i < count; ++i) {
    if (!out.empty()) out += ' ';
    out += kRareToken;
  }
  return out;
}

Millis measure_ttft(ServingClient& client, const std::string& prompt) {
  return time_to_first_token(client.send(ChatRequest::direct(prompt, 1)));
}

TimingSample measure_pair(ServingClient& client, const std::string& target, const std::string& miss_ref) {
  TimingSample s;
  s.ttft_target = measure_ttft(client, target);
  s.ttft_miss_ref = measure_ttft(client, miss_ref);
  s.delta = s.ttft_target - s.ttft_miss_ref;
  return s;
}

Decision classify_single(const TimingSample& sample, Millis theta) {
  return sample.delta < theta ? Decision::hit : Decision::miss;
}

Decision vote_decision(const std::vector<Decision>& decisions, int k) {
  const auto hits = std::count(decisions.begin(), decisions.end(), Decision::hit);
  return hits >= k ? Decision::hit : Decision::miss;
}

VoteResult vote(ServingClient& client, const std::string& target, const std::string& miss_ref,
                const VoteConfig& cfg, const BeforeSample& before_sample) {
  cfg.validate();
  VoteResult r;
  r.samples.reserve(static_cast<std::size_t>(cfg.n));
  for (int i = 0; i < cfg.n; ++i) {
    if (before_sample) before_sample(i);
    r.samples.push_back(measure_pair(client, target, miss_ref));
    r.queries += 2;
    r.sample_decisions.push_back(classify_single(r.samples.back(), cfg.theta));
    if (r.sample_decisions.back() == Decision::hit) ++r.hits;
  }
  r.decision = r.hits >= cfg.k ? Decision::hit : Decision::miss;
  return r;
}

RatePoint rates_at(const std::vector<double>& hit_deltas, const std::vector<double>& miss_deltas, double theta) {
  RatePoint p;
  if (!hit_deltas.empty())
    p.tpr = static_cast<double>(std::count_if(hit_deltas.begin(), hit_deltas.end(), [&](double d) { return d < theta; })) /
            static_cast<double>(hit_deltas.size());
  if (!miss_deltas.empty())
    p.fpr = static_cast<double>(std::count_if(miss_deltas.begin(), miss_deltas.end(), [&](double d) { return d < theta; })) /
            static_cast<double>(miss_deltas.size());
  return p;
}

double youden_threshold(std::vector<double> hit, std::vector<double> miss) {
  if (hit.empty() || miss.empty()) throw std::invalid_argument("youden_threshold needs both hit and miss samples");
  std::sort(hit.begin(), hit.end());
  std::sort(miss.begin(), miss.end());
  std::vector<double> pooled;
  pooled.reserve(hit.size() + miss.size());
  std::merge(hit.begin(), hit.end(), miss.begin(), miss.end(), std::back_inserter(pooled));
  pooled.erase(std::unique(pooled.begin(), pooled.end()), pooled.end());

  // Sweep upward; rates of `delta < theta` only change at sample values.
  double best_theta = pooled.front();
  double best = -1.0;
  std::size_t hi = 0, mi = 0;
  for (std::size_t i = 0; i + 1 <= pooled.size(); ++i) {
    const double theta = i + 1 < pooled.size() ? 0.5 * (pooled[i] + pooled[i + 1]) : pooled[i] + 1.0;
    while (hi < hit.size() && hit[hi] < theta) ++hi;
    while (mi < miss.size() && miss[mi] < theta) ++mi;
    const double j = static_cast<double>(hi) / static_cast<double>(hit.size()) -
                     static_cast<double>(mi) / static_cast<double>(miss.size());
    if (j > best) {
      best = j;
      best_theta = theta;
    }
  }
  return best_theta;
}

double fpr_threshold(std::vector<double> miss, double target_fpr) {
  if (miss.empty()) throw std::invalid_argument("fpr_threshold needs miss samples");
  if (!(target_fpr > 0.0 && target_fpr < 1.0)) throw std::invalid_argument("target_fpr must be in (0,1)");
  std::sort(miss.begin(), miss.end());
  const auto below = static_cast<std::size_t>(std::floor(target_fpr * static_cast<double>(miss.size())));
  if (below == 0) return miss.front() - 1.0;
  if (below >= miss.size()) return miss.back() + 1.0;
  return 0.5 * (miss[below - 1] + miss[below]);
}

SampleCsv::SampleCsv(std::ostream& out) : out_(out) {
  out_ << "position,guess_token,sample_idx,ttft_target_ms,ttft_ref_ms,delta_ms,decision\n";
}

void SampleCsv::write(std::size_t position, const std::string& guess, const VoteResult& vote) {
  for (std::size_t i = 0; i < vote.samples.size(); ++i) {
    const auto& s = vote.samples[i];
    out_ << position << ',' << csv_field(guess) << ',' << i << ',' << fmt_num(s.ttft_target.count()) << ','
         << fmt_num(s.ttft_miss_ref.count()) << ',' << fmt_num(s.delta.count()) << ','
         << decision_label(vote.sample_decisions[i]) << '\n';
  }
}

}  // namespace cacheleak
