#include "cacheleak/pna.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <numeric>
#include <ostream>

#include "cacheleak/csv.hpp"
#include "cacheleak/kernels.hpp"

namespace cacheleak {

ProbeCandidate make_candidate(std::string text, const EmbeddingConfig& cfg, std::size_t member) {
  ProbeCandidate c;
  c.embedding = embed(text, cfg);
  c.text = std::move(text);
  c.member = member;
  return c;
}

std::vector<ProbeCandidate> rank_representative(std::vector<ProbeCandidate> candidates) {
  if (candidates.size() < 2) throw TooFewCandidates();
  const std::size_t dim = candidates.front().embedding.values.size();
  std::vector<double> points;
  points.reserve(candidates.size() * dim);
  for (const auto& c : candidates) {
    if (c.embedding.values.size() != dim) throw std::invalid_argument("candidate embeddings differ in dimension");
    points.insert(points.end(), c.embedding.values.begin(), c.embedding.values.end());
  }
  const auto means = kernels::mean_pairwise_l2_parallel(points, dim, candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) candidates[i].representativeness = means[i];
  std::sort(candidates.begin(), candidates.end(), [](const ProbeCandidate& a, const ProbeCandidate& b) {
    if (a.representativeness != b.representativeness) return a.representativeness < b.representativeness;
    return a.text < b.text;
  });
  return candidates;
}

void GreedyConfig::validate() const {
  if (!(sigma_budget > 0.0 && sigma_budget < 1.0)) throw std::invalid_argument("sigma_budget must be in (0,1)");
}

FprEstimator additive_fpr(std::function<double(const ProbeCandidate&)> per_probe) {
  return [per_probe = std::move(per_probe)](const std::vector<const ProbeCandidate*>& probes) {
    double total = 0.0;
    for (const auto* p : probes) total += per_probe(*p);
    return total;
  };
}

FprEstimator empirical_union_fpr(std::vector<Embedding> held_out, double threshold) {
  return [held_out = std::move(held_out), threshold](const std::vector<const ProbeCandidate*>& probes) {
    if (held_out.empty()) return 0.0;
    std::size_t hits = 0;
    for (const auto& neg : held_out)
      if (std::any_of(probes.begin(), probes.end(),
                      [&](const ProbeCandidate* p) { return cosine(p->embedding, neg) >= threshold; }))
        ++hits;
    return static_cast<double>(hits) / static_cast<double>(held_out.size());
  };
}

FprEstimator paired_union_fpr(const ParaphraseFamily& family, const EmbeddingConfig& embedding,
                              std::vector<PairedNegative> held_out, double threshold) {
  // Renderings are memoised per (member, negative); the greedy walk asks
  // about growing prefixes of the same probe set.
  auto cache = std::make_shared<std::map<std::pair<std::size_t, std::size_t>, bool>>();
  return [&family, embedding, held_out = std::move(held_out), threshold,
          cache](const std::vector<const ProbeCandidate*>& probes) {
    if (held_out.empty()) return 0.0;
    auto matches = [&](const ProbeCandidate& p, std::size_t i) {
      if (p.member >= family.size()) return cosine(p.embedding, held_out[i].embedding) >= threshold;
      const auto key = std::make_pair(p.member, i);
      auto it = cache->find(key);
      if (it == cache->end()) {
        const auto e = embed(family.render(p.member, held_out[i].name, held_out[i].condition), embedding);
        it = cache->emplace(key, cosine(e, held_out[i].embedding) >= threshold).first;
      }
      return it->second;
    };
    std::size_t hits = 0;
    for (std::size_t i = 0; i < held_out.size(); ++i)
      if (std::any_of(probes.begin(), probes.end(), [&](const ProbeCandidate* p) { return matches(*p, i); })) ++hits;
    return static_cast<double>(hits) / static_cast<double>(held_out.size());
  };
}

std::vector<ProbeCandidate> greedy_select(const std::vector<ProbeCandidate>& ranked, const GreedyConfig& cfg,
                                          const FprEstimator& fpr) {
  cfg.validate();
  std::vector<ProbeCandidate> selected;
  std::vector<const ProbeCandidate*> trial;
  for (const auto& cand : ranked) {
    if (selected.size() >= cfg.max_probes) break;
    const bool distinct = std::all_of(selected.begin(), selected.end(), [&](const ProbeCandidate& s) {
      return l2_distance(s.embedding, cand.embedding) >= cfg.orthogonality_min_distance;
    });
    if (!distinct) continue;
    trial.clear();
    for (const auto& s : selected) trial.push_back(&s);
    trial.push_back(&cand);
    if (fpr && fpr(trial) > cfg.sigma_budget) break;
    selected.push_back(cand);
  }
  return selected;
}

void FloodEvictor::evict(ServingClient& client) {
  for (std::size_t i = 0; i < count_; ++i) client.send(ChatRequest::direct(filler_request(rng_), 1));
  sent_ += count_;
}

double PnaResult::rate(VictimType type, std::size_t probe_count) const {
  if (probe_count == 0) return 0.0;
  const auto& [pos, trials] = counts.at(probe_count - 1)[static_cast<std::size_t>(type) - 1];
  return trials == 0 ? 0.0 : static_cast<double>(pos) / static_cast<double>(trials);
}

PnaResult run_rounds(ServingClient& attacker, ServingClient& victim, const ParaphraseFamily& family,
                     const std::vector<std::size_t>& probe_members, const PnaRunConfig& cfg, Evictor& evictor) {
  PnaResult result;
  result.max_probes = probe_members.size();
  result.counts.assign(probe_members.size(), {});
  std::mt19937_64 rng(cfg.seed);
  const auto& names = person_names();
  const auto& conditions = medical_conditions();

  for (std::size_t round = 0; round < cfg.rounds; ++round) {
    const auto& name = names[std::uniform_int_distribution<std::size_t>(0, names.size() - 1)(rng)];
    const auto& condition = conditions[std::uniform_int_distribution<std::size_t>(0, conditions.size() - 1)(rng)];
    const auto mix = make_victim_mix(family, name, condition, rng);
    std::vector<PnaRoundRecord> pending;
    try {
      for (const auto& req : mix) {
        evictor.evict(attacker);
        victim.send(ChatRequest::direct(req.text, 1));
        bool any_hit = false;
        for (std::size_t p = 0; p < probe_members.size(); ++p) {
          auto probe = ChatRequest::direct(family.render(probe_members[p], name, condition), 1);
          probe.cache_store = !cfg.read_only_probes;
          if (time_to_first_token(attacker.send(probe)) < cfg.threshold) any_hit = true;
          pending.push_back({round, req.type, p + 1, any_hit ? Decision::hit : Decision::miss,
                             req.type == VictimType::type1});
        }
      }
    } catch (const TransportError&) {
      ++result.discarded_rounds;
      continue;
    }
    for (const auto& r : pending) {
      auto& cell = result.counts[r.probe_count - 1][static_cast<std::size_t>(r.victim_type) - 1];
      ++cell.second;
      if (r.decision == Decision::hit) ++cell.first;
      result.records.push_back(r);
    }
  }
  return result;
}

void write_pna_rounds_csv(std::ostream& out, const PnaResult& result) {
  out << "round,victim_type,probe_count,decision,truth\n";
  for (const auto& r : result.records)
    out << r.round << ',' << victim_type_label(r.victim_type) << ',' << r.probe_count << ','
        << decision_label(r.decision) << ',' << (r.truth ? 1 : 0) << '\n';
}

void write_pna_summary_csv(std::ostream& out, const PnaResult& result) {
  out << "probe_count,tpr_type1,fpr_type2,fpr_type3,fpr_type4\n";
  for (std::size_t c = 1; c <= result.max_probes; ++c)
    out << c << ',' << fmt_num(result.rate(VictimType::type1, c), 4) << ','
        << fmt_num(result.rate(VictimType::type2, c), 4) << ',' << fmt_num(result.rate(VictimType::type3, c), 4)
        << ',' << fmt_num(result.rate(VictimType::type4, c), 4) << '\n';
}

ProbeSelection select_probes(const ParaphraseFamily& family, const EmbeddingConfig& embedding, double threshold,
                             const GreedyConfig& greedy, std::size_t pool_size, std::size_t held_out_size,
                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::string& name = person_names().front();
  const std::string& condition = medical_conditions().front();

  std::vector<std::size_t> members(family.size());
  std::iota(members.begin(), members.end(), 0);
  std::shuffle(members.begin(), members.end(), rng);
  members.resize(std::min(pool_size, members.size()));
  std::sort(members.begin(), members.end());

  std::vector<ProbeCandidate> pool;
  for (auto m : members) pool.push_back(make_candidate(family.render(m, name, condition), embedding, m));

  std::vector<PairedNegative> negatives;
  static constexpr VictimType kMixNegatives[] = {VictimType::type2, VictimType::type3, VictimType::type4,
                                                 VictimType::type4};
  const auto& names = person_names();
  const auto& conditions = medical_conditions();
  for (std::size_t i = 0; i < held_out_size; ++i) {
    const auto& n = names[std::uniform_int_distribution<std::size_t>(0, names.size() - 1)(rng)];
    const auto& c = conditions[std::uniform_int_distribution<std::size_t>(0, conditions.size() - 1)(rng)];
    negatives.push_back({n, c, embed(make_victim_request(family, kMixNegatives[i % 4], n, c, rng).text, embedding)});
  }

  ProbeSelection sel;
  sel.ranked = rank_representative(std::move(pool));
  auto estimator = paired_union_fpr(family, embedding, std::move(negatives), threshold);
  sel.selected = greedy_select(sel.ranked, greedy, estimator);
  std::vector<const ProbeCandidate*> prefix;
  for (const auto& s : sel.selected) {
    sel.members.push_back(s.member);
    prefix.push_back(&s);
    sel.cumulative_fpr.push_back(estimator(prefix));
  }
  return sel;
}

}  // namespace cacheleak
