#include "cacheleak/ksweep.hpp"

#include <algorithm>
#include <ostream>

#include <boost/math/distributions/normal.hpp>

#include "cacheleak/csv.hpp"

namespace cacheleak {

void KSweepConfig::validate() const {
  if (k_values.empty()) throw std::invalid_argument("ksweep: no K values");
  if (std::any_of(k_values.begin(), k_values.end(), [](std::size_t k) { return k == 0; }))
    throw std::invalid_argument("ksweep: K must be positive");
}

VoteConfig ksweep_vote(std::size_t k_gran, Millis theta) {
  VoteConfig v;
  const long n = 10 - 2 * (static_cast<long>(k_gran) - 1);
  v.n = static_cast<int>(std::max(2L, n));
  v.k = (v.n + 1) / 2;
  v.theta = theta;
  return v;
}

SimulatedClassifier ksweep_rates(const KSweepConfig& cfg, std::size_t k_gran) {
  if (auto it = cfg.rates.find(k_gran); it != cfg.rates.end()) return it->second;
  const boost::math::normal_distribution<double> std_normal;
  const double z_hit = boost::math::quantile(std_normal, cfg.base_rates.tpr);
  const double z_miss = boost::math::quantile(std_normal, 1.0 - cfg.base_rates.fpr);
  const double k = static_cast<double>(k_gran);
  return {boost::math::cdf(std_normal, z_hit * k), 1.0 - boost::math::cdf(std_normal, z_miss * k)};
}

std::vector<KSweepRow> run_ksweep(const KSweepConfig& cfg, const KSweepInputs& inputs) {
  cfg.validate();
  std::vector<KSweepRow> rows;
  for (std::size_t k_gran : cfg.k_values) {
    PsaConfig psa = cfg.psa;
    psa.granularity = k_gran;
    psa.vote = ksweep_vote(k_gran, cfg.psa.vote.theta);
    psa.on_exhausted = ExhaustedPolicy::reveal;
    if (cfg.simulate_classifier)
      psa.simulate = ksweep_rates(cfg, k_gran);
    else
      psa.simulate.reset();

    EngineConfig ec = inputs.engine;
    ec.kv.granularity = k_gran;
    Engine engine(ec);
    KSweepRow row;
    row.k = k_gran;
    row.vote_n = psa.vote.n;
    row.vote_k = psa.vote.k;
    std::size_t recovered_queries = 0, correct = 0;
    for (std::size_t v = 0; v < inputs.victims.size(); ++v) {
      const std::size_t idx = inputs.victims[v];
      engine.admin_flush(FlushTarget::both);
      InProcessClient client(engine, cfg.seed ^ (0x9e3779b97f4a7c15ULL * (idx + 1)));
      const auto target = make_psa_target(inputs.corpus, idx, ec.prompt_template, inputs.user_text);
      const auto trace = recover_prompt(client, target, inputs.predictor, inputs.corpus.vocab, psa,
                                        cfg.seed + 7919 * idx + k_gran);
      row.tokens_attempted += trace.tokens_attempted;
      row.tokens_recovered += trace.tokens_recovered;
      row.total_queries += trace.total_queries;
      recovered_queries += trace.recovered_position_queries;
      correct += trace.tokens_correct;
    }
    auto ratio = [](double a, double b) { return b == 0.0 ? 0.0 : a / b; };
    const double rec = static_cast<double>(row.tokens_recovered);
    row.recovery_rate = ratio(rec, static_cast<double>(row.tokens_attempted));
    row.accuracy = ratio(static_cast<double>(correct), rec);
    row.queries_per_recovered_token = ratio(static_cast<double>(recovered_queries), rec);
    row.queries_per_token = ratio(static_cast<double>(row.total_queries), rec);
    rows.push_back(row);
  }
  return rows;
}

void write_ksweep_csv(std::ostream& out, const std::vector<KSweepRow>& rows) {
  out << "k,vote_n,vote_k,recovery_rate,accuracy,queries_per_recovered_token,queries_per_token\n";
  for (const auto& r : rows)
    out << r.k << ',' << r.vote_n << ',' << r.vote_k << ',' << fmt_num(r.recovery_rate, 4) << ','
        << fmt_num(r.accuracy, 4) << ',' << fmt_num(r.queries_per_recovered_token, 2) << ','
        << fmt_num(r.queries_per_token, 2) << '\n';
}

}  // namespace cacheleak
