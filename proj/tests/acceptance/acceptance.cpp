// Acceptance gate. One PASS/FAIL line per criterion; exit status is the
// number of failures. Expected values come from brute-force or closed-form
// oracles computed here, never from the code under test.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <boost/math/distributions/binomial.hpp>

#include "cacheleak/config.hpp"
#include "cacheleak/csv.hpp"
#include "cacheleak/psa.hpp"
#include "cacheleak/scenarios.hpp"

using namespace cacheleak;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

fs::path g_out;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string failed_checks(const ScenarioReport& r) {
  std::string s;
  for (const auto& c : r.checks)
    if (!c.pass) s += " [failed: " + c.name + " " + c.detail + "]";
  return s;
}

ScenarioReport run(ExperimentConfig cfg, const std::string& scenario, const std::string& dir) {
  cfg.scenario = scenario;
  cfg.output_dir = (g_out / dir).string();
  return run_scenario(cfg);
}

std::size_t lcp(const TokenSeq& a, const TokenSeq& b) {
  std::size_t i = 0;
  while (i < a.size() && i < b.size() && a[i] == b[i]) ++i;
  return i;
}

// The longest common prefix with any member of a sorted set is attained at
// one of the two lexicographic neighbours of the query.
std::size_t oracle_match(const std::set<TokenSeq>& stored, const TokenSeq& q, std::size_t k) {
  std::size_t best = 0;
  auto it = stored.lower_bound(q);
  if (it != stored.end()) best = std::max(best, lcp(*it, q));
  if (it != stored.begin()) best = std::max(best, lcp(*std::prev(it), q));
  return best / k * k;
}

Verdict c1_prefix_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240601);
  std::size_t ops = 0, agree = 0, matches = 0, evicted = 0;
  for (std::size_t k : {1, 2, 3, 4}) {
    PrefixCache cache({k, std::size_t{1} << 40});
    std::set<TokenSeq> stored;
    std::vector<TokenSeq> pool;
    std::uniform_int_distribution<int> len(1, 32), tok(0, 7), coin(0, 1);
    for (int op = 0; op < 25000; ++op, ++ops) {
      TokenSeq s;
      if (!pool.empty() && coin(rng)) {
        s = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
        s.resize(std::uniform_int_distribution<std::size_t>(0, s.size())(rng));
      }
      for (int n = len(rng); n > 0; --n) s.push_back(static_cast<TokenId>(tok(rng)));
      if (coin(rng)) {
        cache.insert(s);
        stored.insert(TokenSeq(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(s.size() / k * k)));
        pool.push_back(s);
        ++agree;
      } else {
        ++matches;
        agree += cache.match_prefix(s).shared_len == oracle_match(stored, s, k);
      }
    }
    evicted += cache.evicted_tokens();
  }
  const double secs = seconds_since(t0);
  std::ostringstream d;
  d << ops << " ops (" << matches << " matches), " << (ops - agree) << " disagreements, evicted " << evicted
    << ", " << fmt_num(secs, 2) << " s";
  return {agree == ops && evicted == 0 && secs < 10.0, d.str()};
}

Verdict c2_affine_law() {
  EngineConfig ec;
  ec.latency.noise_sigma = Millis{0.0};
  Engine engine(ec);
  NoiseSource noise(1);
  const std::size_t len = 16;
  auto words = [](const std::string& stem, std::size_t from, std::size_t to) {
    std::string s;
    for (std::size_t i = from; i < to; ++i) s += (s.empty() ? "" : " ") + stem + std::to_string(i);
    return s;
  };
  engine.handle(ChatRequest::direct(words("base", 0, len)), noise);
  auto ttft = [&](const std::string& text) {
    return time_to_first_token(engine.handle(ChatRequest::direct(text), noise)).count();
  };
  const double gap = (ec.latency.t_miss_per_token - ec.latency.t_hit_per_token).count();
  bool ok = true;
  double worst = 0.0;
  for (std::size_t j : {1, 2, 4, 8}) {
    const std::string tag = "f" + std::to_string(j) + "_";
    const double none = ttft(words(tag + "a", 0, len));
    std::string shared = words("base", 0, j) + " " + words(tag + "b", j, len);
    const double measured = none - ttft(shared);
    const double want = static_cast<double>(j) * gap;
    const double rel = std::abs(measured - want) / want;
    worst = std::max(worst, rel);
    ok = ok && rel <= 1e-9;
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3e", worst);
  return {ok, std::string("j in {1,2,4,8}: worst relative error ") + buf + " (bound 1e-9)"};
}

double binomial_tail(int n, int k, double p) {
  boost::math::binomial_distribution<double> b(n, p);
  return boost::math::cdf(boost::math::complement(b, k - 1));
}

Verdict c3_vote_classifier() {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg;
  const auto r = run(cfg, "roc-kv", "c3_roc_kv");
  const double secs = seconds_since(t0);
  const auto& m = r.metrics;
  const double tpr = m.at("tpr"), fpr = m.at("fpr");
  const bool single = std::abs(tpr - 0.88) <= 0.03 && std::abs(fpr - 0.10) <= 0.03;
  const bool voted = m.at("vote_tpr") >= 0.99 && m.at("vote_fpr") <= 0.01;
  std::ostringstream d;
  d << "single " << fmt_num(tpr, 4) << "/" << fmt_num(fpr, 4) << ", vote " << fmt_num(m.at("vote_tpr"), 4) << "/"
    << fmt_num(m.at("vote_fpr"), 4) << " over " << cfg.roc.vote_trials << "+" << cfg.roc.vote_trials
    << " trials, binomial oracle at measured single rates " << fmt_num(binomial_tail(10, 5, tpr), 4) << "/"
    << fmt_num(binomial_tail(10, 5, fpr), 4) << ", " << fmt_num(secs, 1) << " s";
  return {single && voted && secs < 120.0, d.str()};
}

Verdict c4_psa() {
  auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg;
  const auto r = run(cfg, "psa", "c4_psa");
  const double secs = seconds_since(t0);
  const double acc = r.metrics.at("accuracy"), qprt = r.metrics.at("queries_per_recovered_token");

  t0 = std::chrono::steady_clock::now();
  ExperimentConfig quiet;
  quiet.calibrate_noise = false;
  quiet.latency.noise_sigma = Millis{0.0};
  const auto q = run(quiet, "psa", "c4_psa_sigma0");
  const double quiet_secs = seconds_since(t0);
  const double false_accepts = q.metrics.at("false_accepts");

  std::ostringstream d;
  d << r.metrics.at("victims") << " victims: accuracy " << fmt_num(acc, 4) << ", queries/recovered token "
    << fmt_num(qprt, 2) << " (" << fmt_num(secs, 1) << " s); sigma=0 with cross-verification: "
    << false_accepts << " false accepts (" << fmt_num(quiet_secs, 1) << " s)";
  const bool ok = acc >= 0.85 && qprt >= 50.0 && qprt <= 400.0 && false_accepts == 0.0 && quiet.psa.cross_verify &&
                  secs < 600.0 && quiet_secs < 600.0;
  return {ok, d.str()};
}

// Records the true cached-prefix length of the verification probe at the
// moment it reaches the engine.
class WatchingClient : public ServingClient {
 public:
  WatchingClient(Engine& engine, std::uint64_t seed) : engine_(engine), inner_(engine, seed) {}
  std::vector<StreamEvent> send(const ChatRequest& request) override {
    ++sent_;
    if (!watched_.empty() && request.mode == RequestMode::direct && request.messages.front().text == watched_) {
      observed_ = engine_.peek_shared_prefix(watched_);
      watched_.clear();
    }
    return inner_.send(request);
  }
  void watch(std::string text) {
    watched_ = std::move(text);
    observed_.reset();
  }
  std::optional<std::size_t> observed() const { return observed_; }

 private:
  Engine& engine_;
  InProcessClient inner_;
  std::string watched_;
  std::optional<std::size_t> observed_;
};

Verdict c5_eviction() {
  const ExperimentConfig cfg;
  const auto ec = engine_config(cfg);
  Engine engine(ec);
  const auto corpus = build_corpus(cfg.corpus, derive_seed(cfg.seed, "corpus"));
  InProcessClient victim(engine, 7);
  WatchingClient attacker(engine, 8);
  std::mt19937_64 rng(9);
  const double gap = ec.latency.per_token_gap().count();
  std::size_t evicted = 0, verified = 0, cached_before = 0;
  const std::size_t trials = 1000;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto idx = corpus.victim[t % corpus.victim.size()];
    const auto target = make_psa_target(corpus, idx, ec.prompt_template, cfg.psa.user_text);
    victim.send(target.trigger);
    const std::string probe = engine.render(target.trigger);
    cached_before += engine.peek_shared_prefix(probe) == split_words(probe).size();
    // A still-cached probe would read about n*gap faster than the reference.
    const Millis theta{-0.5 * gap * static_cast<double>(split_words(probe).size())};
    attacker.watch(probe);
    try {
      evict_kv_verified(attacker, {}, rng, probe, theta);
      ++verified;
    } catch (const EvictionIncomplete&) {
    }
    evicted += attacker.observed() && *attacker.observed() == 0;
  }
  std::ostringstream d;
  d << "capacity " << ec.kv.capacity_tokens << " tokens; victim cached " << cached_before << "/" << trials
    << ", evicted (ground truth) " << evicted << "/" << trials << ", timed check passed " << verified << "/" << trials;
  return {cached_before == trials && evicted == trials && verified == trials, d.str()};
}

Verdict c6_ksweep() {
  ExperimentConfig cfg;
  const auto r = run(cfg, "ksweep", "c6_ksweep");
  bool ok = true;
  std::ostringstream d;
  double prev_rec = 2.0, prev_qpt = -1.0;
  for (auto k : cfg.ksweep.k_values) {
    const auto s = std::to_string(k);
    const double rec = r.metrics.at("recovery_rate_k" + s), qpt = r.metrics.at("queries_per_token_k" + s);
    ok = ok && rec <= prev_rec && qpt >= prev_qpt;
    prev_rec = rec;
    prev_qpt = qpt;
    d << "K=" << k << " " << fmt_num(rec, 4) << "/" << fmt_num(qpt, 2) << "  ";
  }
  d << "(recovery/queries per token)";
  return {ok, d.str()};
}

Verdict c7_semantic_roc() {
  const auto r = run(ExperimentConfig{}, "roc-semantic", "c7_roc_semantic");
  const auto& m = r.metrics;
  std::ostringstream d;
  d << "both: auc " << fmt_num(m.at("auc_both"), 4) << ", tpr/fpr at 0.8 " << fmt_num(m.at("tpr_both"), 4) << "/"
    << fmt_num(m.at("fpr_both"), 4) << "; one attribute: auc " << fmt_num(m.at("auc_one"), 4)
    << ", best tpr at fpr <= 0.1 " << fmt_num(m.at("tpr_one_at_fpr_0.1"), 4) << failed_checks(r);
  return {r.all_pass(), d.str()};
}

Verdict c8_pna() {
  ExperimentConfig cfg;
  cfg.pna.rounds = 500;
  const auto r = run(cfg, "pna", "c8_pna");
  const auto& m = r.metrics;
  const std::size_t n = static_cast<std::size_t>(m.at("probes_selected"));
  bool ok = n >= 5;
  double prev = -1.0;
  std::ostringstream d;
  for (std::size_t c = 1; c <= n; ++c) {
    const auto s = "_p" + std::to_string(c);
    const double tpr = m.at("tpr" + s), f2 = m.at("fpr_type2" + s), f3 = m.at("fpr_type3" + s),
                 f4 = m.at("fpr_type4" + s);
    ok = ok && tpr >= prev && f2 > f3 && f3 > f4;
    prev = tpr;
    d << c << ": " << fmt_num(tpr, 3) << " " << fmt_num(f2, 3) << "/" << fmt_num(f3, 3) << "/" << fmt_num(f4, 3)
      << "  ";
  }
  if (n >= 5) ok = ok && m.at("tpr_p1") >= 0.80 && m.at("tpr_p5") >= 0.93;
  d << "(probes: tpr type2/type3/type4 fpr)";
  return {ok, d.str()};
}

Verdict c9_documents() {
  ExperimentConfig cfg;
  const auto r = run(cfg, "doc", "c9_doc");
  const double acc = r.metrics.at("accuracy"), fpr = r.metrics.at("fpr");
  std::ostringstream d;
  d << cfg.doc.interested << " documents x " << cfg.doc.repetitions << " repetitions, threshold "
    << cfg.doc.threshold.count() << " ms: accuracy " << fmt_num(acc, 4) << ", fpr " << fmt_num(fpr, 4);
  return {acc >= 0.85 && fpr <= 0.08, d.str()};
}

Verdict c10_anonymizer() {
  const auto r = run(ExperimentConfig{}, "anonymize", "c10_anonymize");
  const auto& m = r.metrics;
  std::ifstream oh(g_out / "c10_anonymize" / "overhead.csv");
  std::string header, row;
  std::getline(oh, header);
  std::getline(oh, row);
  std::ostringstream d;
  d << "round trip " << m.at("roundtrip_exact") << "/1000, tpr-fpr(type3) on " << fmt_num(m.at("tpr_minus_fpr_type3_on"), 4)
    << " off " << fmt_num(m.at("tpr_minus_fpr_type3_off"), 4) << ", overhead row " << row << failed_checks(r);
  return {r.all_pass() && m.at("roundtrip_exact") == 1000.0, d.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Verdict c11_determinism() {
  ExperimentConfig cfg;
  cfg.seed = 77;
  cfg.roc.samples = 1000;
  cfg.roc.vote_trials = 200;
  cfg.psa.victims = 3;
  cfg.pna.rounds = 40;
  cfg.doc.repetitions = 1;
  cfg.ksweep.victims = 5;
  cfg.anonymize_suite.rounds = 100;
  cfg.anonymize_suite.sharing_trials = 50;
  std::string diffs;
  std::size_t same = 0;
  const auto& names = scenario_names();
  for (const auto& s : names) {
    run(cfg, s, "c11/" + s + "_a");
    run(cfg, s, "c11/" + s + "_b");
    const auto a = slurp(g_out / "c11" / (s + "_a") / "summary.csv");
    const auto b = slurp(g_out / "c11" / (s + "_b") / "summary.csv");
    if (!a.empty() && a == b)
      ++same;
    else
      diffs += " " + s;
  }
  return {same == names.size(),
          std::to_string(same) + "/" + std::to_string(names.size()) + " scenarios byte-identical" +
              (diffs.empty() ? "" : "; differ:" + diffs)};
}

}  // namespace

int main(int argc, char** argv) {
  g_out = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "cacheleak_acceptance";
  fs::remove_all(g_out);
  fs::create_directories(g_out);

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"prefix-cache oracle equivalence", c1_prefix_oracle},
      {"affine timing law", c2_affine_law},
      {"vote classifier vs binomial oracle", c3_vote_classifier},
      {"prompt stealing regime", c4_psa},
      {"kv eviction determinism", c5_eviction},
      {"k-sweep trends", c6_ksweep},
      {"semantic leak roc", c7_semantic_roc},
      {"pna probe-count table", c8_pna},
      {"document inference", c9_documents},
      {"anonymizer mitigation", c10_anonymizer},
      {"determinism", c11_determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += !v.pass;
    std::printf("%s %2zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
