#include "cacheleak/scenarios.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "cacheleak/attribute_corpus.hpp"
#include "cacheleak/csv.hpp"
#include "cacheleak/documents.hpp"
#include "cacheleak/ksweep.hpp"
#include "cacheleak/psa.hpp"

namespace cacheleak {

namespace fs = std::filesystem;

bool ScenarioReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

namespace {

class Output {
 public:
  Output(const ExperimentConfig& cfg, ScenarioReport& report) : dir_(cfg.output_dir), report_(report) {
    fs::create_directories(dir_);
  }
  std::ofstream open(const std::string& name) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir_ / name).string());
    report_.files.push_back(name);
    return out;
  }

 private:
  fs::path dir_;
  ScenarioReport& report_;
};

void check(ScenarioReport& r, std::string name, bool pass, std::string detail) {
  r.checks.push_back({std::move(name), pass, std::move(detail)});
}

std::string describe(double v, int precision = 4) { return fmt_num(v, precision); }

void write_metrics(Output& out, const ScenarioReport& r) {
  nlohmann::json j;
  j["scenario"] = r.scenario;
  for (const auto& [k, v] : r.metrics) j["metrics"][k] = v;
  for (const auto& c : r.checks) j["checks"].push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  out.open("report.json") << j.dump(2) << '\n';
}

std::string words_text(std::span<const std::string> words) {
  std::string s;
  for (const auto& w : words) {
    if (!s.empty()) s += ' ';
    s += w;
  }
  return s;
}

Millis scenario_theta(const ExperimentConfig& cfg, const EngineConfig& ec) {
  std::optional<double> target;
  if (cfg.theta_rule == "target_fpr") target = cfg.target_fpr;
  return calibrate_theta(ec, cfg.calibration_samples, derive_seed(cfg.seed, "theta"), target);
}

// ---------------------------------------------------------------- psa

void run_psa(const ExperimentConfig& cfg, ScenarioReport& report, Output& out) {
  const auto corpus = build_corpus(cfg.corpus, derive_seed(cfg.seed, "corpus"));
  std::vector<TokenSeq> train;
  for (auto i : corpus.attacker) train.push_back(corpus.prompts[i]);
  const auto predictor = train_predictor(train, corpus.vocab.size(), cfg.psa.order, cfg.psa.alpha);

  EngineConfig ec = engine_config(cfg);
  ec.semantic_enabled = false;
  Engine engine(ec);

  PsaConfig pc;
  pc.max_guesses_per_position = cfg.psa.max_guesses;
  pc.vote = cfg.vote;
  if (cfg.calibrate_theta) pc.vote.theta = scenario_theta(cfg, ec);
  pc.temperature = cfg.psa.temperature;
  pc.eviction = {cfg.psa.eviction_count, cfg.psa.eviction_tokens};
  pc.cross_verify = cfg.psa.cross_verify;
  pc.granularity = cfg.kv.granularity;
  pc.calibrated_gap = ec.latency.per_token_gap();

  auto summary = out.open("summary.csv");
  auto trace_out = out.open("trace.jsonl");
  std::ofstream samples_file;
  std::optional<SampleCsv> samples;
  if (cfg.psa.write_samples) {
    samples_file = out.open("samples.csv");
    samples.emplace(samples_file);
  }
  write_psa_summary_header(summary);

  std::size_t recovered = 0, correct = 0, false_accepts = 0, queries = 0, recovered_queries = 0, guesses = 0;
  std::size_t attempted = 0, secret_tokens = 0, full = 0;
  const std::size_t victims = std::min(cfg.psa.victims, corpus.victim.size());
  for (std::size_t v = 0; v < victims; ++v) {
    const std::size_t idx = corpus.victim[v];
    engine.admin_flush(FlushTarget::both);
    InProcessClient client(engine, derive_seed(cfg.seed, "psa-client-" + std::to_string(idx)));
    const auto target = make_psa_target(corpus, idx, ec.prompt_template, cfg.psa.user_text);
    const auto trace = recover_prompt(client, target, predictor, corpus.vocab, pc,
                                      derive_seed(cfg.seed, "psa-guess-" + std::to_string(idx)),
                                      samples ? &*samples : nullptr);
    write_psa_summary_row(summary, idx, trace);
    write_trace_jsonl(trace_out, idx, trace, corpus.vocab);
    recovered += trace.tokens_recovered;
    correct += trace.tokens_correct;
    false_accepts += trace.false_accepts;
    queries += trace.total_queries;
    recovered_queries += trace.recovered_position_queries;
    guesses += trace.total_guesses;
    attempted += trace.tokens_attempted;
    secret_tokens += target.secret.size();
    if (trace.tokens_correct == target.secret.size()) ++full;
  }
  auto ratio = [](double a, double b) { return b == 0.0 ? 0.0 : a / b; };
  const double accuracy = ratio(correct, recovered);
  const double qprt = ratio(recovered_queries, recovered);
  report.metrics["victims"] = static_cast<double>(victims);
  report.metrics["theta_ms"] = pc.vote.theta.count();
  report.metrics["noise_sigma_ms"] = ec.latency.noise_sigma.count();
  report.metrics["accuracy"] = accuracy;
  report.metrics["recovery_rate"] = ratio(recovered, secret_tokens);
  report.metrics["fully_recovered_prompts"] = static_cast<double>(full);
  report.metrics["false_accepts"] = static_cast<double>(false_accepts);
  report.metrics["queries_per_recovered_token"] = qprt;
  report.metrics["queries_per_token"] = ratio(queries, recovered);
  report.metrics["guesses_per_recovered_token"] = ratio(guesses, recovered);
  report.metrics["tokens_attempted"] = static_cast<double>(attempted);
  check(report, "psa accuracy >= 0.85", accuracy >= 0.85, describe(accuracy));
  check(report, "psa queries per recovered token in [50, 400]", qprt >= 50.0 && qprt <= 400.0, describe(qprt, 2));
}

// ---------------------------------------------------------------- pna

struct PnaOutcome {
  ProbeSelection selection;
  PnaResult result;
};

PnaOutcome pna_suite(const ExperimentConfig& cfg, bool anonymize, std::size_t rounds, const std::string& evictor_kind) {
  EngineConfig ec = engine_config(cfg);
  ec.kv_enabled = false;
  ec.semantic_enabled = true;
  ec.anonymize = anonymize;
  Engine engine(ec);
  const auto family = ParaphraseFamily().filtered(cfg.semantic.embedding, cfg.semantic.threshold);

  GreedyConfig greedy{cfg.pna.sigma_budget, cfg.pna.max_probes, cfg.pna.orthogonality_min_distance};
  PnaOutcome o;
  o.selection = select_probes(family, cfg.semantic.embedding, cfg.semantic.threshold, greedy, cfg.pna.pool_size,
                              cfg.pna.held_out, derive_seed(cfg.seed, "pna-select"));

  InProcessClient attacker(engine, derive_seed(cfg.seed, "pna-attacker"));
  InProcessClient victim(engine, derive_seed(cfg.seed, "pna-victim"));
  PnaRunConfig rc;
  rc.rounds = rounds;
  rc.threshold = (ec.latency.semantic_hit_latency + ec.latency.semantic_miss_latency) / 2.0;
  rc.read_only_probes = cfg.pna.read_only_probes;
  rc.seed = derive_seed(cfg.seed, "pna-rounds");
  std::unique_ptr<Evictor> evictor;
  if (evictor_kind == "admin")
    evictor = std::make_unique<AdminFlushEvictor>(engine, FlushTarget::semantic);
  else
    evictor = std::make_unique<FloodEvictor>(cfg.pna.flood_requests, derive_seed(cfg.seed, "pna-flood"));
  o.result = run_rounds(attacker, victim, family, o.selection.members, rc, *evictor);
  return o;
}

void write_probes_csv(std::ostream& out, const ProbeSelection& sel) {
  out << "rank,member,representativeness,cumulative_fpr,text\n";
  for (std::size_t i = 0; i < sel.selected.size(); ++i)
    out << i + 1 << ',' << sel.selected[i].member << ',' << fmt_num(sel.selected[i].representativeness) << ','
        << fmt_num(sel.cumulative_fpr[i], 4) << ',' << csv_field(sel.selected[i].text) << '\n';
}

void run_pna(const ExperimentConfig& cfg, ScenarioReport& report, Output& out) {
  const auto o = pna_suite(cfg, cfg.anonymize, cfg.pna.rounds, cfg.pna.evictor);
  const auto& r = o.result;
  {
    auto s = out.open("summary.csv");
    write_pna_summary_csv(s, r);
  }
  {
    auto s = out.open("rounds.csv");
    write_pna_rounds_csv(s, r);
  }
  {
    auto s = out.open("probes.csv");
    write_probes_csv(s, o.selection);
  }
  report.metrics["probes_selected"] = static_cast<double>(r.max_probes);
  for (std::size_t c = 1; c <= r.max_probes; ++c) {
    const auto suffix = "_p" + std::to_string(c);
    report.metrics["tpr" + suffix] = r.rate(VictimType::type1, c);
    report.metrics["fpr_type2" + suffix] = r.rate(VictimType::type2, c);
    report.metrics["fpr_type3" + suffix] = r.rate(VictimType::type3, c);
    report.metrics["fpr_type4" + suffix] = r.rate(VictimType::type4, c);
  }
  check(report, "pna selects 5 probes", r.max_probes == 5, std::to_string(r.max_probes));
  bool monotone = true, ordering = true;
  for (std::size_t c = 1; c <= r.max_probes; ++c) {
    if (c > 1 && r.rate(VictimType::type1, c) < r.rate(VictimType::type1, c - 1)) monotone = false;
    if (!(r.rate(VictimType::type2, c) > r.rate(VictimType::type3, c) &&
          r.rate(VictimType::type3, c) > r.rate(VictimType::type4, c)))
      ordering = false;
  }
  const double t1 = r.max_probes >= 1 ? r.rate(VictimType::type1, 1) : 0.0;
  const double t5 = r.max_probes >= 5 ? r.rate(VictimType::type1, 5) : 0.0;
  check(report, "pna tpr non-decreasing in probes", monotone, "");
  check(report, "pna tpr >= 0.80 at 1 probe", t1 >= 0.80, describe(t1));
  check(report, "pna tpr >= 0.93 at 5 probes", t5 >= 0.93, describe(t5));
  check(report, "pna fpr type2 > type3 > type4 at every probe count", ordering, "");
}

// ---------------------------------------------------------------- doc

void run_doc(const ExperimentConfig& cfg, ScenarioReport& report, Output& out) {
  EngineConfig ec = engine_config(cfg);
  ec.semantic_enabled = false;
  ec.kv.capacity_tokens = cfg.doc.capacity_tokens;
  Engine engine(ec);
  InProcessClient attacker(engine, derive_seed(cfg.seed, "doc-attacker"));
  InProcessClient victim(engine, derive_seed(cfg.seed, "doc-victim"));
  DocumentProtocolConfig dc;
  dc.interested = cfg.doc.interested;
  dc.victim_from_interested = cfg.doc.victim_from_interested;
  dc.victim_outside = cfg.doc.victim_outside;
  dc.repetitions = cfg.doc.repetitions;
  dc.lengths = cfg.doc.lengths;
  dc.threshold = cfg.doc.threshold;
  dc.seed = derive_seed(cfg.seed, "doc");
  // Cached documents expire between repetitions.
  const auto result = run_document_protocol(attacker, victim, dc, [&] { engine.admin_flush(FlushTarget::kv); });
  {
    auto s = out.open("summary.csv");
    write_document_csv(s, result);
  }
  {
    auto s = out.open("probes.csv");
    s << "ttft_ms,cached\n";
    for (const auto& [t, cached] : result.probes) s << fmt_num(t, 3) << ',' << (cached ? 1 : 0) << '\n';
  }
  report.metrics["accuracy"] = result.mean_accuracy();
  report.metrics["fpr"] = result.mean_fpr();
  check(report, "document accuracy >= 0.85", result.mean_accuracy() >= 0.85, describe(result.mean_accuracy()));
  check(report, "document fpr <= 0.08", result.mean_fpr() <= 0.08, describe(result.mean_fpr()));
}

// ---------------------------------------------------------------- ksweep

void run_ksweep_scenario(const ExperimentConfig& cfg, ScenarioReport& report, Output& out) {
  const auto corpus = build_corpus(cfg.corpus, derive_seed(cfg.seed, "corpus"));
  std::vector<TokenSeq> train;
  for (auto i : corpus.attacker) train.push_back(corpus.prompts[i]);
  const auto predictor = train_predictor(train, corpus.vocab.size(), cfg.psa.order, cfg.psa.alpha);

  EngineConfig ec = engine_config(cfg);
  ec.semantic_enabled = false;
  KSweepConfig kc;
  kc.k_values = cfg.ksweep.k_values;
  kc.simulate_classifier = cfg.ksweep.simulate;
  kc.base_rates = {cfg.target_tpr, cfg.target_fpr};
  kc.psa.max_guesses_per_position = cfg.psa.max_guesses;
  kc.psa.budget_per_token = cfg.ksweep.budget_per_token;
  kc.psa.temperature = cfg.psa.temperature;
  kc.psa.eviction = {cfg.psa.eviction_count, cfg.psa.eviction_tokens};
  kc.psa.cross_verify = cfg.psa.cross_verify;
  kc.psa.calibrated_gap = ec.latency.per_token_gap();
  kc.psa.vote.theta = cfg.vote.theta;
  if (!kc.simulate_classifier && cfg.calibrate_theta)
    kc.psa.vote.theta = scenario_theta(cfg, ec);
  kc.seed = derive_seed(cfg.seed, "ksweep");

  KSweepInputs in{corpus, predictor, {}, ec, cfg.psa.user_text};
  const std::size_t victims = std::min(cfg.ksweep.victims, corpus.victim.size());
  in.victims.assign(corpus.victim.begin(), corpus.victim.begin() + static_cast<std::ptrdiff_t>(victims));
  const auto rows = run_ksweep(kc, in);
  {
    auto s = out.open("summary.csv");
    write_ksweep_csv(s, rows);
  }
  bool recovery = true, qpt = true, qprt = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const auto k = std::to_string(r.k);
    report.metrics["recovery_rate_k" + k] = r.recovery_rate;
    report.metrics["accuracy_k" + k] = r.accuracy;
    report.metrics["queries_per_recovered_token_k" + k] = r.queries_per_recovered_token;
    report.metrics["queries_per_token_k" + k] = r.queries_per_token;
    if (i == 0) continue;
    const auto& p = rows[i - 1];
    if (r.recovery_rate > p.recovery_rate) recovery = false;
    if (r.queries_per_token < p.queries_per_token) qpt = false;
    if (r.queries_per_recovered_token > p.queries_per_recovered_token) qprt = false;
  }
  check(report, "ksweep recovery_rate non-increasing in K", recovery, "");
  check(report, "ksweep queries_per_token non-decreasing in K", qpt, "");
  check(report, "ksweep queries_per_recovered_token non-increasing in K", qprt, "");
}

// ---------------------------------------------------------------- anonymize

void run_anonymize(const ExperimentConfig& cfg, ScenarioReport& report, Output& out) {
  const Anonymizer anonymizer(person_names());
  const auto sentences = pii_sentences(cfg.anonymize_suite.roundtrip_sentences, derive_seed(cfg.seed, "pii"));
  std::size_t exact = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& s : sentences) {
    const auto a = anonymizer.anonymize(s);
    // The echo response carries the identifiers verbatim.
    if (Anonymizer::restore(a.text, a.map).text == s) ++exact;
  }
  const auto t1 = std::chrono::steady_clock::now();
  const double per_request_ms =
      std::chrono::duration<double, std::milli>(t1 - t0).count() / static_cast<double>(sentences.size());
  const double hit_ms = cfg.latency.semantic_hit_latency.count();

  // Cross-user sharing: same phrasing, different names.
  auto sharing = [&](bool anonymize) {
    EngineConfig ec = engine_config(cfg);
    ec.kv_enabled = false;
    ec.semantic_enabled = true;
    ec.anonymize = anonymize;
    Engine engine(ec);
    InProcessClient first_user(engine, derive_seed(cfg.seed, "sharing-client"));
    const auto family = ParaphraseFamily().filtered(cfg.semantic.embedding, cfg.semantic.threshold);
    std::mt19937_64 rng(derive_seed(cfg.seed, "sharing"));
    const auto& names = person_names();
    const auto& conds = medical_conditions();
    std::size_t hits = 0;
    const std::size_t trials = cfg.anonymize_suite.sharing_trials;
    for (std::size_t i = 0; i < trials; ++i) {
      engine.admin_flush(FlushTarget::semantic);
      const auto m = std::uniform_int_distribution<std::size_t>(0, family.size() - 1)(rng);
      const auto& cond = conds[std::uniform_int_distribution<std::size_t>(0, conds.size() - 1)(rng)];
      const auto n1 = std::uniform_int_distribution<std::size_t>(0, names.size() - 1)(rng);
      auto n2 = std::uniform_int_distribution<std::size_t>(0, names.size() - 2)(rng);
      if (n2 >= n1) ++n2;
      first_user.send(ChatRequest::direct(family.render(m, names[n1], cond)));
      RequestOutcome outcome;
      NoiseSource noise(i);
      engine.handle(ChatRequest::direct(family.render(m, names[n2], cond)), noise, &outcome);
      if (outcome.semantic_hit) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(trials);
  };
  const double share_off = sharing(false);
  const double share_on = sharing(true);

  const auto& as = cfg.anonymize_suite;
  const auto off = pna_suite(cfg, false, as.rounds, as.evictor).result;
  const auto on = pna_suite(cfg, true, as.rounds, as.evictor).result;
  auto worst_gap = [](const PnaResult& r) {
    double g = -1.0;
    for (std::size_t p = 1; p <= r.max_probes; ++p)
      g = std::max(g, r.rate(VictimType::type1, p) - r.rate(VictimType::type3, p));
    return g;
  };

  {
    auto s = out.open("summary.csv");
    s << "mitigation,probe_count,tpr_type1,fpr_type2,fpr_type3,fpr_type4,tpr_minus_fpr_type3,cross_user_hit_rate\n";
    for (const auto* r : {&off, &on})
      for (std::size_t p = 1; p <= r->max_probes; ++p)
        s << (r == &on ? "on" : "off") << ',' << p << ',' << fmt_num(r->rate(VictimType::type1, p), 4) << ','
          << fmt_num(r->rate(VictimType::type2, p), 4) << ',' << fmt_num(r->rate(VictimType::type3, p), 4) << ','
          << fmt_num(r->rate(VictimType::type4, p), 4) << ','
          << fmt_num(r->rate(VictimType::type1, p) - r->rate(VictimType::type3, p), 4) << ','
          << fmt_num(r == &on ? share_on : share_off, 4) << '\n';
    s << "roundtrip_exact," << exact << '/' << sentences.size() << ",,,,,,\n";
  }
  {
    auto s = out.open("overhead.csv");
    s << "sentences,mean_pre_post_ms,semantic_hit_ms,ratio\n";
    s << sentences.size() << ',' << fmt_num(per_request_ms, 6) << ',' << fmt_num(hit_ms, 3) << ','
      << fmt_num(per_request_ms / hit_ms, 6) << '\n';
  }
  const double gap = worst_gap(on);
  report.metrics["roundtrip_exact"] = static_cast<double>(exact);
  report.metrics["tpr_minus_fpr_type3_on"] = gap;
  report.metrics["tpr_minus_fpr_type3_off"] = worst_gap(off);
  report.metrics["cross_user_hit_rate_off"] = share_off;
  report.metrics["cross_user_hit_rate_on"] = share_on;
  check(report, "anonymizer round trip 1000/1000", exact == sentences.size(), std::to_string(exact));
  check(report, "mitigated pna tpr - fpr(type3) < 0.05 at every probe count", gap < 0.05, describe(gap));
  check(report, "cross-user sharing increases", share_on > share_off,
        describe(share_off) + " -> " + describe(share_on));
  check(report, "pre+post overhead < 10% of semantic hit", per_request_ms / hit_ms < 0.10,
        describe(per_request_ms / hit_ms, 6));
}

// ---------------------------------------------------------------- roc

void run_roc_kv(const ExperimentConfig& cfg, ScenarioReport& report, Output& out) {
  EngineConfig ec = engine_config(cfg);
  ec.semantic_enabled = false;
  const Millis theta = cfg.calibrate_theta ? scenario_theta(cfg, ec) : cfg.vote.theta;
  const auto d = collect_deltas(ec, cfg.roc.samples, derive_seed(cfg.seed, "roc-kv"));
  std::vector<LabeledScore> s;
  for (double x : d.hit) s.push_back({x, true});
  for (double x : d.miss) s.push_back({x, false});
  const auto curve = roc_lower_is_positive(s);
  const auto single = rates_at(d.hit, d.miss, theta.count());
  VoteConfig vc = cfg.vote;
  vc.theta = theta;
  const auto voted = vote_trials(ec, vc, cfg.roc.vote_trials, derive_seed(cfg.seed, "roc-vote"));
  {
    auto f = out.open("roc.csv");
    write_roc_csv(f, curve);
  }
  {
    auto f = out.open("samples.csv");
    f << "delta_ms,label\n";
    for (const auto& x : s) f << fmt_num(x.score, 6) << ',' << (x.positive ? 1 : 0) << '\n';
  }
  {
    auto f = out.open("summary.csv");
    f << "noise_sigma_ms,theta_ms,auc,tpr,fpr,vote_n,vote_k,vote_tpr,vote_fpr\n";
    f << fmt_num(ec.latency.noise_sigma.count()) << ',' << fmt_num(theta.count()) << ',' << fmt_num(curve.auc) << ','
      << fmt_num(single.tpr, 4) << ',' << fmt_num(single.fpr, 4) << ',' << vc.n << ',' << vc.k << ','
      << fmt_num(voted.tpr, 4) << ',' << fmt_num(voted.fpr, 4) << '\n';
  }
  report.metrics["auc"] = curve.auc;
  report.metrics["theta_ms"] = theta.count();
  report.metrics["tpr"] = single.tpr;
  report.metrics["fpr"] = single.fpr;
  report.metrics["vote_tpr"] = voted.tpr;
  report.metrics["vote_fpr"] = voted.fpr;
  check(report, "single-trial rates within 0.03 of target",
        std::abs(single.tpr - cfg.target_tpr) <= 0.03 && std::abs(single.fpr - cfg.target_fpr) <= 0.03,
        describe(single.tpr) + "/" + describe(single.fpr));
  check(report, "vote tpr >= 0.99 and fpr <= 0.01", voted.tpr >= 0.99 && voted.fpr <= 0.01,
        describe(voted.tpr) + "/" + describe(voted.fpr));
}

void run_roc_semantic(const ExperimentConfig& cfg, ScenarioReport& report, Output& out) {
  const auto both = semantic_leakage_roc(cfg.semantic, false, derive_seed(cfg.seed, "roc-semantic"));
  const auto one = semantic_leakage_roc(cfg.semantic, true, derive_seed(cfg.seed, "roc-semantic"));
  {
    auto f = out.open("roc.csv");
    f << "variant,threshold,tpr,fpr\n";
    for (const auto* v : {&both, &one})
      for (const auto& p : v->curve.points)
        if (!std::isinf(p.threshold))
          f << (v == &both ? "both_differ" : "one_matches") << ',' << fmt_num(p.threshold) << ','
            << fmt_num(p.tpr) << ',' << fmt_num(p.fpr) << '\n';
  }
  {
    auto f = out.open("summary.csv");
    f << "variant,auc,tpr_at_threshold,fpr_at_threshold,best_tpr_fpr_le_0.1\n";
    for (const auto* v : {&both, &one})
      f << (v == &both ? "both_differ" : "one_matches") << ',' << fmt_num(v->curve.auc, 4) << ','
        << fmt_num(v->tpr_at_threshold, 4) << ',' << fmt_num(v->fpr_at_threshold, 4) << ','
        << fmt_num(tpr_at_fpr(v->curve, 0.1), 4) << '\n';
  }
  report.metrics["auc_both"] = both.curve.auc;
  report.metrics["tpr_both"] = both.tpr_at_threshold;
  report.metrics["fpr_both"] = both.fpr_at_threshold;
  report.metrics["auc_one"] = one.curve.auc;
  report.metrics["tpr_one"] = one.tpr_at_threshold;
  report.metrics["fpr_one"] = one.fpr_at_threshold;
  report.metrics["tpr_one_at_fpr_0.1"] = tpr_at_fpr(one.curve, 0.1);
  check(report, "semantic roc auc >= 0.95", both.curve.auc >= 0.95, describe(both.curve.auc));
  check(report, "tpr >= 0.95 at fpr <= 0.1 (threshold)", both.tpr_at_threshold >= 0.95 && both.fpr_at_threshold <= 0.1,
        describe(both.tpr_at_threshold) + "/" + describe(both.fpr_at_threshold));
  check(report, "one-attribute tpr >= 0.85 at fpr <= 0.1", tpr_at_fpr(one.curve, 0.1) >= 0.85,
        describe(tpr_at_fpr(one.curve, 0.1)));
}

}  // namespace

DeltaSamples collect_deltas(const EngineConfig& engine_cfg, std::size_t samples, std::uint64_t seed) {
  EngineConfig ec = engine_cfg;
  ec.semantic_enabled = false;
  Engine engine(ec);
  InProcessClient client(engine, seed);
  std::mt19937_64 rng(seed ^ 0xca1ULL);
  const auto& lex = filler_lexicon();
  std::uniform_int_distribution<std::size_t> pick(0, lex.size() - 1);

  DeltaSamples d;
  for (std::size_t i = 0; i < samples; ++i) {
    std::vector<std::string> words;
    for (int w = 0; w < 32; ++w) words.push_back(lex[pick(rng)]);
    const std::string prompt = words_text(words);
    const std::string stem = words_text(std::span<const std::string>(words).first(words.size() - 1));
    const std::string ref = miss_reference(stem);
    std::string other;
    do other = lex[pick(rng)];
    while (other == words.back());

    engine.admin_flush(FlushTarget::kv);
    client.send(ChatRequest::direct(prompt));
    d.hit.push_back(measure_pair(client, prompt, ref).delta.count());

    engine.admin_flush(FlushTarget::kv);
    client.send(ChatRequest::direct(prompt));
    d.miss.push_back(measure_pair(client, stem + " " + other, ref).delta.count());
  }
  return d;
}

Millis calibrate_theta(const EngineConfig& engine, std::size_t samples, std::uint64_t seed,
                       std::optional<double> target_fpr) {
  const auto d = collect_deltas(engine, samples, seed);
  return Millis(target_fpr ? fpr_threshold(d.miss, *target_fpr) : youden_threshold(d.hit, d.miss));
}

RatePoint vote_trials(const EngineConfig& engine_cfg, const VoteConfig& vote_cfg, std::size_t trials,
                      std::uint64_t seed) {
  EngineConfig ec = engine_cfg;
  ec.semantic_enabled = false;
  Engine engine(ec);
  InProcessClient client(engine, seed);
  std::mt19937_64 rng(seed ^ 0x707eULL);
  const auto& lex = filler_lexicon();
  std::uniform_int_distribution<std::size_t> pick(0, lex.size() - 1);
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < 2 * trials; ++i) {
    const bool positive = i < trials;
    std::vector<std::string> words;
    for (int w = 0; w < 32; ++w) words.push_back(lex[pick(rng)]);
    const std::string prompt = words_text(words);
    const std::string stem = words_text(std::span<const std::string>(words).first(words.size() - 1));
    std::string other;
    do other = lex[pick(rng)];
    while (other == words.back());
    const std::string target = positive ? prompt : stem + " " + other;
    const auto r = vote(client, target, miss_reference(stem), vote_cfg, [&](int) {
      engine.admin_flush(FlushTarget::kv);
      client.send(ChatRequest::direct(prompt));
    });
    if (r.decision == Decision::hit) ++(positive ? tp : fp);
  }
  const double n = static_cast<double>(trials);
  return {static_cast<double>(tp) / n, static_cast<double>(fp) / n};
}

SemanticRoc semantic_leakage_roc(const SemanticCacheConfig& cache, bool one_attribute, std::uint64_t seed) {
  const auto family = ParaphraseFamily().filtered(cache.embedding, cache.threshold);
  const auto& names = person_names();
  const auto& conds = medical_conditions();
  std::mt19937_64 rng(seed);
  const std::size_t n0 = std::uniform_int_distribution<std::size_t>(0, names.size() - 1)(rng);
  const std::size_t c0 = std::uniform_int_distribution<std::size_t>(0, conds.size() - 1)(rng);

  std::vector<std::size_t> members(family.size());
  std::iota(members.begin(), members.end(), 0);
  std::shuffle(members.begin(), members.end(), rng);
  const std::size_t n_ref = std::max<std::size_t>(1, members.size() / 5);

  std::vector<Embedding> refs;
  for (std::size_t i = 0; i < n_ref; ++i) refs.push_back(embed(family.render(members[i], names[n0], conds[c0]), cache.embedding));
  auto score = [&](const std::string& text) {
    const auto e = embed(text, cache.embedding);
    double best = -1.0;
    for (const auto& r : refs) best = std::max(best, cosine(e, r));
    return best;
  };

  SemanticRoc out;
  for (std::size_t i = n_ref; i < members.size(); ++i)
    out.samples.push_back({score(family.render(members[i], names[n0], conds[c0])), true});
  const std::size_t positives = out.samples.size();
  std::uniform_int_distribution<std::size_t> pick_name(0, names.size() - 1), pick_cond(0, conds.size() - 1);
  while (out.samples.size() < 2 * positives) {
    std::size_t ni = pick_name(rng), ci = pick_cond(rng);
    if (one_attribute) {
      if (std::bernoulli_distribution(0.5)(rng))
        ni = n0;
      else
        ci = c0;
      if (ni == n0 && ci == c0) continue;
    } else if (ni == n0 || ci == c0) {
      continue;
    }
    out.samples.push_back({score(family.render(0, names[ni], conds[ci])), false});
  }
  out.curve = roc(out.samples);
  std::vector<double> pos, neg;
  for (const auto& s : out.samples) (s.positive ? pos : neg).push_back(s.score);
  auto frac = [&](const std::vector<double>& v) {
    return static_cast<double>(std::count_if(v.begin(), v.end(), [&](double x) { return x >= cache.threshold; })) /
           static_cast<double>(v.size());
  };
  out.tpr_at_threshold = frac(pos);
  out.fpr_at_threshold = frac(neg);
  return out;
}

ScenarioReport run_scenario(const ExperimentConfig& cfg) {
  cfg.validate();
  ScenarioReport report;
  report.scenario = cfg.scenario;
  Output out(cfg, report);
  if (cfg.scenario == "psa")
    run_psa(cfg, report, out);
  else if (cfg.scenario == "pna")
    run_pna(cfg, report, out);
  else if (cfg.scenario == "doc")
    run_doc(cfg, report, out);
  else if (cfg.scenario == "ksweep")
    run_ksweep_scenario(cfg, report, out);
  else if (cfg.scenario == "anonymize")
    run_anonymize(cfg, report, out);
  else if (cfg.scenario == "roc-kv")
    run_roc_kv(cfg, report, out);
  else if (cfg.scenario == "roc-semantic")
    run_roc_semantic(cfg, report, out);
  write_metrics(out, report);
  return report;
}

}  // namespace cacheleak
