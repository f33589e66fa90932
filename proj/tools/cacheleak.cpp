#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "cacheleak/config.hpp"
#include "cacheleak/roc.hpp"
#include "cacheleak/scenarios.hpp"
#include "cacheleak/socket_transport.hpp"

using namespace cacheleak;

namespace {

constexpr int kExitAssert = 2;

struct Overrides {
  std::map<std::string, std::string> values;

  // One --key flag per config key, e.g. --latency.t_miss_ms 0.5.
  void attach(CLI::App* app) {
    ExperimentConfig scratch;
    for (const auto& f : config_fields(scratch)) {
      if (f.key == "scenario") continue;
      app->add_option_function<std::string>(
             "--" + f.key, [this, key = f.key](const std::string& v) { values[key] = v; },
             f.type + " (default " + f.get() + ")")
          ->group("Config overrides");
    }
  }
};

ExperimentConfig resolve(const std::string& path, const Overrides& ov) {
  ExperimentConfig cfg = path.empty() ? ExperimentConfig{} : load_config(path);
  for (const auto& [k, v] : ov.values) apply_override(cfg, k, v);
  return cfg;
}

int report_run(const ScenarioReport& r, bool assert_checks) {
  std::cout << "scenario " << r.scenario << '\n';
  for (const auto& [k, v] : r.metrics) std::cout << "  " << k << " = " << v << '\n';
  for (const auto& c : r.checks)
    std::cout << "  [" << (c.pass ? "ok" : "violated") << "] " << c.name
              << (c.detail.empty() ? "" : " (" + c.detail + ")") << '\n';
  for (const auto& f : r.files) std::cout << "  wrote " << f << '\n';
  return assert_checks && !r.all_pass() ? kExitAssert : 0;
}

std::vector<LabeledScore> read_labelled(const std::string& path, const std::string& column) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    for (std::string h; std::getline(ss, h, ',');) header.push_back(h);
  }
  auto index_of = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw std::runtime_error(path + ": missing column '" + name + "'");
  };
  const auto score_col = index_of(column);
  const auto label_col = index_of("label");
  std::vector<LabeledScore> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    if (cells.size() <= std::max(score_col, label_col))
      throw std::runtime_error(path + ":" + std::to_string(row) + ": short row");
    out.push_back({std::stod(cells[score_col]), cells[label_col] == "1" || cells[label_col] == "hit"});
  }
  return out;
}

int serve(const ExperimentConfig& cfg, const std::string& socket_path, bool realtime) {
  // Block termination signals before any thread starts so sigwait sees them.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  Engine engine(engine_config(cfg));
  SocketServer server(engine, {socket_path, realtime, derive_seed(cfg.seed, "server")});
  server.start();
  std::cout << "listening on " << socket_path << (realtime ? " (realtime)" : "") << std::endl;
  int sig = 0;
  sigwait(&set, &sig);
  server.stop();
  std::filesystem::remove(socket_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Timing side-channel lab for LLM serving caches"};
  app.require_subcommand(1);

  std::string config_path;
  bool assert_checks = false;
  Overrides overrides;

  auto* serve_cmd = app.add_subcommand("serve", "Run the serving engine on a Unix socket");
  std::string socket_path = "cacheleak.sock";
  bool realtime = false;
  serve_cmd->add_option("--config", config_path, "TOML config file")->check(CLI::ExistingFile);
  serve_cmd->add_option("--socket", socket_path, "socket path");
  serve_cmd->add_flag("--realtime", realtime, "pace token emission on the wall clock");
  overrides.attach(serve_cmd);

  std::string attack_kind;
  auto* attack_cmd = app.add_subcommand("attack", "Run an attack suite");
  attack_cmd->add_option("kind", attack_kind, "psa | pna | doc")->required()->check(CLI::IsMember({"psa", "pna", "doc"}));
  attack_cmd->add_option("--config", config_path, "TOML config file")->check(CLI::ExistingFile);
  attack_cmd->add_flag("--assert", assert_checks, "exit 2 when an acceptance threshold is violated");
  overrides.attach(attack_cmd);

  std::string mitigation_kind;
  auto* mitigate_cmd = app.add_subcommand("mitigate", "Run a mitigation suite");
  mitigate_cmd->add_option("kind", mitigation_kind, "ksweep | anonymize")
      ->required()
      ->check(CLI::IsMember({"ksweep", "anonymize"}));
  mitigate_cmd->add_option("--config", config_path, "TOML config file")->check(CLI::ExistingFile);
  mitigate_cmd->add_flag("--assert", assert_checks, "exit 2 when an acceptance threshold is violated");
  overrides.attach(mitigate_cmd);

  std::string characterize_kind;
  auto* characterize_cmd = app.add_subcommand("characterize", "Timing and similarity leakage profiles");
  characterize_cmd->add_option("kind", characterize_kind, "roc-kv | roc-semantic")
      ->required()
      ->check(CLI::IsMember({"roc-kv", "roc-semantic"}));
  characterize_cmd->add_option("--config", config_path, "TOML config file")->check(CLI::ExistingFile);
  characterize_cmd->add_flag("--assert", assert_checks, "exit 2 when an acceptance threshold is violated");
  overrides.attach(characterize_cmd);

  auto* roc_cmd = app.add_subcommand("roc", "ROC curve and AUC from labelled samples");
  std::string roc_input, roc_output = "roc.csv", roc_column = "delta_ms";
  bool higher_positive = false;
  roc_cmd->add_option("--input", roc_input, "CSV with a score column and a 0/1 label column")
      ->required()
      ->check(CLI::ExistingFile);
  roc_cmd->add_option("--output", roc_output, "ROC CSV path");
  roc_cmd->add_option("--column", roc_column, "score column name");
  roc_cmd->add_flag("--higher-is-positive", higher_positive, "positives score high (default: low, as for deltas)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (serve_cmd->parsed()) return serve(resolve(config_path, overrides), socket_path, realtime);
    if (roc_cmd->parsed()) {
      auto samples = read_labelled(roc_input, roc_column);
      const auto curve = higher_positive ? roc(std::move(samples)) : roc_lower_is_positive(std::move(samples));
      std::ofstream out(roc_output);
      if (!out) throw std::runtime_error("cannot write " + roc_output);
      write_roc_csv(out, curve);
      std::cout << "auc " << curve.auc << "\nwrote " << roc_output << '\n';
      return 0;
    }
    auto cfg = resolve(config_path, overrides);
    if (attack_cmd->parsed()) cfg.scenario = attack_kind;
    if (mitigate_cmd->parsed()) cfg.scenario = mitigation_kind;
    if (characterize_cmd->parsed()) cfg.scenario = characterize_kind;
    return report_run(run_scenario(cfg), assert_checks);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
