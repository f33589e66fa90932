#include <doctest.h>

#include "cacheleak/config.hpp"

using namespace cacheleak;

TEST_CASE("toml overrides the defaults") {
  const auto c = parse_config(R"(
scenario = "doc"
seed = 99
[latency]
t_miss_ms = 0.5
calibrate_noise = false
[kv_cache]
granularity = 3
[doc]
lengths = [100, 200]
)");
  CHECK(c.scenario == "doc");
  CHECK(c.seed == 99);
  CHECK(c.latency.t_miss_per_token.count() == 0.5);
  CHECK_FALSE(c.calibrate_noise);
  CHECK(c.kv.granularity == 3);
  CHECK(c.doc.lengths == std::vector<std::size_t>{100, 200});
  CHECK(c.vote.n == 10);  // untouched default
}

TEST_CASE("unknown keys and bad values are errors") {
  CHECK_THROWS_AS(parse_config("bogus = 1"), ConfigError);
  CHECK_THROWS_AS(parse_config("[psa]\nvictims = \"many\""), ConfigError);
  CHECK_THROWS_AS(parse_config("[kv_cache]\nenabled = 3"), ConfigError);
  CHECK_THROWS_AS(parse_config("scenario = \"nope\"").validate(), ConfigError);
  CHECK_THROWS_AS(parse_config("[vote]\nn = 3\nk = 4").validate(), ConfigError);
  CHECK_THROWS_AS(parse_config("not toml ["), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.toml"), ConfigError);
}

TEST_CASE("command-line overrides use the same keys") {
  ExperimentConfig c;
  apply_override(c, "pna.rounds", "12");
  apply_override(c, "semantic_cache.threshold", "0.7");
  apply_override(c, "ksweep.k_values", "1,4");
  CHECK(c.pna.rounds == 12);
  CHECK(c.semantic.threshold == 0.7);
  CHECK(c.ksweep.k_values == std::vector<std::size_t>{1, 4});
  CHECK_THROWS_AS(apply_override(c, "pna.nothing", "1"), ConfigError);
  CHECK_THROWS_AS(apply_override(c, "pna.rounds", "-3"), ConfigError);
}

TEST_CASE("every field reads back what was written") {
  ExperimentConfig c;
  for (auto& f : config_fields(c)) {
    const auto v = f.get();
    f.set(v);
    CHECK(f.get() == v);
  }
}

TEST_CASE("derived seeds are stable and label-specific") {
  CHECK(derive_seed(1, "a") == derive_seed(1, "a"));
  CHECK(derive_seed(1, "a") != derive_seed(1, "b"));
  CHECK(derive_seed(1, "a") != derive_seed(2, "a"));
}

TEST_CASE("engine config follows the experiment") {
  ExperimentConfig c;
  c.calibrate_noise = false;
  c.kv.granularity = 2;
  c.semantic_enabled = true;
  const auto e = engine_config(c);
  CHECK(e.kv.granularity == 2);
  CHECK(e.semantic_enabled);
  CHECK(e.latency.noise_sigma == c.latency.noise_sigma);
  c.calibrate_noise = true;
  const auto cal = engine_config(c);
  CHECK(cal.latency.noise_sigma.count() ==
        doctest::Approx(calibrated_noise_sigma(c.latency.per_token_gap(), 0.88, 0.10).count()));
}
