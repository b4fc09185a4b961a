#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "evotrack/error.hpp"
#include "evotrack/pipeline.hpp"
#include "support.hpp"

using namespace evotrack;
using testing_support::read_text;
using testing_support::TempDir;

namespace {

std::filesystem::path write_planted_spec(const TempDir& dir, double blend, int evolve_at,
                                         std::uint64_t seed = 1) {
  PlantedOptions options;
  options.seed = seed;
  options.blend = blend;
  options.evolve_at = evolve_at;
  const auto path = dir / "spec.txt";
  std::ofstream out(path);
  write_synth_spec(out, planted_spec(options));
  return path;
}

RunConfig synth_config(const std::filesystem::path& spec, const std::filesystem::path& out) {
  RunConfig config;
  config.synth_spec = spec;
  config.output = out;
  return config;
}

}  // namespace

TEST_CASE("engine specs") {
  EngineConfig e;
  apply_engine_spec(e, "raw");
  CHECK(e.engine == Engine::raw);
  apply_engine_spec(e, "ngram(5)");
  CHECK(e.engine == Engine::ngram);
  CHECK(e.ngram == 5);
  CHECK(e.gram_order() == 5);
  apply_engine_spec(e, " word2vec(3) ");
  CHECK(e.engine == Engine::word2vec);
  CHECK(e.sgns.dim == 3);
  apply_engine_spec(e, "hmm2vec(2)");
  CHECK(e.engine == Engine::hmm2vec);
  CHECK(e.hmm.states == 2);
  CHECK(e.gram_order() == 1);
  for (const char* bad : {"lstm", "raw(2)", "ngram(1)", "ngram(x)", "word2vec(0)", "hmm2vec(1)",
                          "ngram(3"})
    CHECK_THROWS_AS(apply_engine_spec(e, bad), ConfigError);
}

TEST_CASE("config text") {
  std::istringstream in("# comment\n\nengine = ngram(3)\nsvm.lambda=0.5\n  seed = 9  \n");
  RunConfig config;
  for (const auto& [k, v] : parse_key_values(in, "test")) apply_setting(config, k, v);
  CHECK(config.engine.engine == Engine::ngram);
  CHECK(config.engine.ngram == 3);
  CHECK(config.svm.lambda == 0.5);
  CHECK(config.seed == 9);

  std::istringstream broken("engine raw\n");
  CHECK_THROWS_AS(parse_key_values(broken, "test"), ConfigError);
  CHECK_THROWS_AS(apply_setting(config, "no_such_key", "1"), ConfigError);
  CHECK_THROWS_AS(apply_setting(config, "svm.lambda", "fast"), ConfigError);
  CHECK_THROWS_AS(apply_setting(config, "count_mode", "bits"), ConfigError);
  CHECK_THROWS_AS(read_run_config("/nonexistent/evotrack.conf"), ConfigError);
}

TEST_CASE("every documented key is accepted") {
  const std::map<std::string, std::string> values{
      {"manifest", "m.csv"}, {"synth", "s.txt"}, {"family", "zegost"}, {"min_year", "2000"},
      {"max_year", "2020"}, {"engine", "raw"}, {"vocab_size", "30"}, {"count_mode", "presence"},
      {"vocab_scope", "per_window"}, {"embedding_scope", "auto"}, {"svm.lambda", "0.1"},
      {"svm.epochs", "10"}, {"svm.class_balance", "false"}, {"sgns.window", "3"},
      {"sgns.negatives", "4"}, {"sgns.epochs", "2"}, {"sgns.learning_rate", "0.05"},
      {"sgns.subsample", "0.01"}, {"hmm.states", "3"}, {"hmm.max_iterations", "20"},
      {"hmm.min_log_improvement", "0"}, {"hmm.restarts", "2"}, {"z_threshold", "2.5"},
      {"e_threshold", "0.4"}, {"evolution.window_months", "6"}, {"evolution.min_samples", "5"},
      {"evolution.score_mode", "raw"}, {"output", "out"}, {"seed", "3"}, {"workers", "2"}};
  RunConfig config;
  for (const auto& key : run_config_keys()) {
    REQUIRE(values.count(key) == 1);
    CHECK_NOTHROW(apply_setting(config, key, values.at(key)));
  }
  CHECK(config.engine.count_mode == CountMode::presence);
  CHECK(config.secondary.hmm.restarts == 2);
  CHECK(config.engine.hmm.restarts == 2);
  CHECK(config.secondary.window_months == 6);
  CHECK(config.secondary.mode == ScoreMode::raw);
  CHECK(config.workers == 2);
}

TEST_CASE("config validation") {
  RunConfig config;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config.manifest = "m.csv";
  CHECK_NOTHROW(config.validate());
  config.synth_spec = "s.txt";
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config.synth_spec.reset();
  config.svm.lambda = -1;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config.svm.lambda = 0.1;
  config.min_year = 2020;
  config.max_year = 2010;
  CHECK_THROWS_AS(config.validate(), ConfigError);
}

TEST_CASE("stage seeds differ and depend on the master seed") {
  const auto a = stage_seeds(1), b = stage_seeds(2);
  CHECK(a.series != a.secondary);
  CHECK(a.series != a.synth);
  CHECK(a.series != b.series);
  CHECK(stage_seeds(1).secondary == a.secondary);
}

TEST_CASE("invalid config writes nothing") {
  TempDir dir("pipeline");
  auto config = synth_config(write_planted_spec(dir, 1.0, 12), dir / "out");
  config.manifest = dir / "manifest.csv";
  std::ostringstream log;
  const auto outcome = run_pipeline(config, log);
  CHECK(outcome.exit_code == kExitConfig);
  CHECK_FALSE(outcome.message.empty());
  CHECK(outcome.files.empty());
  CHECK_FALSE(std::filesystem::exists(dir / "out"));
}

TEST_CASE("missing manifest is a data error") {
  TempDir dir("pipeline");
  RunConfig config;
  config.manifest = dir / "missing.csv";
  config.output = dir / "out";
  std::ostringstream log;
  const auto outcome = run_pipeline(config, log);
  CHECK(outcome.exit_code == kExitData);
  CHECK(outcome.message.find("corpus") != std::string::npos);
}

TEST_CASE("too short a corpus is a data error") {
  TempDir dir("pipeline");
  PlantedOptions options;
  options.months = 12;
  options.evolve_at = -1;
  const SynthSpec spec = planted_spec(options);
  {
    std::ofstream out(dir / "short.txt");
    write_synth_spec(out, spec);
  }
  std::ostringstream log;
  const auto outcome = run_pipeline(synth_config(dir / "short.txt", dir / "out"), log);
  CHECK(outcome.exit_code == kExitData);
  CHECK(outcome.message.find("13") != std::string::npos);
}

TEST_CASE("hmm2vec run on a planted corpus confirms the spike and records its settings") {
  TempDir dir("pipeline");
  auto config = synth_config(write_planted_spec(dir, 1.0, 12), dir / "out");
  apply_setting(config, "engine", "hmm2vec(2)");
  std::ostringstream log;
  const auto outcome = run_pipeline(config, log);
  REQUIRE_MESSAGE(outcome.exit_code == kExitOk, outcome.message);
  REQUIRE(outcome.series.has_value());

  for (const char* name : {"series.csv", "series.svg", "spikes.csv", "run.json"})
    CHECK(std::filesystem::exists(dir / "out" / name));
  const Month planted = Month(2010, 1) + 13;
  bool confirmed = false;
  for (const auto& s : outcome.series->spikes)
    if (s.month == planted && s.confirmed && *s.confirmed == Confirmation::confirmed) confirmed = true;
  CHECK(confirmed);
  CHECK(std::filesystem::exists(dir / "out" / ("evolution_" + planted.str() + ".csv")));
  CHECK(std::filesystem::exists(dir / "out" / ("evolution_" + planted.str() + ".svg")));

  const auto meta = nlohmann::json::parse(read_text(dir / "out" / "run.json"));
  CHECK(meta["hmm2vec"]["states"] == 2);
  CHECK(meta["hmm2vec"].contains("restarts"));
  CHECK(meta["secondary"].contains("restarts"));
  CHECK(meta["svm"]["lambda"] == config.svm.lambda);
  CHECK(meta["features"]["vocab_size"] == config.engine.vocabulary_size);
  CHECK(meta["features"]["embedding_scope"] == "per_window");
  CHECK(meta["z_threshold"] == 2.0);
  CHECK(meta["secondary"]["e_threshold"] == 0.5);
  CHECK(meta["seeds"]["master"] == 1);
  CHECK(meta["windows"].size() == 12);
  CHECK(read_text(dir / "out" / "spikes.csv").rfind("month,chi2,zscore,status,evolution_score\n", 0) == 0);
}

TEST_CASE("ngram(5) run on a weak change completes and reports") {
  TempDir dir("pipeline");
  auto config = synth_config(write_planted_spec(dir, 0.3, 12, 2), dir / "out");
  apply_setting(config, "engine", "ngram(5)");
  std::ostringstream log;
  const auto outcome = run_pipeline(config, log);
  REQUIRE_MESSAGE(outcome.exit_code == kExitOk, outcome.message);
  const auto spikes = read_text(dir / "out" / "spikes.csv");
  CHECK(spikes.rfind("month,chi2,zscore,status,evolution_score\n", 0) == 0);
  for (const auto& s : outcome.series->spikes) CHECK(s.confirmed.has_value());
  CHECK(log.str().find("ngram(5)") != std::string::npos);
}

TEST_CASE("runs are byte-identical for the same seed") {
  TempDir dir("pipeline");
  const auto spec = write_planted_spec(dir, 1.0, 12);
  std::ostringstream log;
  auto first = synth_config(spec, dir / "a");
  auto second = synth_config(spec, dir / "b");
  second.workers = 1;
  REQUIRE(run_pipeline(first, log).exit_code == kExitOk);
  REQUIRE(run_pipeline(second, log).exit_code == kExitOk);
  for (const char* name : {"series.csv", "spikes.csv", "run.json"})
    CHECK(read_text(dir / "a" / name) == read_text(dir / "b" / name));
}

TEST_CASE("manifest corpus runs end to end") {
  TempDir dir("pipeline");
  PlantedOptions options;
  options.samples_per_month = 12;
  write_corpus(generate_synthetic(planted_spec(options)), dir / "corpus");
  RunConfig config;
  config.manifest = dir / "corpus" / "manifest.csv";
  config.output = dir / "out";
  std::ostringstream log;
  const auto outcome = run_pipeline(config, log);
  REQUIRE_MESSAGE(outcome.exit_code == kExitOk, outcome.message);
  const auto meta = nlohmann::json::parse(read_text(dir / "out" / "run.json"));
  CHECK(meta["corpus"]["kind"] == "manifest");
  CHECK(meta["corpus"]["load"]["loaded"] == 24 * 12);
}
