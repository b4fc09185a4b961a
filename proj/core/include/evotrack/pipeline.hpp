#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "evotrack/evolution.hpp"
#include "evotrack/timeline.hpp"

namespace evotrack {

inline constexpr std::string_view kVersion = "0.3.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitConfig = 2,
  kExitData = 3,
};

/// Everything one pipeline run needs. Built from flat `key = value` text;
/// see run_config_keys() for the recognized keys.
struct RunConfig {
  std::optional<std::filesystem::path> manifest;
  std::optional<std::filesystem::path> synth_spec;
  std::string family;
  int min_year = 1990;
  int max_year = current_year();

  EngineConfig engine;
  SvmParams svm;
  SecondaryConfig secondary;
  double z_threshold = 2.0;

  std::filesystem::path output = "evotrack-out";
  std::uint64_t seed = 1;
  std::size_t workers = 0;

  /// Throws ConfigError.
  void validate() const;
};

/// Recognized configuration keys, in documentation order.
const std::vector<std::string>& run_config_keys();

/// Applies one `key = value` setting. Throws ConfigError on unknown keys or
/// unparseable values.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

/// Parses `key = value` lines (`#` comments, blank lines ignored).
std::map<std::string, std::string> parse_key_values(std::istream& in,
                                                    std::string_view source);

RunConfig read_run_config(const std::filesystem::path& path);

/// Parses engine specs such as `raw`, `ngram(5)`, `word2vec(2)`, `hmm2vec(2)`.
void apply_engine_spec(EngineConfig& engine, std::string_view spec);

/// Seeds of every randomized stage, derived from the master seed.
struct StageSeeds {
  std::uint64_t series;
  std::uint64_t secondary;
  std::uint64_t synth;
};
StageSeeds stage_seeds(std::uint64_t master);

struct RunOutcome {
  int exit_code = kExitOk;
  std::string message;
  std::vector<std::filesystem::path> files;
  std::optional<Chi2Series> series;
};

/// Load or synthesize -> build series -> detect spikes -> secondary tests ->
/// write reports. Never throws; failures map to exit codes. Nothing is
/// written when the configuration is invalid.
RunOutcome run_pipeline(const RunConfig& config, std::ostream& log);

/// Series and spike analysis without file output; shared by run_pipeline and
/// the experiment harnesses.
struct Analysis {
  Chi2Series series;
  Vocabulary secondary_vocabulary;
};
Analysis analyze(const Corpus& corpus, const RunConfig& config);

}  // namespace evotrack
