#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evotrack/corpus.hpp"
#include "evotrack/features.hpp"
#include "evotrack/hmm.hpp"

namespace evotrack {

enum class Confirmation { confirmed, rejected, untestable };
std::string_view to_string(Confirmation c);

enum class Side { before, after };
std::string_view to_string(Side side);

/// How E treats the (negative) log-likelihood scores.
enum class ScoreMode {
  magnitude,  // E = 1/n sum (|S^| - |S|)^2 / |S|
  raw,        // E = 1/n sum (S^ - S)^2 / S, negative for negative scores
};

/// Mean normalized squared gap between cross-model and correct-model scores.
double evolution_score(std::span<const double> correct, std::span<const double> cross,
                       ScoreMode mode = ScoreMode::magnitude);

struct SampleScore {
  std::string sample_id;
  Side side = Side::before;
  double llpo_before_model = 0.0;
  double llpo_after_model = 0.0;

  double correct() const { return side == Side::before ? llpo_before_model : llpo_after_model; }
  double cross() const { return side == Side::before ? llpo_after_model : llpo_before_model; }
};

struct SecondaryConfig {
  int window_months = 12;
  std::size_t min_samples = 10;
  double e_threshold = 0.5;
  ScoreMode mode = ScoreMode::magnitude;
  HmmTrainConfig hmm;
};

struct SideModelInfo {
  std::uint64_t seed = 0;
  std::size_t states = 0;
  std::size_t iterations = 0;
  std::size_t samples = 0;
  double log_likelihood = 0.0;
};

struct EvolutionReport {
  Month spike_month;
  Confirmation verdict = Confirmation::untestable;
  std::string note;
  SideModelInfo before_info;
  SideModelInfo after_info;
  std::optional<HmmModel> before_model;
  std::optional<HmmModel> after_model;
  std::vector<SampleScore> scores;
  double e_before = 0.0;
  double e_after = 0.0;
  double e = 0.0;
  double mean_correct_before = 0.0;
  double mean_cross_before = 0.0;
  double mean_correct_after = 0.0;
  double mean_cross_after = 0.0;

  /// Share of samples on `side` whose own-side model scores them higher.
  double own_model_preference(Side side) const;
};

/// Trains one HMM on [spike - window, spike) and one on [spike, spike +
/// window), scores every sample of both sides with both models and derives E.
/// Too few samples on either side yields an untestable report.
EvolutionReport secondary_test(const Corpus& corpus, const Vocabulary& vocab,
                               Month spike, const SecondaryConfig& config);

/// `sample_id,side,llpo_before_model,llpo_after_model`
void write_evolution_csv(std::ostream& out, const EvolutionReport& report);
/// Per-side score traces over sample index.
void write_evolution_svg(std::ostream& out, const EvolutionReport& report,
                         std::string_view title);

}  // namespace evotrack
