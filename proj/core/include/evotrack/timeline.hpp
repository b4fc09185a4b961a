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
#include "evotrack/evolution.hpp"
#include "evotrack/features.hpp"
#include "evotrack/hmm.hpp"
#include "evotrack/svm.hpp"
#include "evotrack/word2vec.hpp"

namespace evotrack {

/// One year of samples (class +1) against the month right after it (class -1).
struct WindowPair {
  Month year_first;
  Month year_last;
  Month probe;
  std::vector<std::size_t> positives;  // indices into the corpus
  std::vector<std::size_t> negatives;
  bool skip = false;
};

/// One pair per probe month from first+12 to last. Throws DataError when the
/// corpus spans fewer than 13 months.
std::vector<WindowPair> enumerate_windows(const Corpus& corpus);

/// Absolute value, L1 normalization, floor at `floor`, renormalization.
std::vector<double> chi2_transform(std::span<const double> weights, double floor = 1e-6);

/// sum (o_i - e_i)^2 / e_i with e = transformed previous weights and
/// o = transformed current weights.
double chi2_distance(std::span<const double> previous, std::span<const double> current);
double chi2_distance(const WeightVector& previous, const WeightVector& current);

enum class VocabularyScope { global, per_window };
/// `automatic` trains one word2vec embedding per run (SGNS coordinates are
/// not comparable across windows) and one hmm2vec embedding per window
/// (canonicalized states are).
enum class EmbeddingScope { automatic, per_window, global };

struct EngineConfig {
  Engine engine = Engine::raw;
  /// Gram order for Engine::ngram.
  int ngram = 2;
  std::size_t vocabulary_size = 20;
  CountMode count_mode = CountMode::frequency;
  VocabularyScope vocabulary_scope = VocabularyScope::global;
  EmbeddingScope embedding_scope = EmbeddingScope::automatic;
  SgnsParams sgns;
  /// Embedding HMM for Engine::hmm2vec; `states` is the embedding length.
  HmmTrainConfig hmm;

  int gram_order() const { return engine == Engine::ngram ? ngram : 1; }
  EmbeddingScope resolved_embedding_scope() const;
  void validate() const;
};

std::string describe(const EngineConfig& config);

struct SeriesPoint {
  Month month;
  double chi2 = 0.0;
};

struct SpikeReport {
  Month month;
  double chi2 = 0.0;
  double zscore = 0.0;
  /// Unset until a secondary test has been attempted.
  std::optional<Confirmation> confirmed;
  std::optional<EvolutionReport> evolution;
};

struct WindowReport {
  Month probe;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  /// Samples shorter than the gram order.
  std::size_t excluded_short = 0;
  bool skipped = false;
  std::string note;
  double objective = 0.0;
};

struct Chi2Series {
  Engine engine = Engine::raw;
  std::vector<SeriesPoint> points;
  std::vector<SpikeReport> spikes;
  std::vector<WindowReport> windows;
  std::vector<WeightVector> weights;  // one per trained window, probe order
};

struct SeriesOptions {
  std::size_t workers = 0;  // 0: hardware concurrency
};

/// Trains one SVM per usable window pair and records the chi-square distance
/// between the models probing m-1 and m at month m. Every window uses the
/// seeds carried by `engine` and `svm`, so adjacent windows differ only in
/// their data. Throws DataError when fewer than 3 points result.
Chi2Series build_series(const Corpus& corpus, const EngineConfig& engine,
                        const SvmParams& svm, const SeriesOptions& options);

/// A point is a spike when its z-score against the mean and sample standard
/// deviation of all other points exceeds `z_threshold`. A spike on the last
/// point is marked untestable.
std::vector<SpikeReport> detect_spikes(std::span<const SeriesPoint> points,
                                       double z_threshold);

/// Leave-one-out z-score of point i.
double leave_one_out_zscore(std::span<const double> values, std::size_t i);

/// `month,chi2,is_spike`
void write_series_csv(std::ostream& out, const Chi2Series& series);
void write_series_svg(std::ostream& out, const Chi2Series& series, std::string_view title);

}  // namespace evotrack
