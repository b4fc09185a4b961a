#include "evotrack/timeline.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>

#include "evotrack/error.hpp"
#include "evotrack/parallel.hpp"
#include "evotrack/svg.hpp"

namespace evotrack {
namespace {

constexpr int kYearMonths = 12;

struct WindowOutcome {
  WindowReport report;
  std::optional<WeightVector> weights;
};

}  // namespace

std::vector<WindowPair> enumerate_windows(const Corpus& corpus) {
  const int span = corpus.span_months();
  if (span < kYearMonths + 1)
    throw DataError("timeline",
                    "corpus spans " + std::to_string(span) + " months (" +
                        corpus.first_month().str() + " to " + corpus.last_month().str() +
                        "); at least 13 are required",
                    "extend the corpus so that one year precedes at least one probe month");
  std::vector<WindowPair> pairs;
  for (Month probe = corpus.first_month() + kYearMonths; probe <= corpus.last_month(); ++probe) {
    WindowPair pair;
    pair.year_first = probe - kYearMonths;
    pair.year_last = probe - 1;
    pair.probe = probe;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      const Month m = corpus[i].month();
      if (m >= pair.year_first && m <= pair.year_last) pair.positives.push_back(i);
      else if (m == probe) pair.negatives.push_back(i);
    }
    pair.skip = pair.positives.empty() || pair.negatives.empty();
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

std::vector<double> chi2_transform(std::span<const double> weights, double floor) {
  std::vector<double> p(weights.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::abs(weights[i]);
    total += p[i];
  }
  if (total > 0.0)
    for (double& v : p) v /= total;
  else
    std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(p.size()));
  double renorm = 0.0;
  for (double& v : p) {
    v = std::max(v, floor);
    renorm += v;
  }
  for (double& v : p) v /= renorm;
  return p;
}

double chi2_distance(std::span<const double> previous, std::span<const double> current) {
  if (previous.size() != current.size())
    throw InputError("timeline", "cannot compare weight vectors of dimension " +
                                     std::to_string(previous.size()) + " and " +
                                     std::to_string(current.size()));
  if (previous.empty()) throw InputError("timeline", "empty weight vectors");
  const auto e = chi2_transform(previous);
  const auto o = chi2_transform(current);
  double chi2 = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) chi2 += (o[i] - e[i]) * (o[i] - e[i]) / e[i];
  return chi2;
}

double chi2_distance(const WeightVector& previous, const WeightVector& current) {
  if (previous.engine != current.engine)
    throw InputError("timeline", "weight vectors come from different engines");
  return chi2_distance(previous.weights, current.weights);
}

EmbeddingScope EngineConfig::resolved_embedding_scope() const {
  if (embedding_scope != EmbeddingScope::automatic) return embedding_scope;
  return engine == Engine::word2vec ? EmbeddingScope::global : EmbeddingScope::per_window;
}

void EngineConfig::validate() const {
  if (vocabulary_size < 1) throw ConfigError("features", "vocabulary size must be >= 1");
  if (engine == Engine::ngram && ngram < 2)
    throw ConfigError("features", "ngram engine needs n >= 2");
  if (engine == Engine::word2vec) sgns.validate();
  if (engine == Engine::hmm2vec) hmm.validate();
}

std::string describe(const EngineConfig& config) {
  switch (config.engine) {
    case Engine::raw: return "raw";
    case Engine::ngram: return "ngram(" + std::to_string(config.ngram) + ")";
    case Engine::word2vec: return "word2vec(" + std::to_string(config.sgns.dim) + ")";
    case Engine::hmm2vec: return "hmm2vec(" + std::to_string(config.hmm.states) + ")";
  }
  return "unknown";
}

Chi2Series build_series(const Corpus& corpus, const EngineConfig& engine, const SvmParams& svm,
                        const SeriesOptions& options) {
  engine.validate();
  svm.validate();
  const auto windows = enumerate_windows(corpus);
  const int n = engine.gram_order();
  const bool embedded = engine.engine == Engine::word2vec || engine.engine == Engine::hmm2vec;
  const auto samples = corpus.samples();

  std::optional<Vocabulary> global_vocab;
  std::vector<std::optional<FeatureVector>> global_freq(samples.size());
  std::vector<std::vector<int>> encoded;
  if (engine.vocabulary_scope == VocabularyScope::global || embedded) {
    global_vocab = build_vocabulary(samples, engine.vocabulary_size, n);
    for (std::size_t i = 0; i < samples.size(); ++i)
      if (samples[i].opcodes.size() >= static_cast<std::size_t>(n))
        global_freq[i] = frequency_vector(samples[i].opcodes, *global_vocab, engine.count_mode);
    if (embedded) {
      encoded.reserve(samples.size());
      for (const auto& s : samples) encoded.push_back(encode(s.opcodes, *global_vocab));
    }
  }

  auto train_embedding = [&](const std::vector<std::size_t>& idx) {
    std::vector<SequenceView> views;
    views.reserve(idx.size());
    for (std::size_t i : idx) views.emplace_back(encoded[i]);
    if (engine.engine == Engine::word2vec)
      return train_word2vec(views, *global_vocab, engine.sgns).table;
    auto trained = train_hmm(views, global_vocab->size(), engine.hmm);
    return hmm2vec(trained.model, *global_vocab);
  };

  std::optional<EmbeddingTable> global_table;
  if (embedded && engine.resolved_embedding_scope() == EmbeddingScope::global) {
    std::vector<std::size_t> all(samples.size());
    std::iota(all.begin(), all.end(), 0);
    global_table = train_embedding(all);
  }

  std::vector<WindowOutcome> outcomes(windows.size());
  parallel_for(windows.size(), options.workers, [&](std::size_t w) {
    const auto& pair = windows[w];
    auto& out = outcomes[w];
    out.report.probe = pair.probe;
    if (pair.skip) {
      out.report.skipped = true;
      out.report.note = pair.negatives.empty() ? "empty probe month" : "empty year class";
      return;
    }

    std::optional<Vocabulary> local_vocab;
    if (!global_vocab) {
      VocabularyBuilder builder(n);
      for (std::size_t i : pair.positives) builder.add(samples[i].opcodes);
      local_vocab = builder.build(engine.vocabulary_size);
    }
    const Vocabulary& vocab = global_vocab ? *global_vocab : *local_vocab;

    std::optional<EmbeddingTable> local_table;
    if (embedded && !global_table) local_table = train_embedding(pair.positives);
    const EmbeddingTable* table = global_table ? &*global_table : local_table ? &*local_table : nullptr;

    auto features = [&](const std::vector<std::size_t>& idx) {
      std::vector<FeatureVector> out_vectors;
      out_vectors.reserve(idx.size());
      for (std::size_t i : idx) {
        std::optional<FeatureVector> freq;
        if (global_vocab) {
          freq = global_freq[i];
        } else if (samples[i].opcodes.size() >= static_cast<std::size_t>(n)) {
          freq = frequency_vector(samples[i].opcodes, vocab, engine.count_mode);
        }
        if (!freq) {
          ++out.report.excluded_short;
          continue;
        }
        out_vectors.push_back(table ? embed_frequencies(*freq, vocab, *table) : std::move(*freq));
      }
      return out_vectors;
    };
    const auto pos = features(pair.positives);
    const auto neg = features(pair.negatives);
    out.report.positives = pos.size();
    out.report.negatives = neg.size();
    if (pos.empty() || neg.empty()) {
      out.report.skipped = true;
      out.report.note = "class empty after excluding short samples";
      return;
    }
    auto result = train_linear_svm(pos, neg, svm, pair.probe.str());
    out.report.objective = result.objective;
    out.weights = std::move(result.model);
  });

  Chi2Series series;
  series.engine = engine.engine;
  for (std::size_t w = 0; w < outcomes.size(); ++w) {
    series.windows.push_back(outcomes[w].report);
    if (outcomes[w].weights) series.weights.push_back(*outcomes[w].weights);
    if (w == 0 || !outcomes[w].weights || !outcomes[w - 1].weights) continue;
    series.points.push_back(
        {windows[w].probe, chi2_distance(*outcomes[w - 1].weights, *outcomes[w].weights)});
  }
  if (series.points.size() < 3)
    throw DataError("timeline",
                    "only " + std::to_string(series.points.size()) +
                        " chi-square points could be computed; at least 3 are needed",
                    "use a corpus with more consecutive populated months");
  return series;
}

double leave_one_out_zscore(std::span<const double> values, std::size_t i) {
  const std::size_t others = values.size() - 1;
  if (others == 0) return 0.0;
  double mean = 0.0;
  for (std::size_t j = 0; j < values.size(); ++j)
    if (j != i) mean += values[j];
  mean /= static_cast<double>(others);
  double var = 0.0;
  for (std::size_t j = 0; j < values.size(); ++j)
    if (j != i) var += (values[j] - mean) * (values[j] - mean);
  const double sd = others > 1 ? std::sqrt(var / static_cast<double>(others - 1)) : 0.0;
  const double diff = values[i] - mean;
  if (sd <= 1e-12 * std::max(1.0, std::abs(mean))) {
    if (std::abs(diff) <= 1e-12 * std::max(1.0, std::abs(mean))) return 0.0;
    return diff > 0 ? std::numeric_limits<double>::infinity()
                    : -std::numeric_limits<double>::infinity();
  }
  return diff / sd;
}

std::vector<SpikeReport> detect_spikes(std::span<const SeriesPoint> points, double z_threshold) {
  if (points.size() < 3)
    throw DataError("timeline", "spike detection needs at least 3 points");
  std::vector<double> values;
  values.reserve(points.size());
  for (const auto& p : points) values.push_back(p.chi2);
  std::vector<SpikeReport> spikes;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double z = leave_one_out_zscore(values, i);
    if (!(z > z_threshold)) continue;
    SpikeReport spike;
    spike.month = points[i].month;
    spike.chi2 = points[i].chi2;
    spike.zscore = z;
    if (i + 1 == values.size()) spike.confirmed = Confirmation::untestable;
    spikes.push_back(std::move(spike));
  }
  return spikes;
}

void write_series_csv(std::ostream& out, const Chi2Series& series) {
  out << "month,chi2,is_spike\n" << std::setprecision(12);
  for (const auto& p : series.points) {
    const bool spike = std::any_of(series.spikes.begin(), series.spikes.end(),
                                   [&](const SpikeReport& s) { return s.month == p.month; });
    out << p.month.str() << ',' << p.chi2 << ',' << (spike ? 1 : 0) << '\n';
  }
}

void write_series_svg(std::ostream& out, const Chi2Series& series, std::string_view title) {
  svg::Trace trace{"chi-square", "#1f77b4", {}, true};
  svg::ChartOptions opt;
  opt.title = std::string(title);
  opt.x_label = "probe month";
  opt.y_label = "chi-square distance";
  for (std::size_t i = 0; i < series.points.size(); ++i) {
    trace.y.push_back(series.points[i].chi2);
    opt.x_ticks.push_back(series.points[i].month.str());
    for (const auto& s : series.spikes)
      if (s.month == series.points[i].month) opt.highlights.push_back(i);
  }
  svg::write_chart(out, {trace}, opt);
}

}  // namespace evotrack
