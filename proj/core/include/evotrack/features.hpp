#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "evotrack/corpus.hpp"

namespace evotrack {

/// Feature engine that produced a vector (and, downstream, the SVM weights).
enum class Engine { raw, ngram, word2vec, hmm2vec };

std::string_view to_string(Engine engine);

/// Encoded observation sequence: indices into a Vocabulary.
using SequenceView = std::span<const int>;

/// Top-K grams of a training set in descending count order (ties broken
/// lexicographically), followed by a catch-all OTHER symbol.
class Vocabulary {
public:
  static constexpr std::string_view kOther = "<other>";

  /// `ranked` must not contain kOther; it is appended.
  Vocabulary(std::vector<std::string> ranked, int n);

  int n() const noexcept { return n_; }
  std::size_t size() const noexcept { return symbols_.size(); }
  const std::vector<std::string>& symbols() const noexcept { return symbols_; }
  std::size_t other_index() const noexcept { return symbols_.size() - 1; }

  /// Index of a gram (tokens joined by a single space), or other_index().
  std::size_t index_of(std::string_view gram) const;

  /// One symbol per line, OTHER included, preceded by an `n=<n>` line.
  void write(std::ostream& out) const;
  static Vocabulary read(std::istream& in);

  bool operator==(const Vocabulary& other) const {
    return n_ == other.n_ && symbols_ == other.symbols_;
  }

private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, std::size_t, Hash, std::equal_to<>> index_;
  int n_ = 1;
};

/// Counts overlapping n-grams incrementally.
class VocabularyBuilder {
public:
  explicit VocabularyBuilder(int n);

  void add(std::span<const std::string> opcodes);
  /// Throws DataError when no sequence was long enough to yield a gram.
  Vocabulary build(std::size_t k) const;

private:
  int n_;
  std::unordered_map<std::string, std::size_t> counts_;
};

Vocabulary build_vocabulary(std::span<const Sample> samples, std::size_t k, int n);

/// Relative-frequency feature vector (or normalized presence indicators).
struct FeatureVector {
  std::vector<double> values;
  Engine engine = Engine::raw;

  std::size_t dim() const noexcept { return values.size(); }
};

enum class CountMode { frequency, presence };

/// Entry i is the share of the sample's overlapping grams that map to symbol i
/// (unknown grams count toward OTHER). In presence mode each present symbol
/// gets 1/(number of present symbols). Throws InputError when the sample is
/// shorter than vocab.n().
FeatureVector frequency_vector(std::span<const std::string> opcodes,
                               const Vocabulary& vocab,
                               CountMode mode = CountMode::frequency);

/// Maps each opcode to its vocabulary index. Requires vocab.n() == 1.
std::vector<int> encode(std::span<const std::string> opcodes, const Vocabulary& vocab);

enum class EmbeddingSource { word2vec, hmm2vec };

/// Fixed-length vector per vocabulary symbol, stored row-major in vocabulary
/// order.
class EmbeddingTable {
public:
  EmbeddingTable(EmbeddingSource source, std::vector<std::string> symbols,
                 std::size_t dim, std::vector<double> values);

  EmbeddingSource source() const noexcept { return source_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return symbols_.size(); }
  const std::vector<std::string>& symbols() const noexcept { return symbols_; }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * dim_, dim_};
  }
  std::span<double> row(std::size_t i) { return {values_.data() + i * dim_, dim_}; }
  std::span<const double> values() const noexcept { return values_; }

  /// `token v1 ... vd` per line.
  void write(std::ostream& out) const;

  bool operator==(const EmbeddingTable&) const = default;

private:
  EmbeddingSource source_;
  std::vector<std::string> symbols_;
  std::size_t dim_;
  std::vector<double> values_;
};

/// Concatenation, in vocabulary order, of each symbol's embedding scaled by the
/// symbol's relative frequency in the sample.
FeatureVector embed_sample(std::span<const std::string> opcodes, const Vocabulary& vocab,
                           const EmbeddingTable& table);

/// Same assembly starting from an existing n=1 frequency vector.
FeatureVector embed_frequencies(const FeatureVector& frequencies,
                                const Vocabulary& vocab, const EmbeddingTable& table);

}  // namespace evotrack
