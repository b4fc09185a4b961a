#include "evotrack/features.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <string>

#include "evotrack/error.hpp"

namespace evotrack {
namespace {

void join_gram(std::span<const std::string> tokens, std::string& out) {
  out.clear();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
}

}  // namespace

std::string_view to_string(Engine engine) {
  switch (engine) {
    case Engine::raw: return "raw";
    case Engine::ngram: return "ngram";
    case Engine::word2vec: return "word2vec";
    case Engine::hmm2vec: return "hmm2vec";
  }
  return "unknown";
}

Vocabulary::Vocabulary(std::vector<std::string> ranked, int n) : symbols_(std::move(ranked)), n_(n) {
  if (n < 1) throw InputError("features", "gram order must be >= 1");
  symbols_.emplace_back(kOther);
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    if (!index_.emplace(symbols_[i], i).second)
      throw InputError("features", "duplicate vocabulary symbol '" + symbols_[i] + "'");
  }
}

std::size_t Vocabulary::index_of(std::string_view gram) const {
  const auto it = index_.find(gram);
  return it == index_.end() ? other_index() : it->second;
}

void Vocabulary::write(std::ostream& out) const {
  out << "n=" << n_ << '\n';
  for (const auto& s : symbols_) out << s << '\n';
}

Vocabulary Vocabulary::read(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("n=", 0) != 0)
    throw InputError("features", "vocabulary text must start with n=<order>");
  const int n = std::stoi(line.substr(2));
  std::vector<std::string> ranked;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line == kOther) break;
    ranked.push_back(line);
  }
  return Vocabulary(std::move(ranked), n);
}

VocabularyBuilder::VocabularyBuilder(int n) : n_(n) {
  if (n < 1) throw InputError("features", "gram order must be >= 1");
}

void VocabularyBuilder::add(std::span<const std::string> opcodes) {
  const auto n = static_cast<std::size_t>(n_);
  if (opcodes.size() < n) return;
  std::string gram;
  for (std::size_t i = 0; i + n <= opcodes.size(); ++i) {
    join_gram(opcodes.subspan(i, n), gram);
    ++counts_[gram];
  }
}

Vocabulary VocabularyBuilder::build(std::size_t k) const {
  if (k < 1) throw InputError("features", "vocabulary size K must be >= 1");
  if (counts_.empty())
    throw DataError("features",
                    "no sample is long enough for " + std::to_string(n_) + "-grams",
                    "lower the gram order");
  std::vector<std::pair<std::string, std::size_t>> ranked(counts_.begin(), counts_.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  if (ranked.size() > k) ranked.resize(k);
  std::vector<std::string> symbols;
  symbols.reserve(ranked.size());
  for (auto& [gram, count] : ranked) symbols.push_back(gram);
  return Vocabulary(std::move(symbols), n_);
}

Vocabulary build_vocabulary(std::span<const Sample> samples, std::size_t k, int n) {
  VocabularyBuilder builder(n);
  for (const auto& s : samples) builder.add(s.opcodes);
  return builder.build(k);
}

FeatureVector frequency_vector(std::span<const std::string> opcodes, const Vocabulary& vocab,
                               CountMode mode) {
  const auto n = static_cast<std::size_t>(vocab.n());
  if (opcodes.size() < n)
    throw InputError("features", "sample of length " + std::to_string(opcodes.size()) +
                                     " is shorter than gram order " + std::to_string(n));
  FeatureVector fv;
  fv.engine = n == 1 ? Engine::raw : Engine::ngram;
  fv.values.assign(vocab.size(), 0.0);
  const std::size_t grams = opcodes.size() - n + 1;
  std::string gram;
  for (std::size_t i = 0; i < grams; ++i) {
    if (n == 1) {
      fv.values[vocab.index_of(opcodes[i])] += 1.0;
    } else {
      join_gram(opcodes.subspan(i, n), gram);
      fv.values[vocab.index_of(gram)] += 1.0;
    }
  }
  if (mode == CountMode::presence) {
    const auto present = static_cast<double>(
        std::count_if(fv.values.begin(), fv.values.end(), [](double c) { return c > 0.0; }));
    for (double& v : fv.values) v = v > 0.0 ? 1.0 / present : 0.0;
  } else {
    for (double& v : fv.values) v /= static_cast<double>(grams);
  }
  return fv;
}

std::vector<int> encode(std::span<const std::string> opcodes, const Vocabulary& vocab) {
  if (vocab.n() != 1) throw InputError("features", "encoding requires a unigram vocabulary");
  std::vector<int> out;
  out.reserve(opcodes.size());
  for (const auto& op : opcodes) out.push_back(static_cast<int>(vocab.index_of(op)));
  return out;
}

EmbeddingTable::EmbeddingTable(EmbeddingSource source, std::vector<std::string> symbols,
                               std::size_t dim, std::vector<double> values)
    : source_(source), symbols_(std::move(symbols)), dim_(dim), values_(std::move(values)) {
  if (dim_ < 1) throw InputError("features", "embedding length must be >= 1");
  if (values_.size() != symbols_.size() * dim_)
    throw InputError("features", "embedding table holds " + std::to_string(values_.size()) +
                                     " values for " + std::to_string(symbols_.size()) +
                                     " symbols of length " + std::to_string(dim_));
  for (double v : values_)
    if (!std::isfinite(v)) throw InputError("features", "embedding table has a non-finite entry");
}

void EmbeddingTable::write(std::ostream& out) const {
  out << std::setprecision(17);
  for (std::size_t i = 0; i < symbols_.size(); ++i) {
    out << symbols_[i];
    for (double v : row(i)) out << ' ' << v;
    out << '\n';
  }
}

FeatureVector embed_frequencies(const FeatureVector& frequencies, const Vocabulary& vocab,
                                const EmbeddingTable& table) {
  if (vocab.n() != 1) throw InputError("features", "embeddings require a unigram vocabulary");
  if (frequencies.dim() != vocab.size())
    throw InputError("features", "frequency vector does not match the vocabulary");

  // Row of the table for each vocabulary symbol; tables normally share the
  // vocabulary order, otherwise look symbols up by name.
  std::vector<std::size_t> rows(vocab.size());
  const bool aligned = table.symbols() == vocab.symbols();
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    if (aligned) {
      rows[i] = i;
      continue;
    }
    const auto& sym = vocab.symbols()[i];
    const auto it = std::find(table.symbols().begin(), table.symbols().end(), sym);
    if (it == table.symbols().end())
      throw InputError("features", "embedding table has no vector for '" + sym + "'");
    rows[i] = static_cast<std::size_t>(it - table.symbols().begin());
  }

  FeatureVector fv;
  fv.engine = table.source() == EmbeddingSource::word2vec ? Engine::word2vec : Engine::hmm2vec;
  const std::size_t d = table.dim();
  fv.values.assign(vocab.size() * d, 0.0);
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    const double f = frequencies.values[i];
    if (f == 0.0) continue;
    const auto e = table.row(rows[i]);
    for (std::size_t j = 0; j < d; ++j) fv.values[i * d + j] = f * e[j];
  }
  return fv;
}

FeatureVector embed_sample(std::span<const std::string> opcodes, const Vocabulary& vocab,
                           const EmbeddingTable& table) {
  return embed_frequencies(frequency_vector(opcodes, vocab), vocab, table);
}

}  // namespace evotrack
