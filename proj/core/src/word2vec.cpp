#include "evotrack/word2vec.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "evotrack/error.hpp"
#include "evotrack/random.hpp"

namespace evotrack {
namespace {

constexpr double kMinLearningRateFraction = 1e-4;

struct NegativeTable {
  std::vector<double> cdf;
  std::vector<int> symbols;

  NegativeTable(const std::vector<double>& counts) {
    double total = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (counts[i] <= 0.0) continue;
      total += std::pow(counts[i], 0.75);
      cdf.push_back(total);
      symbols.push_back(static_cast<int>(i));
    }
    for (double& c : cdf) c /= total;
    if (!cdf.empty()) cdf.back() = 1.0;
  }

  int draw(Rng& rng) const {
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), uniform01(rng));
    const auto i = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
    return symbols[i];
  }
};

double dot(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

void SgnsParams::validate() const {
  if (dim < 1) throw InputError("word2vec", "embedding length must be >= 1");
  if (context_window < 1) throw InputError("word2vec", "context window must be >= 1");
  if (negatives < 1) throw InputError("word2vec", "negative count must be >= 1");
  if (epochs < 1) throw InputError("word2vec", "epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw InputError("word2vec", "learning rate must be > 0");
  if (!(subsample_threshold > 0.0)) throw InputError("word2vec", "subsample threshold must be > 0");
}

double logistic(double x) noexcept {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) noexcept {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

SgnsGradient sgns_gradient(std::span<const double> center, std::span<const double> context,
                           int label) {
  if (center.size() != context.size())
    throw InputError("word2vec", "center and context vectors differ in length");
  if (label != 0 && label != 1) throw InputError("word2vec", "label must be 0 or 1");
  const double s = dot(center.data(), context.data(), center.size());
  SgnsGradient g;
  g.loss = label == 1 ? softplus(-s) : softplus(s);
  const double ds = logistic(s) - label;
  g.center.resize(center.size());
  g.context.resize(center.size());
  for (std::size_t i = 0; i < center.size(); ++i) {
    g.center[i] = ds * context[i];
    g.context[i] = ds * center[i];
  }
  return g;
}

double retention_probability(double frequency, double threshold) noexcept {
  if (frequency <= 0.0) return 1.0;
  const double r = threshold / frequency;
  return std::min(1.0, std::sqrt(r) + r);
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InputError("word2vec", "cosine of vectors of unequal length");
  const double na = std::sqrt(dot(a.data(), a.data(), a.size()));
  const double nb = std::sqrt(dot(b.data(), b.data(), b.size()));
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a.data(), b.data(), a.size()) / (na * nb);
}

Word2VecResult train_word2vec(std::span<const SequenceView> sequences, const Vocabulary& vocab,
                              const SgnsParams& params) {
  params.validate();
  if (vocab.n() != 1) throw InputError("word2vec", "word2vec needs a unigram vocabulary");
  const std::size_t v = vocab.size();
  const std::size_t d = params.dim;

  std::vector<double> counts(v, 0.0);
  double total = 0.0;
  bool has_pair = false;
  for (const auto seq : sequences) {
    has_pair = has_pair || seq.size() >= 2;
    for (int s : seq) {
      if (s < 0 || static_cast<std::size_t>(s) >= v)
        throw InputError("word2vec", "symbol " + std::to_string(s) + " outside vocabulary");
      counts[static_cast<std::size_t>(s)] += 1.0;
      total += 1.0;
    }
  }
  if (!has_pair) throw InputError("word2vec", "need at least one sequence of length >= 2");

  Word2VecResult result{EmbeddingTable(EmbeddingSource::word2vec, vocab.symbols(), d,
                                       std::vector<double>(v * d, 0.0)),
                        {}, {}};
  const auto distinct = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0; });
  if (distinct < 2)
    result.warnings.push_back(
        "single distinct token: negative samples always collide with the context, "
        "so only positive pairs produce gradient");

  Rng rng(params.seed);
  std::vector<double> input(v * d);
  std::vector<double> output(v * d, 0.0);
  const double range = 0.5 / static_cast<double>(d);
  for (double& x : input) x = (2.0 * uniform01(rng) - 1.0) * range;

  std::vector<double> keep(v);
  for (std::size_t i = 0; i < v; ++i)
    keep[i] = retention_probability(counts[i] / total, params.subsample_threshold);

  const NegativeTable negatives(counts);
  const double total_work = static_cast<double>(params.epochs) * total;
  double processed = 0.0;
  std::vector<std::size_t> order(sequences.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<int> kept;
  std::vector<double> grad(d);
  const auto window = static_cast<std::ptrdiff_t>(params.context_window);

  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t pairs = 0;
    for (const std::size_t si : order) {
      const auto seq = sequences[si];
      kept.clear();
      for (int s : seq)
        if (keep[static_cast<std::size_t>(s)] >= 1.0 || uniform01(rng) < keep[static_cast<std::size_t>(s)])
          kept.push_back(s);
      const double lr_start = params.learning_rate *
                              std::max(kMinLearningRateFraction, 1.0 - processed / total_work);
      const double lr_end =
          params.learning_rate *
          std::max(kMinLearningRateFraction,
                   1.0 - (processed + static_cast<double>(seq.size())) / total_work);
      processed += static_cast<double>(seq.size());

      const auto n = static_cast<std::ptrdiff_t>(kept.size());
      for (std::ptrdiff_t i = 0; i < n; ++i) {
        const double lr = n > 1 ? lr_start + (lr_end - lr_start) * static_cast<double>(i) /
                                                 static_cast<double>(n - 1)
                                : lr_start;
        double* center = &input[static_cast<std::size_t>(kept[static_cast<std::size_t>(i)]) * d];
        for (std::ptrdiff_t j = std::max<std::ptrdiff_t>(0, i - window);
             j <= std::min(n - 1, i + window); ++j) {
          if (j == i) continue;
          const int context = kept[static_cast<std::size_t>(j)];
          std::fill(grad.begin(), grad.end(), 0.0);
          double pair_loss = 0.0;
          auto term = [&](int target, int label) {
            double* out = &output[static_cast<std::size_t>(target) * d];
            const double s = dot(center, out, d);
            pair_loss += label == 1 ? softplus(-s) : softplus(s);
            const double g = logistic(s) - label;
            for (std::size_t k = 0; k < d; ++k) {
              grad[k] += g * out[k];
              out[k] -= lr * g * center[k];
            }
          };
          term(context, 1);
          for (std::size_t k = 0; k < params.negatives; ++k) {
            const int neg = negatives.draw(rng);
            if (neg == context) continue;
            term(neg, 0);
          }
          for (std::size_t k = 0; k < d; ++k) center[k] -= lr * grad[k];
          loss_sum += pair_loss;
          ++pairs;
        }
      }
    }
    result.epoch_loss.push_back(pairs ? loss_sum / static_cast<double>(pairs) : 0.0);
  }

  for (double x : input)
    if (!std::isfinite(x)) throw InputError("word2vec", "training diverged (non-finite vector)");
  std::fill(input.end() - static_cast<std::ptrdiff_t>(d), input.end(), 0.0);  // OTHER
  result.table = EmbeddingTable(EmbeddingSource::word2vec, vocab.symbols(), d, std::move(input));
  return result;
}

Word2VecResult train_word2vec(std::span<const Sample> samples, const Vocabulary& vocab,
                              const SgnsParams& params) {
  std::vector<std::vector<int>> encoded;
  encoded.reserve(samples.size());
  for (const auto& s : samples) encoded.push_back(encode(s.opcodes, vocab));
  std::vector<SequenceView> views(encoded.begin(), encoded.end());
  return train_word2vec(views, vocab, params);
}

double sgns_corpus_loss(std::span<const SequenceView> sequences, std::span<const double> input,
                        std::span<const double> output, std::size_t vocab_size,
                        const SgnsParams& params) {
  const std::size_t d = params.dim;
  if (input.size() != vocab_size * d || output.size() != vocab_size * d)
    throw InputError("word2vec", "vector tables do not match vocabulary size and dim");
  std::vector<double> counts(vocab_size, 0.0);
  for (const auto seq : sequences)
    for (int s : seq) counts[static_cast<std::size_t>(s)] += 1.0;
  const NegativeTable negatives(counts);
  Rng rng(derive_seed(params.seed, "sgns-eval"));
  const auto window = static_cast<std::ptrdiff_t>(params.context_window);
  double loss = 0.0;
  std::size_t pairs = 0;
  for (const auto seq : sequences) {
    const auto n = static_cast<std::ptrdiff_t>(seq.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const double* center = &input[static_cast<std::size_t>(seq[static_cast<std::size_t>(i)]) * d];
      for (std::ptrdiff_t j = std::max<std::ptrdiff_t>(0, i - window);
           j <= std::min(n - 1, i + window); ++j) {
        if (j == i) continue;
        const int context = seq[static_cast<std::size_t>(j)];
        loss += softplus(-dot(center, &output[static_cast<std::size_t>(context) * d], d));
        for (std::size_t k = 0; k < params.negatives; ++k) {
          const int neg = negatives.draw(rng);
          if (neg == context) continue;
          loss += softplus(dot(center, &output[static_cast<std::size_t>(neg) * d], d));
        }
        ++pairs;
      }
    }
  }
  return pairs ? loss / static_cast<double>(pairs) : 0.0;
}

}  // namespace evotrack
