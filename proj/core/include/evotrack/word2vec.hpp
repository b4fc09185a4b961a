#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "evotrack/features.hpp"

namespace evotrack {

/// Skip-gram with negative sampling.
struct SgnsParams {
  std::size_t dim = 2;
  std::size_t context_window = 5;
  std::size_t negatives = 5;
  std::size_t epochs = 5;
  /// Initial step; decays linearly towards zero over all epochs.
  double learning_rate = 0.025;
  double subsample_threshold = 1e-3;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SgnsGradient {
  std::vector<double> center;
  std::vector<double> context;
  double loss = 0.0;
};

/// Loss and exact gradient of one (center, context, label) term:
/// -log sigma(s) for label 1, -log sigma(-s) for label 0, s = center . context.
SgnsGradient sgns_gradient(std::span<const double> center,
                           std::span<const double> context, int label);

/// Numerically stable log(1 + exp(x)).
double softplus(double x) noexcept;
double logistic(double x) noexcept;

/// Probability of keeping a token of corpus frequency `frequency` under
/// subsampling threshold t: min(1, sqrt(t/f) + t/f).
double retention_probability(double frequency, double threshold) noexcept;

struct Word2VecResult {
  EmbeddingTable table;
  /// Mean loss per (center, context) training pair, one entry per epoch.
  std::vector<double> epoch_loss;
  std::vector<std::string> warnings;
};

/// Trains input-side vectors over encoded sequences (indices of `vocab`, n=1).
/// OTHER is exported as the zero vector.
Word2VecResult train_word2vec(std::span<const SequenceView> sequences,
                              const Vocabulary& vocab, const SgnsParams& params);

Word2VecResult train_word2vec(std::span<const Sample> samples, const Vocabulary& vocab,
                              const SgnsParams& params);

/// Mean SGNS loss of the given input/output vectors on every positive pair
/// and a fixed seeded set of negatives; no subsampling. Used for diagnostics.
double sgns_corpus_loss(std::span<const SequenceView> sequences,
                        std::span<const double> input, std::span<const double> output,
                        std::size_t vocab_size, const SgnsParams& params);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

}  // namespace evotrack
