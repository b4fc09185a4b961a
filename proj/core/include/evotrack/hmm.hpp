#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "evotrack/features.hpp"

namespace evotrack {

/// Dense row-major matrix of doubles.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  bool operator==(const Matrix&) const = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Discrete-observation HMM lambda = (A, B, pi).
struct HmmModel {
  Matrix transition;           // A, N x N
  Matrix emission;             // B, N x M
  std::vector<double> initial; // pi, N
  /// Observation symbol for each column of B; may be empty for purely
  /// numeric models.
  std::vector<std::string> symbols;

  std::size_t states() const noexcept { return transition.rows(); }
  std::size_t alphabet() const noexcept { return emission.cols(); }

  /// Throws InputError unless shapes agree and every row is stochastic
  /// within `tolerance`.
  void validate(double tolerance = 1e-9) const;

  bool operator==(const HmmModel&) const = default;
};

struct HmmTrainConfig {
  std::size_t states = 2;
  std::size_t max_iterations = 100;
  /// Stop once the per-symbol log-likelihood gain falls below this.
  double min_log_improvement = 1e-4;
  /// Number of independently initialized runs; the best one is kept.
  std::size_t restarts = 1;
  std::uint64_t seed = 1;

  void validate() const;
};

struct HmmTrainResult {
  HmmModel model;
  /// Total log-likelihood of the kept run before each re-estimation,
  /// followed by that of the returned model.
  std::vector<double> log_likelihood;
  std::size_t iterations = 0;
  std::size_t best_restart = 0;
  /// Final total log-likelihood of every restart.
  std::vector<double> restart_log_likelihood;
};

/// Estimates and transition probabilities never drop below this.
inline constexpr double kProbabilityFloor = 1e-10;

/// Baum-Welch over many sequences, pooling expected counts each iteration.
/// `alphabet` is M; every symbol must be < M.
HmmTrainResult train_hmm(std::span<const SequenceView> sequences, std::size_t alphabet,
                         const HmmTrainConfig& config);

/// Seeded near-uniform starting point used by train_hmm.
HmmModel initial_model(std::size_t states, std::size_t alphabet, std::uint64_t seed);

/// One Baum-Welch re-estimation. Returns the total log-likelihood of `model`.
double baum_welch_step(const HmmModel& model, std::span<const SequenceView> sequences,
                       HmmModel& next);

/// log P(O | lambda) by the scaled forward algorithm.
double log_likelihood(const HmmModel& model, SequenceView sequence);

/// Log-likelihood per observation: log P(O | lambda) / T.
double score_llpo(const HmmModel& model, SequenceView sequence);

std::vector<double> stationary_distribution(const Matrix& transition);

/// Reorders hidden states by descending stationary probability (ties: larger
/// first emission entry first).
HmmModel canonicalize(const HmmModel& model);

/// Column m of the canonicalized B becomes the embedding of symbol m.
EmbeddingTable hmm2vec(const HmmModel& model, const Vocabulary& vocab);

/// Plain-text dump: `N M`, then N rows of A, N rows of B, pi, and a final
/// line of M symbols when the model carries them.
void write_model(std::ostream& out, const HmmModel& model);
HmmModel read_model(std::istream& in);

}  // namespace evotrack
