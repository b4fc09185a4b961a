#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "evotrack/error.hpp"
#include "evotrack/features.hpp"

namespace evotrack {

struct SvmParams {
  double lambda = 1e-2;
  std::size_t epochs = 50;
  std::uint64_t seed = 1;
  /// Scale each hinge term by n / (2 * n_class).
  bool class_balance = true;

  void validate() const;
};

/// Linear SVM weights for one time window. The bias is kept apart from the
/// weights and is not regularized.
struct WeightVector {
  std::vector<double> weights;
  double bias = 0.0;
  std::string window_id;
  Engine engine = Engine::raw;

  std::size_t dim() const noexcept { return weights.size(); }
};

struct SvmResult {
  WeightVector model;
  /// Regularized hinge objective of the returned model.
  double objective = 0.0;
  /// Objective of the model held at each epoch end.
  std::vector<double> epoch_objective;
};

/// Thrown when one class has no samples; callers treat it as "skip window".
class EmptyClassError : public InputError {
public:
  using InputError::InputError;
};

/// Primal stochastic subgradient descent with step 1/(lambda t) on
///   lambda/2 |w|^2 + 1/n sum c_i max(0, 1 - y_i (w.x_i + b)).
/// Positives are labelled +1. The bias follows a 1/sqrt(t) step during
/// training. Candidate models are the iterate at each epoch end and the
/// average of the iterates over the second half of training, each paired with
/// its exact hinge-minimizing bias; the one with the lowest objective is
/// returned.
SvmResult train_linear_svm(std::span<const FeatureVector> positives,
                           std::span<const FeatureVector> negatives,
                           const SvmParams& params, std::string window_id = {});

double decision_value(const WeightVector& model, std::span<const double> x);

double svm_objective(const WeightVector& model, std::span<const FeatureVector> positives,
                     std::span<const FeatureVector> negatives, const SvmParams& params);

/// `window,engine,bias,w0,...` row.
void write_weights_csv_row(std::ostream& out, const WeightVector& model);

}  // namespace evotrack
