#include "evotrack/svm.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>

#include "evotrack/error.hpp"
#include "evotrack/random.hpp"

namespace evotrack {
namespace {

struct Labeled {
  const FeatureVector* x;
  double y;
  double cost;
};

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Exact minimizer over b of sum_i c_i * max(0, 1 - y_i * (s_i + b)). The
// objective is convex and piecewise linear; its slope starts at -sum(c_pos)
// and rises by c_i at each breakpoint.
double best_bias(std::span<const Labeled> data, std::span<const double> w) {
  std::vector<std::pair<double, double>> breaks;
  breaks.reserve(data.size());
  double slope = 0.0;
  for (const auto& d : data) {
    const double s = dot(w, d.x->values);
    breaks.emplace_back(d.y - s, d.cost);
    if (d.y > 0) slope -= d.cost;
  }
  std::sort(breaks.begin(), breaks.end());
  for (std::size_t i = 0; i < breaks.size(); ++i) {
    slope += breaks[i].second;
    if (slope > 1e-12) return breaks[i].first;
    if (slope >= -1e-12)
      return i + 1 < breaks.size() ? 0.5 * (breaks[i].first + breaks[i + 1].first)
                                   : breaks[i].first;
  }
  return breaks.empty() ? 0.0 : breaks.back().first;
}

}  // namespace

void SvmParams::validate() const {
  if (!(lambda > 0.0)) throw InputError("svm", "lambda must be > 0");
  if (epochs < 1) throw InputError("svm", "epochs must be >= 1");
}

double decision_value(const WeightVector& model, std::span<const double> x) {
  if (x.size() != model.dim()) throw InputError("svm", "feature dimension mismatch");
  return dot(model.weights, x) + model.bias;
}

double svm_objective(const WeightVector& model, std::span<const FeatureVector> positives,
                     std::span<const FeatureVector> negatives, const SvmParams& params) {
  const double n = static_cast<double>(positives.size() + negatives.size());
  const double c_pos = params.class_balance ? n / (2.0 * static_cast<double>(positives.size())) : 1.0;
  const double c_neg = params.class_balance ? n / (2.0 * static_cast<double>(negatives.size())) : 1.0;
  double hinge = 0.0;
  for (const auto& x : positives) hinge += c_pos * std::max(0.0, 1.0 - decision_value(model, x.values));
  for (const auto& x : negatives) hinge += c_neg * std::max(0.0, 1.0 + decision_value(model, x.values));
  return 0.5 * params.lambda * dot(model.weights, model.weights) + hinge / n;
}

SvmResult train_linear_svm(std::span<const FeatureVector> positives,
                           std::span<const FeatureVector> negatives, const SvmParams& params,
                           std::string window_id) {
  params.validate();
  if (positives.empty() || negatives.empty())
    throw EmptyClassError("svm", "window " + window_id + " has an empty class");
  const std::size_t dim = positives.front().dim();
  const Engine engine = positives.front().engine;
  for (auto group : {positives, negatives})
    for (const auto& x : group) {
      if (x.dim() != dim)
        throw InputError("svm", "feature dimension mismatch (" + std::to_string(x.dim()) +
                                    " vs " + std::to_string(dim) + ")");
      if (x.engine != engine) throw InputError("svm", "feature vectors from different engines");
    }

  const double n = static_cast<double>(positives.size() + negatives.size());
  const double c_pos = params.class_balance ? n / (2.0 * static_cast<double>(positives.size())) : 1.0;
  const double c_neg = params.class_balance ? n / (2.0 * static_cast<double>(negatives.size())) : 1.0;
  std::vector<Labeled> data;
  data.reserve(positives.size() + negatives.size());
  for (const auto& x : positives) data.push_back({&x, 1.0, c_pos});
  for (const auto& x : negatives) data.push_back({&x, -1.0, c_neg});

  Rng rng(params.seed);
  std::vector<double> w(dim, 0.0), tail_sum(dim, 0.0);
  double b = 0.0;
  std::size_t tail_count = 0;
  const std::size_t tail_start = (params.epochs / 2) * data.size();
  std::size_t t = 0;

  SvmResult result;
  result.model.window_id = std::move(window_id);
  result.model.engine = engine;
  WeightVector candidate{{}, 0.0, result.model.window_id, engine};
  double best = std::numeric_limits<double>::infinity();
  auto consider = [&](std::vector<double> weights, double count) {
    for (double& v : weights) v /= count;
    candidate.weights = std::move(weights);
    candidate.bias = best_bias(data, candidate.weights);
    const double objective = svm_objective(candidate, positives, negatives, params);
    if (objective < best) {
      best = objective;
      result.model.weights = candidate.weights;
      result.model.bias = candidate.bias;
    }
  };

  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    std::shuffle(data.begin(), data.end(), rng);
    for (const auto& sample : data) {
      ++t;
      const double eta = 1.0 / (params.lambda * static_cast<double>(t));
      const auto& x = sample.x->values;
      const double margin = sample.y * (dot(w, x) + b);
      const double shrink = 1.0 - eta * params.lambda;
      for (double& wi : w) wi *= shrink;
      if (margin < 1.0) {
        const double step = eta * sample.cost * sample.y;
        for (std::size_t i = 0; i < dim; ++i) w[i] += step * x[i];
        b += sample.cost * sample.y / std::sqrt(static_cast<double>(t));
      }
      if (t > tail_start) {
        for (std::size_t i = 0; i < dim; ++i) tail_sum[i] += w[i];
        ++tail_count;
      }
    }
    consider(w, 1.0);
    if (epoch + 1 == params.epochs) consider(tail_sum, static_cast<double>(tail_count));
    result.epoch_objective.push_back(best);
  }

  for (double v : result.model.weights)
    if (!std::isfinite(v)) throw InputError("svm", "training produced non-finite weights");
  result.objective = best;
  return result;
}

void write_weights_csv_row(std::ostream& out, const WeightVector& model) {
  out << std::setprecision(10) << model.window_id << ',' << to_string(model.engine) << ','
      << model.bias;
  for (double v : model.weights) out << ',' << v;
  out << '\n';
}

}  // namespace evotrack
