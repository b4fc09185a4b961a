#pragma once

// Independent reference implementations used to check the library. They are
// deliberately naive: exhaustive enumeration, direct formula evaluation and
// finite differences.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace oracle {

using Mat = std::vector<std::vector<double>>;

// P(O | lambda) summed over all N^T state paths.
inline double brute_force_probability(const Mat& a, const Mat& b, const std::vector<double>& pi,
                                      const std::vector<int>& obs) {
  const std::size_t n = pi.size();
  const std::size_t t_len = obs.size();
  std::vector<std::size_t> path(t_len, 0);
  double total = 0.0;
  while (true) {
    double p = pi[path[0]] * b[path[0]][static_cast<std::size_t>(obs[0])];
    for (std::size_t t = 1; t < t_len; ++t)
      p *= a[path[t - 1]][path[t]] * b[path[t]][static_cast<std::size_t>(obs[t])];
    total += p;
    std::size_t k = 0;
    while (k < t_len && ++path[k] == n) path[k++] = 0;
    if (k == t_len) break;
  }
  return total;
}

// Central difference of f along every coordinate of x.
inline std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                            std::vector<double> x, double h = 1e-5) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f(x);
    x[i] = keep - h;
    const double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// -log sigma(s) for label 1, -log sigma(-s) for label 0, written directly.
inline double sgns_term(double s, int label) {
  return label == 1 ? std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
}

// sum (o_i - e_i)^2 / e_i on already transformed distributions.
inline double pearson(const std::vector<double>& e, const std::vector<double>& o) {
  double s = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) s += (o[i] - e[i]) * (o[i] - e[i]) / e[i];
  return s;
}

inline double evolution_magnitude(const std::vector<double>& correct,
                                  const std::vector<double>& cross) {
  double s = 0.0;
  for (std::size_t i = 0; i < correct.size(); ++i) {
    const double c = std::fabs(correct[i]);
    const double x = std::fabs(cross[i]);
    s += (x - c) * (x - c) / std::max(c, 1e-12);
  }
  return s / static_cast<double>(correct.size());
}

// z-score of values[i] against the mean and sample standard deviation of the
// remaining values, written out term by term.
inline double loo_z(const std::vector<double>& values, std::size_t i) {
  std::vector<double> rest;
  for (std::size_t j = 0; j < values.size(); ++j)
    if (j != i) rest.push_back(values[j]);
  const double mean = std::accumulate(rest.begin(), rest.end(), 0.0) / static_cast<double>(rest.size());
  double ss = 0.0;
  for (double v : rest) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(rest.size() - 1));
  return (values[i] - mean) / sd;
}

struct Point2 {
  double x, y;
  int label;  // +1 / -1
};

// Class-balanced regularized hinge objective of a 2-D linear model.
inline double svm_objective2(const std::vector<Point2>& pts, double lambda, double w0, double w1,
                             double b) {
  double npos = 0, nneg = 0;
  for (const auto& p : pts) (p.label > 0 ? npos : nneg) += 1;
  const double n = npos + nneg;
  double hinge = 0.0;
  for (const auto& p : pts) {
    const double c = n / (2.0 * (p.label > 0 ? npos : nneg));
    hinge += c * std::max(0.0, 1.0 - p.label * (w0 * p.x + w1 * p.y + b));
  }
  return 0.5 * lambda * (w0 * w0 + w1 * w1) + hinge / n;
}

// Grid search over direction angle and norm; for each candidate direction and
// norm every bias that puts some point exactly on its margin is tried (the
// optimum bias of a piecewise-linear convex function sits on a breakpoint).
inline double svm_grid_minimum(const std::vector<Point2>& pts, double lambda,
                               std::size_t angles = 360, std::size_t norms = 200,
                               double max_norm = 20.0) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < angles; ++k) {
    const double theta = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(angles);
    for (std::size_t r = 0; r <= norms; ++r) {
      const double norm = max_norm * static_cast<double>(r) / static_cast<double>(norms);
      const double w0 = norm * std::cos(theta);
      const double w1 = norm * std::sin(theta);
      for (const auto& p : pts) {
        const double b = p.label - (w0 * p.x + w1 * p.y);
        best = std::min(best, svm_objective2(pts, lambda, w0, w1, b));
      }
    }
  }
  return best;
}

}  // namespace oracle
