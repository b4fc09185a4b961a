#pragma once

#include <random>
#include <span>
#include <vector>

#include "evotrack/hmm.hpp"
#include "oracles.hpp"

namespace testing_support {

using evotrack::HmmModel;
using evotrack::Matrix;

inline std::vector<double> random_row(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> r(n);
  double s = 0;
  for (auto& x : r) s += (x = u(rng));
  for (auto& x : r) x /= s;
  return r;
}

inline HmmModel random_model(std::mt19937_64& rng, std::size_t n, std::size_t m) {
  HmmModel model{Matrix(n, n), Matrix(n, m), random_row(rng, n), {}};
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = random_row(rng, n);
    const auto b = random_row(rng, m);
    for (std::size_t j = 0; j < n; ++j) model.transition(i, j) = a[j];
    for (std::size_t j = 0; j < m; ++j) model.emission(i, j) = b[j];
  }
  return model;
}

inline HmmModel make_model(const oracle::Mat& a, const oracle::Mat& b, const std::vector<double>& pi) {
  HmmModel model{Matrix(a.size(), a.size()), Matrix(b.size(), b[0].size()), pi, {}};
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) model.transition(i, j) = a[i][j];
  for (std::size_t i = 0; i < b.size(); ++i)
    for (std::size_t j = 0; j < b[0].size(); ++j) model.emission(i, j) = b[i][j];
  return model;
}

inline oracle::Mat to_rows(const Matrix& m) {
  oracle::Mat out(m.rows(), std::vector<double>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  return out;
}

inline std::size_t draw(std::mt19937_64& rng, std::span<const double> p) {
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (u < p[i]) return i;
    u -= p[i];
  }
  return p.size() - 1;
}

inline std::vector<int> sample_sequence(std::mt19937_64& rng, const HmmModel& model, std::size_t t_len) {
  std::vector<int> obs;
  std::size_t state = draw(rng, model.initial);
  for (std::size_t t = 0; t < t_len; ++t) {
    obs.push_back(static_cast<int>(draw(rng, model.emission.row(state))));
    state = draw(rng, model.transition.row(state));
  }
  return obs;
}

}  // namespace testing_support
