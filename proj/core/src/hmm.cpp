#include "evotrack/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "evotrack/error.hpp"
#include "evotrack/random.hpp"

namespace evotrack {
namespace {

constexpr double kInitPerturbation = 0.05;
constexpr double kTieTolerance = 1e-12;

void check_row(std::span<const double> row, double tolerance, const char* what) {
  double sum = 0.0;
  for (double v : row) {
    if (!(v >= -tolerance && v <= 1.0 + tolerance))
      throw InputError("hmm", std::string(what) + " has an entry outside [0,1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > tolerance)
    throw InputError("hmm", std::string(what) + " row sums to " + std::to_string(sum));
}

void floor_and_normalize(std::span<double> row) {
  double sum = 0.0;
  for (double& v : row) {
    v = std::max(v, kProbabilityFloor);
    sum += v;
  }
  for (double& v : row) v /= sum;
}

void check_symbols(const HmmModel& model, SequenceView seq) {
  if (seq.empty()) throw InputError("hmm", "observation sequence is empty");
  const auto m = model.alphabet();
  for (int o : seq)
    if (o < 0 || static_cast<std::size_t>(o) >= m)
      throw InputError("hmm", "symbol " + std::to_string(o) + " outside alphabet of size " +
                                  std::to_string(m));
}

// Scaled forward pass. Fills alpha (T x N, each row normalized) and the
// per-step normalizers; returns log P(O | lambda).
double forward(const HmmModel& model, SequenceView seq, std::vector<double>& alpha,
               std::vector<double>& scale) {
  const std::size_t n = model.states();
  const std::size_t t_len = seq.size();
  alpha.resize(t_len * n);
  scale.resize(t_len);
  const auto& a = model.transition;
  const auto& b = model.emission;
  double log_p = 0.0;

  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    alpha[i] = model.initial[i] * b(i, static_cast<std::size_t>(seq[0]));
    sum += alpha[i];
  }
  for (std::size_t t = 0;; ) {
    if (!(sum > 0.0)) return -std::numeric_limits<double>::infinity();
    scale[t] = 1.0 / sum;
    log_p += std::log(sum);
    for (std::size_t i = 0; i < n; ++i) alpha[t * n + i] *= scale[t];
    if (++t == t_len) break;
    const auto o = static_cast<std::size_t>(seq[t]);
    sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += alpha[(t - 1) * n + i] * a(i, j);
      acc *= b(j, o);
      alpha[t * n + j] = acc;
      sum += acc;
    }
  }
  return log_p;
}

}  // namespace

void HmmModel::validate(double tolerance) const {
  const std::size_t n = transition.rows();
  if (n == 0) throw InputError("hmm", "model has no states");
  if (transition.cols() != n || emission.rows() != n || initial.size() != n)
    throw InputError("hmm", "inconsistent matrix shapes");
  if (emission.cols() == 0) throw InputError("hmm", "model has no observation symbols");
  if (!symbols.empty() && symbols.size() != emission.cols())
    throw InputError("hmm", "symbol list does not match the emission matrix");
  for (std::size_t i = 0; i < n; ++i) {
    check_row(transition.row(i), tolerance, "A");
    check_row(emission.row(i), tolerance, "B");
  }
  check_row(initial, tolerance, "pi");
}

void HmmTrainConfig::validate() const {
  if (states < 2) throw InputError("hmm", "need at least 2 hidden states");
  if (restarts < 1) throw InputError("hmm", "restarts must be >= 1");
  if (max_iterations < 1) throw InputError("hmm", "max_iterations must be >= 1");
  if (!(min_log_improvement >= 0.0)) throw InputError("hmm", "min_log_improvement must be >= 0");
}

HmmModel initial_model(std::size_t states, std::size_t alphabet, std::uint64_t seed) {
  Rng rng(seed);
  auto near_uniform = [&](std::span<double> row) {
    for (double& v : row) v = 1.0 + kInitPerturbation * (2.0 * uniform01(rng) - 1.0);
    const double sum = std::accumulate(row.begin(), row.end(), 0.0);
    for (double& v : row) v /= sum;
  };
  HmmModel model{Matrix(states, states), Matrix(states, alphabet),
                 std::vector<double>(states), {}};
  for (std::size_t i = 0; i < states; ++i) {
    near_uniform(model.transition.row(i));
    near_uniform(model.emission.row(i));
  }
  near_uniform(model.initial);
  return model;
}

double log_likelihood(const HmmModel& model, SequenceView sequence) {
  check_symbols(model, sequence);
  std::vector<double> alpha, scale;
  return forward(model, sequence, alpha, scale);
}

double score_llpo(const HmmModel& model, SequenceView sequence) {
  return log_likelihood(model, sequence) / static_cast<double>(sequence.size());
}

double baum_welch_step(const HmmModel& model, std::span<const SequenceView> sequences,
                       HmmModel& next) {
  const std::size_t n = model.states();
  const std::size_t m = model.alphabet();
  const auto& a = model.transition;
  const auto& b = model.emission;

  std::vector<double> pi_acc(n, 0.0), a_den(n, 0.0), b_den(n, 0.0);
  Matrix a_num(n, n), b_num(n, m);
  std::vector<double> alpha, scale, beta, gamma(n), bb(n);
  double total = 0.0;

  for (const auto seq : sequences) {
    const std::size_t t_len = seq.size();
    total += forward(model, seq, alpha, scale);

    beta.assign(t_len * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) beta[(t_len - 1) * n + i] = scale[t_len - 1];
    for (std::size_t t = t_len - 1; t-- > 0;) {
      const auto o = static_cast<std::size_t>(seq[t + 1]);
      for (std::size_t j = 0; j < n; ++j) bb[j] = b(j, o) * beta[(t + 1) * n + j];
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += a(i, j) * bb[j];
        beta[t * n + i] = scale[t] * acc;
      }
    }

    // With this scaling, alpha_t(i) a_ij b_j(o_t+1) beta_t+1(j) is already the
    // posterior of the (i, j) transition at t.
    for (std::size_t t = 0; t + 1 < t_len; ++t) {
      const auto o = static_cast<std::size_t>(seq[t + 1]);
      for (std::size_t j = 0; j < n; ++j) bb[j] = b(j, o) * beta[(t + 1) * n + j];
      for (std::size_t i = 0; i < n; ++i) {
        const double ai = alpha[t * n + i];
        double g = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          const double x = ai * a(i, j) * bb[j];
          a_num(i, j) += x;
          g += x;
        }
        gamma[i] = g;
        a_den[i] += g;
        b_num(i, static_cast<std::size_t>(seq[t])) += g;
        b_den[i] += g;
        if (t == 0) pi_acc[i] += g;
      }
    }
    const std::size_t last = t_len - 1;
    for (std::size_t i = 0; i < n; ++i) {
      const double g = alpha[last * n + i];
      b_num(i, static_cast<std::size_t>(seq[last])) += g;
      b_den[i] += g;
      if (t_len == 1) pi_acc[i] += g;
    }
  }

  next = model;
  const double pi_sum = std::accumulate(pi_acc.begin(), pi_acc.end(), 0.0);
  if (pi_sum > 0.0)
    for (std::size_t i = 0; i < n; ++i) next.initial[i] = pi_acc[i] / pi_sum;
  for (std::size_t i = 0; i < n; ++i) {
    if (a_den[i] > 0.0)
      for (std::size_t j = 0; j < n; ++j) next.transition(i, j) = a_num(i, j) / a_den[i];
    if (b_den[i] > 0.0)
      for (std::size_t k = 0; k < m; ++k) next.emission(i, k) = b_num(i, k) / b_den[i];
    floor_and_normalize(next.transition.row(i));
    floor_and_normalize(next.emission.row(i));
  }
  floor_and_normalize(next.initial);
  return total;
}

HmmTrainResult train_hmm(std::span<const SequenceView> sequences, std::size_t alphabet,
                         const HmmTrainConfig& config) {
  config.validate();
  if (sequences.empty()) throw InputError("hmm", "no training sequences");
  if (alphabet == 0) throw InputError("hmm", "alphabet is empty");
  double symbols_total = 0.0;
  {
    HmmModel probe{Matrix(1, 1, 1.0), Matrix(1, alphabet, 1.0 / static_cast<double>(alphabet)),
                   {1.0}, {}};
    for (const auto seq : sequences) {
      check_symbols(probe, seq);
      symbols_total += static_cast<double>(seq.size());
    }
  }

  HmmTrainResult best;
  best.restart_log_likelihood.resize(config.restarts);
  double best_ll = -std::numeric_limits<double>::infinity();

  for (std::size_t r = 0; r < config.restarts; ++r) {
    HmmModel model = initial_model(config.states, alphabet, derive_seed(config.seed, "hmm-init", r));
    HmmModel next;
    std::vector<double> history;
    std::size_t iterations = 0;
    for (; iterations < config.max_iterations;) {
      const double ll = baum_welch_step(model, sequences, next);
      history.push_back(ll);
      model = std::move(next);
      ++iterations;
      if (history.size() >= 2 &&
          (ll - history[history.size() - 2]) / symbols_total < config.min_log_improvement)
        break;
    }
    double final_ll = 0.0;
    for (const auto seq : sequences) final_ll += log_likelihood(model, seq);
    history.push_back(final_ll);
    best.restart_log_likelihood[r] = final_ll;
    if (final_ll > best_ll) {
      best_ll = final_ll;
      best.model = std::move(model);
      best.log_likelihood = std::move(history);
      best.iterations = iterations;
      best.best_restart = r;
    }
  }
  return best;
}

std::vector<double> stationary_distribution(const Matrix& transition) {
  const std::size_t n = transition.rows();
  // Solve pi (A - I) = 0 with sum(pi) = 1 as an n x n system: the last
  // balance equation is replaced by the normalization.
  Matrix sys(n, n + 1);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c)
      sys(r, c) = r + 1 == n ? 1.0 : transition(c, r) - (r == c ? 1.0 : 0.0);
    sys(r, n) = r + 1 == n ? 1.0 : 0.0;
  }
  bool singular = false;
  for (std::size_t col = 0; col < n && !singular; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(sys(r, col)) > std::abs(sys(pivot, col))) pivot = r;
    if (std::abs(sys(pivot, col)) < 1e-14) {
      singular = true;
      break;
    }
    if (pivot != col)
      for (std::size_t c = 0; c <= n; ++c) std::swap(sys(col, c), sys(pivot, c));
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = sys(r, col) / sys(col, col);
      if (f == 0.0) continue;
      for (std::size_t c = col; c <= n; ++c) sys(r, c) -= f * sys(col, c);
    }
  }
  std::vector<double> pi(n);
  if (!singular) {
    for (std::size_t i = 0; i < n; ++i) pi[i] = std::max(0.0, sys(i, n) / sys(i, i));
  } else {
    // Reducible chain: Cesaro average of the power iteration from uniform.
    std::vector<double> p(n, 1.0 / static_cast<double>(n)), q(n);
    std::fill(pi.begin(), pi.end(), 0.0);
    constexpr int kSteps = 2000;
    for (int s = 0; s < kSteps; ++s) {
      for (std::size_t j = 0; j < n; ++j) {
        q[j] = 0.0;
        for (std::size_t i = 0; i < n; ++i) q[j] += p[i] * transition(i, j);
      }
      p.swap(q);
      for (std::size_t j = 0; j < n; ++j) pi[j] += p[j] / kSteps;
    }
  }
  const double sum = std::accumulate(pi.begin(), pi.end(), 0.0);
  for (double& v : pi) v /= sum;
  return pi;
}

HmmModel canonicalize(const HmmModel& model) {
  const std::size_t n = model.states();
  const auto stationary = stationary_distribution(model.transition);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (std::abs(stationary[x] - stationary[y]) > kTieTolerance)
      return stationary[x] > stationary[y];
    return model.emission(x, 0) > model.emission(y, 0);
  });
  HmmModel out = model;
  for (std::size_t i = 0; i < n; ++i) {
    out.initial[i] = model.initial[order[i]];
    for (std::size_t j = 0; j < n; ++j) out.transition(i, j) = model.transition(order[i], order[j]);
    for (std::size_t k = 0; k < model.alphabet(); ++k)
      out.emission(i, k) = model.emission(order[i], k);
  }
  return out;
}

EmbeddingTable hmm2vec(const HmmModel& model, const Vocabulary& vocab) {
  if (model.alphabet() != vocab.size())
    throw InputError("hmm", "model alphabet (" + std::to_string(model.alphabet()) +
                                ") does not match vocabulary size (" +
                                std::to_string(vocab.size()) + ")");
  const auto canonical = canonicalize(model);
  const std::size_t n = canonical.states();
  std::vector<double> values(vocab.size() * n);
  for (std::size_t m = 0; m < vocab.size(); ++m)
    for (std::size_t s = 0; s < n; ++s) values[m * n + s] = canonical.emission(s, m);
  return EmbeddingTable(EmbeddingSource::hmm2vec, vocab.symbols(), n, std::move(values));
}

void write_model(std::ostream& out, const HmmModel& model) {
  const std::size_t n = model.states();
  const std::size_t m = model.alphabet();
  out << std::setprecision(17);
  out << n << ' ' << m << '\n';
  auto row = [&](std::span<const double> r) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? " " : "") << r[i];
    out << '\n';
  };
  for (std::size_t i = 0; i < n; ++i) row(model.transition.row(i));
  for (std::size_t i = 0; i < n; ++i) row(model.emission.row(i));
  row(model.initial);
  if (!model.symbols.empty()) {
    for (std::size_t i = 0; i < m; ++i) out << (i ? " " : "") << model.symbols[i];
    out << '\n';
  }
}

HmmModel read_model(std::istream& in) {
  std::size_t n = 0, m = 0;
  if (!(in >> n >> m) || n == 0 || m == 0)
    throw InputError("hmm", "model text must start with positive N and M");
  HmmModel model{Matrix(n, n), Matrix(n, m), std::vector<double>(n), {}};
  auto read = [&](double& v) {
    if (!(in >> v)) throw InputError("hmm", "model text is truncated");
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) read(model.transition(i, j));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < m; ++k) read(model.emission(i, k));
  for (double& v : model.initial) read(v);
  std::string token;
  while (model.symbols.size() < m && in >> token) model.symbols.push_back(token);
  if (!model.symbols.empty() && model.symbols.size() != m)
    throw InputError("hmm", "model symbol line is incomplete");
  model.validate(1e-6);
  return model;
}

}  // namespace evotrack
