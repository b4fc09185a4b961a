// Acceptance suite: one line per criterion, nonzero exit when any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "evotrack/evolution.hpp"
#include "evotrack/pipeline.hpp"
#include "evotrack/timeline.hpp"
#include "evotrack/word2vec.hpp"
#include "hmm_support.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace evotrack;
using namespace testing_support;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit;  // seconds, 0 for none
  std::function<Verdict()> check;
};

constexpr int kSeeds = 20;
const char* const kEngines[] = {"raw", "word2vec(2)", "hmm2vec(2)"};

Verdict forward_oracle() {
  std::mt19937_64 rng(1);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 3, m = 1 + rng() % 5, t_len = 1 + rng() % 6;
    const auto model = random_model(rng, n, m);
    std::vector<int> obs(t_len);
    for (auto& o : obs) o = static_cast<int>(rng() % m);
    const double expected = oracle::brute_force_probability(
        to_rows(model.transition), to_rows(model.emission), model.initial, obs);
    const double got = std::exp(log_likelihood(model, obs));
    worst = std::max(worst, std::fabs(got - expected) / expected);
  }
  std::ostringstream d;
  d << "200 models, worst relative error " << worst;
  return {worst <= 1e-10, d.str()};
}

Verdict baum_welch_monotone() {
  double worst = 0.0;
  std::size_t iterations = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(seed);
    const auto truth = random_model(rng, 2 + seed % 3, 3 + seed % 6);
    std::vector<std::vector<int>> seqs;
    for (int i = 0; i < 20; ++i) seqs.push_back(sample_sequence(rng, truth, 30 + rng() % 90));
    const std::vector<SequenceView> views(seqs.begin(), seqs.end());
    HmmTrainConfig config;
    config.seed = seed;
    config.states = 2 + seed % 3;
    config.min_log_improvement = 0.0;
    config.max_iterations = 100;
    const auto result = train_hmm(views, truth.alphabet(), config);
    iterations += result.log_likelihood.size() - 1;
    for (std::size_t i = 1; i < result.log_likelihood.size(); ++i)
      worst = std::max(worst, result.log_likelihood[i - 1] - result.log_likelihood[i]);
  }
  std::ostringstream d;
  d << "20 datasets, " << iterations << " iterations, largest decrease " << worst;
  return {worst <= 1e-8, d.str()};
}

Verdict sgns_gradient_check() {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  double worst = 0.0;
  auto loss = [](const std::vector<double>& c, const std::vector<double>& x, int label) {
    double s = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) s += c[i] * x[i];
    return oracle::sgns_term(s, label);
  };
  auto compare = [&](const std::vector<double>& analytic, const std::vector<double>& numeric) {
    for (std::size_t i = 0; i < analytic.size(); ++i) {
      const double scale = std::max(std::fabs(analytic[i]), std::fabs(numeric[i]));
      const double err = std::fabs(analytic[i] - numeric[i]);
      worst = std::max(worst, scale > 1e-8 ? err / scale : err);
    }
  };
  for (int draw = 0; draw < 100; ++draw) {
    const std::size_t d = 1 + rng() % 5;
    std::vector<double> center(d), context(d);
    for (auto& x : center) x = u(rng);
    for (auto& x : context) x = u(rng);
    const int label = static_cast<int>(rng() % 2);
    const auto g = sgns_gradient(center, context, label);
    compare(g.center, oracle::numeric_gradient(
                          [&](const std::vector<double>& x) { return loss(x, context, label); }, center));
    compare(g.context, oracle::numeric_gradient(
                           [&](const std::vector<double>& x) { return loss(center, x, label); }, context));
  }
  std::ostringstream d;
  d << "100 draws, worst relative error " << worst;
  return {worst <= 1e-4, d.str()};
}

Verdict chi2_units() {
  const std::vector<double> w{0.4, -1.3, 2.2, 0.0};
  const double self = chi2_distance(w, w);
  const double hand = chi2_distance(std::vector<double>{1.0, 3.0}, std::vector<double>{2.0, 2.0});
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> scale(0.001, 1000.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a(10), b(10);
    for (auto& x : a) x = g(rng);
    for (auto& x : b) x = g(rng);
    const double c = scale(rng);
    auto ca = a, cb = b;
    for (auto& x : ca) x *= c;
    for (auto& x : cb) x *= c;
    const double base = chi2_distance(a, b);
    worst = std::max(worst, std::fabs(chi2_distance(ca, cb) - base) / base);
  }
  std::ostringstream d;
  d << "self " << self << ", hand case " << hand << ", worst scaling change " << worst;
  return {self == 0.0 && std::fabs(hand - 1.0 / 3.0) <= 1e-9 && worst <= 1e-9, d.str()};
}

Verdict evolution_units() {
  const std::vector<double> s{-2.0, -2.0}, x{-4.0, -3.0};
  const double same = evolution_score(s, s);
  const double hand = evolution_score(s, x);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> llpo(-6.0, -0.5);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> a(1 + rng() % 20), b(a.size());
    for (auto& v : a) v = llpo(rng);
    for (auto& v : b) v = llpo(rng);
    auto a2 = a, b2 = b;
    a2.insert(a2.end(), a.begin(), a.end());
    b2.insert(b2.end(), b.begin(), b.end());
    const double e = evolution_score(a, b);
    worst = std::max(worst, std::fabs(evolution_score(a2, b2) - e) / e);
  }
  std::ostringstream d;
  d << "identical " << same << ", hand case " << hand << ", worst duplication change " << worst;
  return {same == 0.0 && std::fabs(hand - 1.25) <= 1e-9 && worst <= 1e-12, d.str()};
}

struct SeedRun {
  Month planted;
  Analysis analysis;

  std::size_t top() const {
    const auto& pts = analysis.series.points;
    std::size_t best = 0;
    for (std::size_t i = 1; i < pts.size(); ++i)
      if (pts[i].chi2 > pts[best].chi2) best = i;
    return best;
  }
  bool near(Month m) const { return std::abs(m - planted) <= 1; }
  static bool confirmed(const SpikeReport& s) {
    return s.confirmed && *s.confirmed == Confirmation::confirmed;
  }
  bool top_confirmed_near() const {
    const auto& p = analysis.series.points[top()];
    if (!near(p.month)) return false;
    for (const auto& s : analysis.series.spikes)
      if (s.month == p.month) return confirmed(s);
    return false;
  }
  bool any_confirmed() const {
    return std::any_of(analysis.series.spikes.begin(), analysis.series.spikes.end(), confirmed);
  }
  bool confirmed_near() const {
    for (const auto& s : analysis.series.spikes)
      if (near(s.month) && confirmed(s)) return true;
    return false;
  }
};

SeedRun run_seed(const std::string& engine, std::uint64_t seed, double blend, int evolve_at) {
  const auto corpus = planted(seed, blend, evolve_at);
  RunConfig config;
  config.seed = seed;
  apply_engine_spec(config.engine, engine);
  return {corpus.first_month() + 12, analyze(corpus, config)};
}

template <class Pred>
int count_seeds(const std::string& engine, double blend, int evolve_at, Pred pred) {
  int hits = 0;
  for (std::uint64_t seed = 1; seed <= kSeeds; ++seed)
    hits += pred(run_seed(engine, seed, blend, evolve_at)) ? 1 : 0;
  return hits;
}

Verdict planted_recovery() {
  std::ostringstream d;
  bool pass = true;
  for (const char* engine : kEngines) {
    const int hits = count_seeds(engine, 1.0, 12, [](const SeedRun& r) { return r.top_confirmed_near(); });
    pass = pass && hits >= 18;
    d << engine << ' ' << hits << '/' << kSeeds << "  ";
  }
  return {pass, d.str() + "(need >= 18)"};
}

Verdict control_false_positives() {
  std::ostringstream d;
  bool pass = true;
  for (const char* engine : kEngines) {
    const int hits = count_seeds(engine, 1.0, -1, [](const SeedRun& r) { return r.any_confirmed(); });
    pass = pass && hits <= 1;
    d << engine << ' ' << hits << '/' << kSeeds << "  ";
  }
  return {pass, d.str() + "confirmed (allow <= 1)"};
}

Verdict sensitivity_ordering() {
  auto hits = [](const char* engine) {
    return count_seeds(engine, 0.3, 12, [](const SeedRun& r) { return r.confirmed_near(); });
  };
  const int hmm = hits("hmm2vec(2)"), raw = hits("raw"), ngram = hits("ngram(5)");
  std::ostringstream d;
  d << "confirmed at beta 0.3: hmm2vec(2) " << hmm << ", raw " << raw << ", ngram(5) " << ngram
    << " of " << kSeeds;
  return {hmm >= raw && raw >= ngram, d.str()};
}

Verdict score_separation() {
  double worst = 1.0;
  for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
    const auto corpus = planted(seed);
    const auto vocab = build_vocabulary(corpus.samples(), 20, 1);
    SecondaryConfig config;
    config.hmm.seed = stage_seeds(seed).secondary;
    const auto report = secondary_test(corpus, vocab, corpus.first_month() + 13, config);
    worst = std::min({worst, report.own_model_preference(Side::before),
                      report.own_model_preference(Side::after)});
  }
  std::ostringstream d;
  d << "lowest own-model share over " << kSeeds << " corpora and both sides: " << worst;
  return {worst >= 0.9, d.str()};
}

Verdict determinism() {
  TempDir dir("acceptance");
  PlantedOptions options;
  {
    std::ofstream out(dir / "spec.txt");
    write_synth_spec(out, planted_spec(options));
  }
  bool pass = true;
  std::ostringstream d;
  for (const char* engine : kEngines) {
    std::ostringstream log;
    std::string outputs[2][2];
    for (int run = 0; run < 2; ++run) {
      RunConfig config;
      config.synth_spec = dir / "spec.txt";
      config.output = dir / (std::string("run") + std::to_string(run));
      apply_engine_spec(config.engine, engine);
      if (run_pipeline(config, log).exit_code != kExitOk) return {false, std::string(engine) + " run failed"};
      outputs[run][0] = read_text(config.output / "series.csv");
      outputs[run][1] = read_text(config.output / "spikes.csv");
    }
    const bool same = outputs[0][0] == outputs[1][0] && outputs[0][1] == outputs[1][1];
    pass = pass && same && !outputs[0][0].empty();
    d << engine << (same ? " identical  " : " DIFFERENT  ");
  }
  return {pass, d.str()};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "forward algorithm vs path enumeration", 10, forward_oracle},
      {2, "Baum-Welch log-likelihood monotone", 30, baum_welch_monotone},
      {3, "SGNS gradient vs central differences", 5, sgns_gradient_check},
      {4, "chi-square unit cases", 0, chi2_units},
      {5, "evolution score unit cases", 0, evolution_units},
      {6, "planted spike recovery", 300, planted_recovery},
      {7, "control false-positive bound", 0, control_false_positives},
      {8, "sensitivity ordering at beta 0.3", 0, sensitivity_ordering},
      {9, "secondary-test score separation", 0, score_separation},
      {10, "run determinism", 0, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit > 0 && secs > c.time_limit) {
      v.pass = false;
      v.detail += " (over the time limit)";
    }
    failed += v.pass ? 0 : 1;
    std::printf("[%s] %2d %s: %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", c.id, c.name.c_str(),
                v.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
